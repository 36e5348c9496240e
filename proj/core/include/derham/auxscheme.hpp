#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "derham/fem.hpp"
#include "derham/krylov.hpp"
#include "derham/mesh.hpp"
#include "derham/precond.hpp"

namespace derham {

enum class ProblemKind { Maxwell, GradDiv };  // curl-curl on edges, grad-div on faces
std::string_view to_string(ProblemKind p);
ProblemKind parse_problem(std::string_view s);
int form_degree(ProblemKind p);

enum class SolverKind { Cg, Multigrid };
std::string_view to_string(SolverKind s);
SolverKind parse_solver(std::string_view s);

/// Matrix-free y = (A + B^T U B + shift M) x. Holds a reference to `ops`.
LinearOperator auxiliary_operator(const ComplexOperators& ops, double shift);
/// Matrix-free y = (A + shift M) x.
LinearOperator original_operator(const ComplexOperators& ops, double shift);

/// Builds the preconditioner for A + B^T U B + shift M (or A + shift M when
/// `original` is set). Returns null for PrecondKind::None.
struct PrecondSettings {
    PrecondKind kind = PrecondKind::None;
    MgOptions mg;
    SaitOptions sait;
};
std::unique_ptr<Preconditioner> make_preconditioner(const StructuredMesh& mesh,
                                                    const ComplexOperators& ops, double shift,
                                                    const PrecondSettings& settings,
                                                    bool original = false);

struct SourceConfig {
    SolverKind solver = SolverKind::Cg;
    PrecondSettings precond;
    double tol = 1e-8;
    int max_iterations = 5000;
    /// Mass-equation tolerance; defaults to 1e-4 times `tol`.
    std::optional<double> mass_tol;
    int mass_max_iterations = 5000;
};

struct SourceSolution {
    Vector u;       // recovered solution of (A + cM) u = f
    Vector u_aux;   // auxiliary solution
    Vector v_mass;  // M^-1 B^T U B u_aux
    SolveReport aux_report;
    SolveReport mass_report;
    double residual_original = 0.0;
    /// Empty on success, otherwise "auxiliary" or "mass".
    std::string failed_stage;

    bool converged() const { return failed_stage.empty(); }
};

/// Auxiliary solve, mass correction and recovery u = u_aux + v / c.
SourceSolution solve_source(const StructuredMesh& mesh, const ComplexOperators& ops,
                            std::span<const double> f, const SourceConfig& cfg = {});
/// Same, with a caller-owned preconditioner for the auxiliary system.
SourceSolution solve_source(const ComplexOperators& ops, std::span<const double> f,
                            const SourceConfig& cfg, const Preconditioner* precond);

/// Plain CG on the original system (A + cM) u = f, for comparison.
CgResult solve_original(const StructuredMesh& mesh, const ComplexOperators& ops,
                        std::span<const double> f, const SourceConfig& cfg = {});

/// Predicted original residual e_aux + (A M^-1 / c + I) e_mass, where
/// e_aux = f - S u_aux and e_mass = B^T U B u_aux - M v.
Vector residual_propagation_check(const ComplexOperators& ops, std::span<const double> e_aux,
                                  std::span<const double> e_mass);

/// Power iteration on M^-1 A; returns the Rayleigh quotient estimate of rho.
double spectral_radius_bound(const CsrMatrix& a, const CsrMatrix& m, double tol = 1e-4,
                             int max_iterations = 20000, std::uint64_t seed = 7);
double spectral_radius_bound(const ComplexOperators& ops, double tol = 1e-4);

enum class EigenType { Type0, Type1, Type2, Type3 };
std::string_view to_string(EigenType t);

struct ClassifiedEigenpair {
    double lambda_h = 0.0;      // auxiliary eigenvalue
    double lambda_tilde = 0.0;  // u^T A u / u^T M u
    double lambda_aux = 0.0;    // u^T B^T U B u / u^T M u
    EigenType type = EigenType::Type0;
    Vector vector;
    /// Type3 only: u1 = M^-1 A u / lambda_h and u2 = u - u1.
    std::optional<std::pair<Vector, Vector>> split;
};

ClassifiedEigenpair classify_eigenpair(const ComplexOperators& ops, double lambda_h,
                                       std::span<const double> u, double tol_zero,
                                       double tol_eq);

struct EigenConfig {
    int nev = 20;
    int block = 25;
    double tol = 1e-8;
    int max_iterations = 1000;
    std::uint64_t seed = 20240601;
    PrecondSettings precond;
    /// Shift used to build the preconditioner; the eigen operator itself is unshifted.
    double precond_shift = 1.0;
    double tol_eq = 1e-6;
};

struct EigenSolution {
    EigenReport report;
    std::vector<ClassifiedEigenpair> pairs;
};

/// LOBPCG on (A + B^T U B) u = lambda M u followed by classification.
EigenSolution solve_eigen(const StructuredMesh& mesh, const ComplexOperators& ops,
                          const EigenConfig& cfg = {});

/// Classification with the default tolerances for the given pairs.
std::vector<ClassifiedEigenpair> classify_all(const ComplexOperators& ops,
                                              const std::vector<EigenPair>& pairs,
                                              double tol_eq = 1e-6);

}  // namespace derham
