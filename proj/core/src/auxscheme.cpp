#include "derham/auxscheme.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace derham {

std::string_view to_string(ProblemKind p)
{
    return p == ProblemKind::Maxwell ? "maxwell" : "graddiv";
}

ProblemKind parse_problem(std::string_view s)
{
    if (s == "maxwell" || s == "curlcurl" || s == "1") {
        return ProblemKind::Maxwell;
    }
    if (s == "graddiv" || s == "grad-div" || s == "2") {
        return ProblemKind::GradDiv;
    }
    throw std::invalid_argument("unknown problem '" + std::string(s) + "'");
}

int form_degree(ProblemKind p)
{
    return p == ProblemKind::Maxwell ? 1 : 2;
}

std::string_view to_string(SolverKind s)
{
    return s == SolverKind::Cg ? "cg" : "mg";
}

SolverKind parse_solver(std::string_view s)
{
    if (s == "cg") {
        return SolverKind::Cg;
    }
    if (s == "mg" || s == "multigrid") {
        return SolverKind::Multigrid;
    }
    throw std::invalid_argument("unknown solver '" + std::string(s) + "'");
}

std::string_view to_string(EigenType t)
{
    switch (t) {
    case EigenType::Type0:
        return "Type0";
    case EigenType::Type1:
        return "Type1";
    case EigenType::Type2:
        return "Type2";
    case EigenType::Type3:
        return "Type3";
    }
    return "unknown";
}

namespace {

// Action of A + B^T U B + shift M through the first-order factors; the triple
// products are never formed.
struct FactoredOperator {
    const ComplexOperators* ops;
    CsrMatrix dkt;
    CsrMatrix bt;
    double shift;
    bool with_aux;

    void apply(std::span<const double> x, std::span<double> y) const
    {
        const Vector dx = spmv(ops->Dk, x);
        const Vector mdx = spmv(ops->Mkp1, dx);
        spmv(dkt, mdx, y);
        if (with_aux) {
            const Vector bx = spmv(ops->B, x);
            const Vector ubx = spmv(ops->U, bx);
            spmv_axpby(1.0, bt, ubx, 1.0, y);
        }
        if (shift != 0.0) {
            spmv_axpby(shift, ops->Mk, x, 1.0, y);
        }
    }
};

LinearOperator factored(const ComplexOperators& ops, double shift, bool with_aux)
{
    auto op = std::make_shared<FactoredOperator>(FactoredOperator{
        &ops, transpose(ops.Dk), with_aux ? transpose(ops.B) : CsrMatrix{}, shift, with_aux});
    return {ops.size(), [op](std::span<const double> x, std::span<double> y) { op->apply(x, y); }};
}

double relative_residual(const LinearOperator& a, std::span<const double> f,
                         std::span<const double> u)
{
    Vector r = a(u);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = f[i] - r[i];
    }
    const double fn = norm2(f);
    return fn == 0.0 ? norm2(r) : norm2(r) / fn;
}

Vector mass_solve(const CsrMatrix& m, std::span<const double> b, double tol)
{
    const LinearOperator op = LinearOperator::from_matrix(m);
    CgOptions o;
    o.tol = tol;
    o.max_iterations = 10000;
    return cg(op, b, nullptr, o).x;
}

SourceSolution finish_source(const ComplexOperators& ops, std::span<const double> f,
                             const SourceConfig& cfg, SourceSolution sol)
{
    const Vector bu = spmv(ops.B, sol.u_aux);
    const Vector ubu = spmv(ops.U, bu);
    const Vector rhs = spmv(transpose(ops.B), ubu);

    const LinearOperator m = LinearOperator::from_matrix(ops.Mk);
    Ilu0Preconditioner pc(ops.Mk);
    const LinearOperator pop = pc.as_operator();
    CgResult mass = cg(m, rhs, &pop,
                       CgOptions{cfg.mass_tol.value_or(1e-4 * cfg.tol), cfg.mass_max_iterations});
    sol.v_mass = std::move(mass.x);
    sol.mass_report = std::move(mass.report);
    if (!sol.mass_report.converged && sol.failed_stage.empty()) {
        sol.failed_stage = "mass";
    }

    sol.u = sol.u_aux;
    axpy(1.0 / ops.c, sol.v_mass, sol.u);
    sol.residual_original = relative_residual(original_operator(ops, ops.c), f, sol.u);
    return sol;
}

}  // namespace

LinearOperator auxiliary_operator(const ComplexOperators& ops, double shift)
{
    return factored(ops, shift, true);
}

LinearOperator original_operator(const ComplexOperators& ops, double shift)
{
    return factored(ops, shift, false);
}

std::unique_ptr<Preconditioner> make_preconditioner(const StructuredMesh& mesh,
                                                    const ComplexOperators& ops, double shift,
                                                    const PrecondSettings& settings, bool original)
{
    switch (settings.kind) {
    case PrecondKind::None:
        return nullptr;
    case PrecondKind::Ilu0:
        return std::make_unique<Ilu0Preconditioner>(original ? add_scaled(ops.A, ops.Mk, 1.0, shift)
                                                             : build_auxiliary_matrix(ops, shift));
    case PrecondKind::Sait:
        return std::make_unique<SaitPreconditioner>(
            original ? add_scaled(ops.A, ops.Mk, 1.0, shift) : build_auxiliary_matrix(ops, shift),
            settings.sait);
    case PrecondKind::Multigrid:
        if (original) {
            throw std::invalid_argument("multigrid is only available for the auxiliary system");
        }
        return std::make_unique<MultigridPreconditioner>(std::make_shared<const MgHierarchy>(
            mesh.domain(), mesh.level(), ops.k, shift, build_auxiliary_matrix(ops, shift),
            settings.mg));
    }
    return nullptr;
}

SourceSolution solve_source(const ComplexOperators& ops, std::span<const double> f,
                            const SourceConfig& cfg, const Preconditioner* precond)
{
    if (!(ops.c > 0.0)) {
        throw std::invalid_argument("solve_source: the shift c must be positive");
    }
    if (f.size() != static_cast<std::size_t>(ops.size())) {
        throw DimensionError("solve_source: load vector has the wrong length");
    }
    SourceSolution sol;
    const LinearOperator s = auxiliary_operator(ops, ops.c);
    const LinearOperator pop = precond ? precond->as_operator() : LinearOperator{};
    const bool flexible = precond && precond->kind() == PrecondKind::Sait;
    CgResult aux = cg(s, f, precond ? &pop : nullptr, CgOptions{cfg.tol, cfg.max_iterations, flexible});
    sol.u_aux = std::move(aux.x);
    sol.aux_report = std::move(aux.report);
    if (!sol.aux_report.converged) {
        sol.failed_stage = "auxiliary";
    }
    // Recovery still runs after a failed stage so the original residual is reported.
    return finish_source(ops, f, cfg, std::move(sol));
}

SourceSolution solve_source(const StructuredMesh& mesh, const ComplexOperators& ops,
                            std::span<const double> f, const SourceConfig& cfg)
{
    if (cfg.solver == SolverKind::Multigrid) {
        if (!(ops.c > 0.0)) {
            throw std::invalid_argument("solve_source: the shift c must be positive");
        }
        const MgHierarchy h(mesh.domain(), mesh.level(), ops.k, ops.c,
                            build_auxiliary_matrix(ops, ops.c), cfg.precond.mg);
        SourceSolution sol;
        sol.u_aux.assign(f.size(), 0.0);
        sol.aux_report = mg_solve(h, f, sol.u_aux, CgOptions{cfg.tol, cfg.max_iterations});
        if (!sol.aux_report.converged) {
            sol.failed_stage = "auxiliary";
        }
        return finish_source(ops, f, cfg, std::move(sol));
    }
    const auto pc = make_preconditioner(mesh, ops, ops.c, cfg.precond);
    return solve_source(ops, f, cfg, pc.get());
}

CgResult solve_original(const StructuredMesh& mesh, const ComplexOperators& ops,
                        std::span<const double> f, const SourceConfig& cfg)
{
    const LinearOperator a = original_operator(ops, ops.c);
    const auto pc = make_preconditioner(mesh, ops, ops.c, cfg.precond, true);
    const LinearOperator pop = pc ? pc->as_operator() : LinearOperator{};
    const bool flexible = pc && pc->kind() == PrecondKind::Sait;
    return cg(a, f, pc ? &pop : nullptr, CgOptions{cfg.tol, cfg.max_iterations, flexible});
}

Vector residual_propagation_check(const ComplexOperators& ops, std::span<const double> e_aux,
                                  std::span<const double> e_mass)
{
    if (e_aux.size() != static_cast<std::size_t>(ops.size()) || e_mass.size() != e_aux.size()) {
        throw DimensionError("residual_propagation_check: vector length mismatch");
    }
    Vector out(e_aux.begin(), e_aux.end());
    axpy(1.0, e_mass, out);
    if (norm2(e_mass) == 0.0) {
        return out;
    }
    const Vector w = mass_solve(ops.Mk, e_mass, 1e-15);
    axpy(1.0 / ops.c, spmv(ops.A, w), out);
    return out;
}

double spectral_radius_bound(const CsrMatrix& a, const CsrMatrix& m, double tol,
                             int max_iterations, std::uint64_t seed)
{
    const Index n = a.rows();
    if (a.cols() != n || m.rows() != n || m.cols() != n) {
        throw DimensionError("spectral_radius_bound: matrices must be square and equal-sized");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(static_cast<std::size_t>(n));
    for (double& v : x) {
        v = dist(rng);
    }
    const LinearOperator mop = LinearOperator::from_matrix(m);
    const LinearOperator aop = LinearOperator::from_matrix(a);
    const CgOptions inner{1e-12, 10000};

    // The Rayleigh quotient must settle for a run of consecutive iterations
    // since clustered top eigenvalues make single-step changes misleadingly small.
    constexpr int kStable = 10;
    double theta = 0.0;
    int stable = 0;
    for (int it = 0; it < max_iterations; ++it) {
        const Vector ax = aop(x);
        const Vector mx = mop(x);
        const double next = dot(x, ax) / dot(x, mx);
        if (it > 0 && std::abs(next - theta) <= tol * std::abs(next)) {
            if (++stable >= kStable) {
                return next;
            }
        } else {
            stable = 0;
        }
        theta = next;
        x = cg(mop, ax, nullptr, inner).x;
        const double s = norm2(x);
        if (s == 0.0) {
            return 0.0;
        }
        for (double& v : x) {
            v /= s;
        }
    }
    throw std::runtime_error("spectral_radius_bound: power iteration did not converge");
}

double spectral_radius_bound(const ComplexOperators& ops, double tol)
{
    return spectral_radius_bound(ops.A, ops.Mk, tol);
}

ClassifiedEigenpair classify_eigenpair(const ComplexOperators& ops, double lambda_h,
                                       std::span<const double> u, double tol_zero, double tol_eq)
{
    if (u.size() != static_cast<std::size_t>(ops.size())) {
        throw DimensionError("classify_eigenpair: vector length mismatch");
    }
    ClassifiedEigenpair out;
    out.lambda_h = lambda_h;
    out.vector.assign(u.begin(), u.end());

    const Vector au = spmv(ops.A, u);
    const double unorm = dot(u, spmv(ops.Mk, u));
    const Vector bu = spmv(ops.B, u);
    out.lambda_tilde = dot(u, au) / unorm;
    out.lambda_aux = dot(bu, spmv(ops.U, bu)) / unorm;

    if (lambda_h <= tol_zero) {
        out.type = EigenType::Type0;
    } else if (std::abs(out.lambda_tilde - lambda_h) <= tol_eq * lambda_h) {
        out.type = EigenType::Type1;
    } else if (out.lambda_tilde <= tol_eq * lambda_h) {
        out.type = EigenType::Type2;
    } else {
        out.type = EigenType::Type3;
        Vector u1 = mass_solve(ops.Mk, au, 1e-12);
        for (double& v : u1) {
            v /= lambda_h;
        }
        Vector u2(u.begin(), u.end());
        axpy(-1.0, u1, u2);
        out.split.emplace(std::move(u1), std::move(u2));
    }
    return out;
}

std::vector<ClassifiedEigenpair> classify_all(const ComplexOperators& ops,
                                              const std::vector<EigenPair>& pairs, double tol_eq)
{
    double lmax = 0.0;
    for (const auto& p : pairs) {
        lmax = std::max(lmax, p.lambda);
    }
    const double tol_zero = 1e-6 * std::max(1.0, lmax);
    std::vector<ClassifiedEigenpair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back(classify_eigenpair(ops, p.lambda, p.vector, tol_zero, tol_eq));
    }
    return out;
}

EigenSolution solve_eigen(const StructuredMesh& mesh, const ComplexOperators& ops,
                          const EigenConfig& cfg)
{
    const LinearOperator a = auxiliary_operator(ops, 0.0);
    const LinearOperator m = LinearOperator::from_matrix(ops.Mk);
    const auto pc = make_preconditioner(mesh, ops, cfg.precond_shift, cfg.precond);
    const LinearOperator pop = pc ? pc->as_operator() : LinearOperator{};

    LobpcgOptions lo;
    lo.nev = cfg.nev;
    lo.block = cfg.block;
    lo.tol = cfg.tol;
    lo.max_iterations = cfg.max_iterations;
    lo.seed = cfg.seed;

    EigenSolution sol;
    sol.report = lobpcg(a, m, lo, pc ? &pop : nullptr);
    sol.pairs = classify_all(ops, sol.report.pairs, cfg.tol_eq);
    return sol;
}

}  // namespace derham
