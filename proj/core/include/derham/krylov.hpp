#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "derham/sparse.hpp"

namespace derham {

/// Symmetric linear map given by its action. Non-owning when built from a
/// matrix: the matrix must outlive the operator.
struct LinearOperator {
    Index dim = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;

    static LinearOperator from_matrix(const CsrMatrix& a);
    static LinearOperator identity(Index n);
    Vector operator()(std::span<const double> x) const;
};

enum class SolveStatus { Converged, MaxIterations, Breakdown };
std::string_view to_string(SolveStatus s);

struct SolveReport {
    int iterations = 0;
    /// Relative residual ||b - A x|| / ||b|| after each iteration, starting at iteration 0.
    std::vector<double> residual_history;
    bool converged = false;
    double final_relative_residual = 0.0;
    SolveStatus status = SolveStatus::MaxIterations;
};

struct CgOptions {
    double tol = 1e-8;
    int max_iterations = 5000;
    /// Polak-Ribiere update of the search direction, which tolerates
    /// preconditioners that are not exactly symmetric.
    bool flexible = false;
};

/// Preconditioned conjugate gradients from the initial guess in `x`. Stops on
/// the recurrence residual, then confirms with the true residual.
SolveReport cg(const LinearOperator& a, std::span<const double> b, std::span<double> x,
               const LinearOperator* precond = nullptr, const CgOptions& opts = {});

struct CgResult {
    Vector x;
    SolveReport report;
};
/// Zero initial guess.
CgResult cg(const LinearOperator& a, std::span<const double> b,
            const LinearOperator* precond = nullptr, const CgOptions& opts = {});

struct LobpcgOptions {
    int nev = 20;
    int block = 25;
    double tol = 1e-8;
    int max_iterations = 1000;
    std::uint64_t seed = 20240601;
};

struct EigenPair {
    double lambda = 0.0;
    Vector vector;  // M-normalized
};

struct EigenReport {
    std::vector<EigenPair> pairs;  // the first nev, ascending
    int block_size = 0;
    int converged_count = 0;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// Per-iteration residuals ||A u - lambda M u||_M / ||u||_M of the first nev pairs.
    std::vector<std::vector<double>> residual_history;
    /// Per-iteration Ritz values of the whole block.
    std::vector<std::vector<double>> ritz_history;
};

/// Locally optimal block preconditioned CG for A u = lambda M u (smallest
/// eigenvalues). Rayleigh-Ritz over [X, W, P] with M-orthonormalization and
/// soft locking of converged columns.
EigenReport lobpcg(const LinearOperator& a, const LinearOperator& m, const LobpcgOptions& opts,
                   const LinearOperator* precond = nullptr);

// Small helpers shared by the solvers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace derham
