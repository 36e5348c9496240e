#include "derham/precond.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "derham/fem.hpp"

namespace derham {

std::string_view to_string(PrecondKind k)
{
    switch (k) {
    case PrecondKind::None:
        return "none";
    case PrecondKind::Ilu0:
        return "ilu0";
    case PrecondKind::Sait:
        return "sait";
    case PrecondKind::Multigrid:
        return "mg";
    }
    return "unknown";
}

PrecondKind parse_precond(std::string_view s)
{
    if (s == "none") {
        return PrecondKind::None;
    }
    if (s == "ilu0" || s == "ilu") {
        return PrecondKind::Ilu0;
    }
    if (s == "sait") {
        return PrecondKind::Sait;
    }
    if (s == "mg" || s == "multigrid") {
        return PrecondKind::Multigrid;
    }
    throw std::invalid_argument("unknown preconditioner '" + std::string(s) + "'");
}

void apply_ilu0(const TriangularFactorPair& f, std::span<const double> r, std::span<double> z)
{
    Vector y(r.size());
    tri_solve(f.lower, Triangle::Lower, r, y);
    tri_solve(f.upper, Triangle::Upper, y, z);
}

Vector apply_ilu0(const TriangularFactorPair& f, std::span<const double> r)
{
    Vector z(r.size());
    apply_ilu0(f, r, z);
    return z;
}

SaitFactors build_sait(const TriangularFactorPair& f, const SaitOptions& opts)
{
    return {sait_thr(f.lower, opts.tau, opts.iterations), sait_thr(f.upper, opts.tau, opts.iterations)};
}

void apply_sait(const SaitFactors& s, std::span<const double> r, std::span<double> z)
{
    const Vector y = spmv(s.lower_inv, r);
    spmv(s.upper_inv, y, z);
}

Vector apply_sait(const SaitFactors& s, std::span<const double> r)
{
    Vector z(r.size());
    apply_sait(s, r, z);
    return z;
}

namespace {

void gs_row(const CsrMatrix& a, std::span<const double> f, std::span<double> u, Index i)
{
    double diag = 0.0;
    double sum = f[i];
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
        if (cols[p] == i) {
            diag = vals[p];
        }
        sum -= vals[p] * u[cols[p]];
    }
    if (diag == 0.0) {
        throw ZeroPivotError(i);
    }
    u[i] += sum / diag;
}

}  // namespace

void gauss_seidel_sym(const CsrMatrix& a, std::span<const double> f, std::span<double> u,
                      int sweeps)
{
    const Index n = a.rows();
    if (a.cols() != n || f.size() != static_cast<std::size_t>(n) ||
        u.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("gauss_seidel_sym: size mismatch");
    }
    for (int s = 0; s < sweeps; ++s) {
        for (Index i = 0; i < n; ++i) {
            gs_row(a, f, u, i);
        }
        for (Index i = n - 1; i >= 0; --i) {
            gs_row(a, f, u, i);
        }
    }
}

// ---------------------------------------------------------------------------

MgHierarchy::MgHierarchy(DomainKind domain, int finest_level, int k, double shift, MgOptions opts)
    : opts_(opts)
{
    build(domain, finest_level, k, shift, nullptr);
}

MgHierarchy::MgHierarchy(DomainKind domain, int finest_level, int k, double shift,
                         CsrMatrix finest, MgOptions opts)
    : opts_(opts)
{
    build(domain, finest_level, k, shift, &finest);
}

void MgHierarchy::build(DomainKind domain, int finest_level, int k, double shift,
                        CsrMatrix* finest)
{
    if (finest_level < 1) {
        throw std::invalid_argument("MgHierarchy: finest level must be >= 1");
    }
    if (opts_.nu < 0) {
        throw std::invalid_argument("MgHierarchy: nu must be non-negative");
    }
    std::optional<StructuredMesh> coarser;
    for (int l = 1; l <= finest_level; ++l) {
        StructuredMesh mesh(domain, l);
        Level lv;
        lv.level = l;
        if (l == finest_level && finest) {
            lv.matrix = std::move(*finest);
        } else {
            lv.matrix = build_auxiliary_matrix(build_operators(mesh, k, shift), shift);
        }
        lv.size = lv.matrix.rows();
        if (coarser) {
            lv.prolong = prolongation(*coarser, mesh, k);
            lv.restriction = transpose(lv.prolong);
            if (lv.prolong.rows() != lv.size) {
                throw DimensionError("MgHierarchy: finest matrix does not match the mesh");
            }
        }
        levels_.push_back(std::move(lv));
        coarser.emplace(std::move(mesh));
    }

    const CsrMatrix& a0 = levels_.front().matrix;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(a0.rows(), a0.cols());
    for (Index i = 0; i < a0.rows(); ++i) {
        const auto cols = a0.row_cols(i);
        const auto vals = a0.row_values(i);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            dense(i, cols[p]) = vals[p];
        }
    }
    coarse_.compute(dense);
    if (!(coarse_.rcond() > 1e-14)) {
        throw std::runtime_error("MgHierarchy: coarse matrix is singular");
    }
}

void MgHierarchy::cycle(int l, std::span<const double> f, std::span<double> u) const
{
    const Level& lv = levels_[static_cast<std::size_t>(l)];
    if (l == 0) {
        Eigen::Map<const Eigen::VectorXd> fm(f.data(), static_cast<Eigen::Index>(f.size()));
        Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())) = coarse_.solve(fm);
        return;
    }
    gauss_seidel_sym(lv.matrix, f, u, opts_.nu);

    Vector r(f.begin(), f.end());
    spmv_axpby(-1.0, lv.matrix, u, 1.0, r);
    const Vector rc = spmv(lv.restriction, r);
    Vector ec(rc.size(), 0.0);
    cycle(l - 1, rc, ec);
    spmv_axpby(1.0, lv.prolong, ec, 1.0, u);

    gauss_seidel_sym(lv.matrix, f, u, opts_.nu);
}

void MgHierarchy::vcycle(std::span<const double> f, std::span<double> u) const
{
    const std::size_t n = static_cast<std::size_t>(finest_matrix().rows());
    if (f.size() != n || u.size() != n) {
        throw DimensionError("mg_vcycle: vector length does not match the finest level");
    }
    cycle(levels() - 1, f, u);
}

Vector mg_vcycle(const MgHierarchy& h, std::span<const double> f, std::span<const double> u0)
{
    Vector u(u0.begin(), u0.end());
    h.vcycle(f, u);
    return u;
}

SolveReport mg_solve(const MgHierarchy& h, std::span<const double> f, std::span<double> u,
                     const CgOptions& opts)
{
    const CsrMatrix& a = h.finest_matrix();
    SolveReport rep;
    std::fill(u.begin(), u.end(), 0.0);
    const double fnorm = norm2(f);
    if (fnorm == 0.0) {
        rep.residual_history = {0.0};
        rep.converged = true;
        rep.status = SolveStatus::Converged;
        return rep;
    }
    Vector r(f.size());
    auto residual = [&] {
        std::copy(f.begin(), f.end(), r.begin());
        spmv_axpby(-1.0, a, u, 1.0, r);
        return norm2(r) / fnorm;
    };
    double rel = residual();
    rep.residual_history.push_back(rel);
    while (rel > opts.tol && rep.iterations < opts.max_iterations) {
        h.vcycle(f, u);
        ++rep.iterations;
        rel = residual();
        rep.residual_history.push_back(rel);
    }
    rep.converged = rel <= opts.tol;
    rep.status = rep.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
    rep.final_relative_residual = rel;
    return rep;
}

// ---------------------------------------------------------------------------

LinearOperator Preconditioner::as_operator() const
{
    const Preconditioner* self = this;
    return {size(), [self](std::span<const double> r, std::span<double> z) { self->apply(r, z); }};
}

SaitPreconditioner::SaitPreconditioner(CsrMatrix a, const SaitOptions& opts)
    : s_(build_sait(ilu0(std::move(a)), opts))
{
}

void MultigridPreconditioner::apply(std::span<const double> r, std::span<double> z) const
{
    std::fill(z.begin(), z.end(), 0.0);
    h_->vcycle(r, z);
}

}  // namespace derham
