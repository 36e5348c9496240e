#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/LU>
#include <Eigen/Core>

#include "derham/krylov.hpp"
#include "derham/mesh.hpp"
#include "derham/sparse.hpp"

namespace derham {

enum class PrecondKind { None, Ilu0, Sait, Multigrid };
std::string_view to_string(PrecondKind k);
PrecondKind parse_precond(std::string_view s);

/// z = U^-1 L^-1 r
void apply_ilu0(const TriangularFactorPair& f, std::span<const double> r, std::span<double> z);
Vector apply_ilu0(const TriangularFactorPair& f, std::span<const double> r);

/// Approximate inverses of the ILU(0) triangles.
struct SaitFactors {
    CsrMatrix lower_inv;
    CsrMatrix upper_inv;
};
struct SaitOptions {
    double tau = 0.05;
    int iterations = 10;
};
SaitFactors build_sait(const TriangularFactorPair& f, const SaitOptions& opts = {});
/// z = M_U (M_L r): two sparse products, no substitution.
void apply_sait(const SaitFactors& s, std::span<const double> r, std::span<double> z);
Vector apply_sait(const SaitFactors& s, std::span<const double> r);

/// One forward then one backward Gauss-Seidel sweep, repeated `sweeps` times.
void gauss_seidel_sym(const CsrMatrix& a, std::span<const double> f, std::span<double> u,
                      int sweeps);

struct MgOptions {
    int nu = 5;  // symmetric sweeps before and after the coarse correction
};

/// Geometric hierarchy for the auxiliary system A + B^T U_l B + shift M on
/// levels 1..L, each level rediscretized with U_l = 5 / h_l^3.
class MgHierarchy {
public:
    struct Level {
        int level = 0;
        Index size = 0;
        CsrMatrix matrix;
        CsrMatrix prolong;  // from the next coarser level; empty on the coarsest
        CsrMatrix restriction;  // transpose of prolong
    };

    /// Builds every level including the finest.
    MgHierarchy(DomainKind domain, int finest_level, int k, double shift, MgOptions opts = {});
    /// Uses `finest` (moved in) as the top-level matrix and builds the rest.
    MgHierarchy(DomainKind domain, int finest_level, int k, double shift, CsrMatrix finest,
                MgOptions opts = {});

    int levels() const noexcept { return static_cast<int>(levels_.size()); }
    const Level& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
    const CsrMatrix& finest_matrix() const { return levels_.back().matrix; }
    const MgOptions& options() const noexcept { return opts_; }

    /// One V-cycle on A u = f starting from the values in `u`.
    void vcycle(std::span<const double> f, std::span<double> u) const;

private:
    void build(DomainKind domain, int finest_level, int k, double shift, CsrMatrix* finest);
    void cycle(int l, std::span<const double> f, std::span<double> u) const;

    MgOptions opts_;
    std::vector<Level> levels_;
    Eigen::PartialPivLU<Eigen::MatrixXd> coarse_;
};

/// u <- V-cycle(f, u); returns the updated iterate.
Vector mg_vcycle(const MgHierarchy& h, std::span<const double> f, std::span<const double> u0);

/// Stand-alone multigrid: V-cycles from zero until ||f - A u|| / ||f|| <= tol.
SolveReport mg_solve(const MgHierarchy& h, std::span<const double> f, std::span<double> u,
                     const CgOptions& opts = {});

/// Preconditioner object; as_operator() is non-owning.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
    virtual PrecondKind kind() const noexcept = 0;
    virtual Index size() const noexcept = 0;
    LinearOperator as_operator() const;
};

class Ilu0Preconditioner final : public Preconditioner {
public:
    explicit Ilu0Preconditioner(CsrMatrix a) : f_(ilu0(std::move(a))) {}
    void apply(std::span<const double> r, std::span<double> z) const override { apply_ilu0(f_, r, z); }
    PrecondKind kind() const noexcept override { return PrecondKind::Ilu0; }
    Index size() const noexcept override { return f_.lower.rows(); }
    const TriangularFactorPair& factors() const noexcept { return f_; }

private:
    TriangularFactorPair f_;
};

class SaitPreconditioner final : public Preconditioner {
public:
    SaitPreconditioner(CsrMatrix a, const SaitOptions& opts);
    void apply(std::span<const double> r, std::span<double> z) const override { apply_sait(s_, r, z); }
    PrecondKind kind() const noexcept override { return PrecondKind::Sait; }
    Index size() const noexcept override { return s_.lower_inv.rows(); }
    const SaitFactors& factors() const noexcept { return s_; }

private:
    SaitFactors s_;
};

/// One V-cycle from a zero guess per application.
class MultigridPreconditioner final : public Preconditioner {
public:
    explicit MultigridPreconditioner(std::shared_ptr<const MgHierarchy> h) : h_(std::move(h)) {}
    void apply(std::span<const double> r, std::span<double> z) const override;
    PrecondKind kind() const noexcept override { return PrecondKind::Multigrid; }
    Index size() const noexcept override { return h_->finest_matrix().rows(); }

private:
    std::shared_ptr<const MgHierarchy> h_;
};

}  // namespace derham
