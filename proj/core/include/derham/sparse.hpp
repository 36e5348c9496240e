#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace derham {

using Index = std::int32_t;
using Offset = std::int64_t;
using Vector = std::vector<double>;

/// Thrown when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown by factorizations and triangular solves on a zero (or missing) pivot.
class ZeroPivotError : public std::runtime_error {
public:
    explicit ZeroPivotError(Index row);
    Index row() const noexcept { return row_; }

private:
    Index row_;
};

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique within
/// each row; stored zeros are allowed and never removed implicitly.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(Index nrows, Index ncols);
    CsrMatrix(Index nrows, Index ncols, std::vector<Offset> row_ptr,
              std::vector<Index> col_idx, std::vector<double> values);

    /// Duplicates are summed.
    static CsrMatrix from_triplets(Index nrows, Index ncols, std::vector<Triplet> entries);
    static CsrMatrix identity(Index n, double diag = 1.0);
    static CsrMatrix diagonal(std::span<const double> diag);

    Index rows() const noexcept { return nrows_; }
    Index cols() const noexcept { return ncols_; }
    Offset nnz() const noexcept { return static_cast<Offset>(col_idx_.size()); }

    std::span<const Offset> row_ptr() const noexcept { return row_ptr_; }
    std::span<const Index> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::span<const Index> row_cols(Index i) const noexcept
    {
        return {col_idx_.data() + row_ptr_[i], col_idx_.data() + row_ptr_[i + 1]};
    }
    std::span<const double> row_values(Index i) const noexcept
    {
        return {values_.data() + row_ptr_[i], values_.data() + row_ptr_[i + 1]};
    }

    /// Stored value at (i, j), zero if outside the pattern.
    double coeff(Index i, Index j) const;
    /// Position of (i, j) in the value array, or -1.
    Offset find(Index i, Index j) const;

    Vector diagonal_values() const;
    bool is_lower_triangular() const;
    bool is_upper_triangular() const;

    void scale(double alpha);
    /// Structural and numerical equality.
    bool operator==(const CsrMatrix& other) const = default;

    /// Throws std::logic_error if the CSR invariants do not hold.
    void check_invariants() const;

    struct Storage {
        std::vector<Offset> row_ptr;
        std::vector<Index> col_idx;
        std::vector<double> values;
    };
    /// Hands the arrays to the caller, leaving an empty matrix.
    Storage release() &&;

private:
    Index nrows_ = 0;
    Index ncols_ = 0;
    std::vector<Offset> row_ptr_{0};
    std::vector<Index> col_idx_;
    std::vector<double> values_;
};

enum class Triangle { Lower, Upper };

// Kernels. All are deterministic: rows are accumulated in increasing column order.

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
Vector spmv(const CsrMatrix& a, std::span<const double> x);
/// y = alpha * A x + beta * y
void spmv_axpby(double alpha, const CsrMatrix& a, std::span<const double> x, double beta,
                std::span<double> y);

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);

struct ScaledTerm {
    double alpha;
    const CsrMatrix* matrix;
};
/// scale * A B + sum(alpha_t T_t) in one pass, without materializing A B.
CsrMatrix spgemm_sum(const CsrMatrix& a, const CsrMatrix& b, double scale,
                     std::span<const ScaledTerm> terms);
CsrMatrix transpose(const CsrMatrix& a);
/// alpha * A + beta * B on the union pattern (cancellations stay stored).
CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta);
/// Drops stored entries with |a_ij| <= tol (diagonal kept).
CsrMatrix prune(const CsrMatrix& a, double tol);

double frobenius_norm(const CsrMatrix& a);

/// Forward/backward substitution. Throws ZeroPivotError on a zero diagonal.
void tri_solve(const CsrMatrix& t, Triangle tri, std::span<const double> b, std::span<double> x);
Vector tri_solve(const CsrMatrix& t, std::span<const double> b);

struct TriangularFactorPair {
    CsrMatrix lower;  // unit diagonal, stored explicitly
    CsrMatrix upper;
};

/// Incomplete LU with zero fill on the pattern of `a`. The matrix is taken by
/// value so callers can move large systems in and avoid a second copy.
TriangularFactorPair ilu0(CsrMatrix a);

/// Threshold-based sparse approximate inverse of a triangular matrix.
/// Runs `iterations` steps of M <- (I - D^-1 T) M + I, dropping off-diagonal
/// entries with magnitude below `tau` after each step, and returns M D^-1 so
/// that the result approximates T^-1 directly.
CsrMatrix sait_thr(const CsrMatrix& t, double tau, int iterations);

}  // namespace derham
