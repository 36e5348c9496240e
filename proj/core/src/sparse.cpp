#include "derham/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "derham/parallel.hpp"

namespace derham {

ZeroPivotError::ZeroPivotError(Index row)
    : std::runtime_error("zero pivot in row " + std::to_string(row)), row_(row)
{
}

CsrMatrix::CsrMatrix(Index nrows, Index ncols)
    : nrows_(nrows), ncols_(ncols), row_ptr_(static_cast<std::size_t>(nrows) + 1, 0)
{
    if (nrows < 0 || ncols < 0) {
        throw DimensionError("negative matrix dimension");
    }
}

CsrMatrix::CsrMatrix(Index nrows, Index ncols, std::vector<Offset> row_ptr,
                     std::vector<Index> col_idx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values))
{
    check_invariants();
}

CsrMatrix CsrMatrix::from_triplets(Index nrows, Index ncols, std::vector<Triplet> entries)
{
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
            throw DimensionError("triplet index out of range");
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<Offset> row_ptr(static_cast<std::size_t>(nrows) + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(entries.size());
    vals.reserve(entries.size());
    for (std::size_t p = 0; p < entries.size();) {
        const Index r = entries[p].row;
        const Index c = entries[p].col;
        double sum = 0.0;
        while (p < entries.size() && entries[p].row == r && entries[p].col == c) {
            sum += entries[p].value;
            ++p;
        }
        cols.push_back(c);
        vals.push_back(sum);
        ++row_ptr[static_cast<std::size_t>(r) + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return CsrMatrix(nrows, ncols, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::identity(Index n, double diag)
{
    std::vector<Offset> row_ptr(static_cast<std::size_t>(n) + 1);
    std::iota(row_ptr.begin(), row_ptr.end(), Offset{0});
    std::vector<Index> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), Index{0});
    return CsrMatrix(n, n, std::move(row_ptr), std::move(cols),
                     std::vector<double>(static_cast<std::size_t>(n), diag));
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> diag)
{
    auto m = identity(static_cast<Index>(diag.size()));
    std::copy(diag.begin(), diag.end(), m.values_.begin());
    return m;
}

Offset CsrMatrix::find(Index i, Index j) const
{
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) {
        return -1;
    }
    return row_ptr_[i] + (it - cols.begin());
}

double CsrMatrix::coeff(Index i, Index j) const
{
    const Offset p = find(i, j);
    return p < 0 ? 0.0 : values_[p];
}

Vector CsrMatrix::diagonal_values() const
{
    Vector d(static_cast<std::size_t>(std::min(nrows_, ncols_)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i) {
        d[i] = coeff(i, i);
    }
    return d;
}

bool CsrMatrix::is_lower_triangular() const
{
    for (Index i = 0; i < nrows_; ++i) {
        const auto cols = row_cols(i);
        if (!cols.empty() && cols.back() > i) {
            return false;
        }
    }
    return true;
}

bool CsrMatrix::is_upper_triangular() const
{
    for (Index i = 0; i < nrows_; ++i) {
        const auto cols = row_cols(i);
        if (!cols.empty() && cols.front() < i) {
            return false;
        }
    }
    return true;
}

void CsrMatrix::scale(double alpha)
{
    for (auto& v : values_) {
        v *= alpha;
    }
}

CsrMatrix::Storage CsrMatrix::release() &&
{
    Storage out{std::move(row_ptr_), std::move(col_idx_), std::move(values_)};
    nrows_ = 0;
    ncols_ = 0;
    row_ptr_ = {0};
    col_idx_.clear();
    values_.clear();
    return out;
}

void CsrMatrix::check_invariants() const
{
    if (nrows_ < 0 || ncols_ < 0) {
        throw std::logic_error("negative matrix dimension");
    }
    if (row_ptr_.size() != static_cast<std::size_t>(nrows_) + 1 || row_ptr_.front() != 0) {
        throw std::logic_error("row pointer array has wrong size");
    }
    if (static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size() ||
        col_idx_.size() != values_.size()) {
        throw std::logic_error("row pointer does not match entry count");
    }
    for (Index i = 0; i < nrows_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) {
            throw std::logic_error("row pointer not monotone");
        }
        for (Offset p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            if (col_idx_[p] < 0 || col_idx_[p] >= ncols_) {
                throw std::logic_error("column index out of range");
            }
            if (p > row_ptr_[i] && col_idx_[p - 1] >= col_idx_[p]) {
                throw std::logic_error("columns not strictly increasing in row " +
                                       std::to_string(i));
            }
        }
    }
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y)
{
    if (x.size() != static_cast<std::size_t>(a.cols()) ||
        y.size() != static_cast<std::size_t>(a.rows())) {
        throw DimensionError("spmv: dimension mismatch");
    }
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    parallel_for_range(a.rows(), [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            double sum = 0.0;
            for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
                sum += va[p] * x[ci[p]];
            }
            y[i] = sum;
        }
    });
}

Vector spmv(const CsrMatrix& a, std::span<const double> x)
{
    Vector y(static_cast<std::size_t>(a.rows()));
    spmv(a, x, y);
    return y;
}

void spmv_axpby(double alpha, const CsrMatrix& a, std::span<const double> x, double beta,
                std::span<double> y)
{
    if (x.size() != static_cast<std::size_t>(a.cols()) ||
        y.size() != static_cast<std::size_t>(a.rows())) {
        throw DimensionError("spmv: dimension mismatch");
    }
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    parallel_for_range(a.rows(), [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
            double sum = 0.0;
            for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
                sum += va[p] * x[ci[p]];
            }
            y[i] = alpha * sum + (beta == 0.0 ? 0.0 : beta * y[i]);
        }
    });
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b)
{
    return spgemm_sum(a, b, 1.0, {});
}

CsrMatrix spgemm_sum(const CsrMatrix& a, const CsrMatrix& b, double scale,
                     std::span<const ScaledTerm> terms)
{
    if (a.cols() != b.rows()) {
        throw DimensionError("spgemm: inner dimensions differ");
    }
    const Index m = a.rows();
    const Index n = b.cols();
    for (const auto& t : terms) {
        if (t.matrix->rows() != m || t.matrix->cols() != n) {
            throw DimensionError("spgemm_sum: addend shape differs from product");
        }
    }
    std::vector<Index> marker(static_cast<std::size_t>(n), -1);

    // Symbolic pass: exact row counts so the numeric pass allocates once.
    std::vector<Offset> row_ptr(static_cast<std::size_t>(m) + 1, 0);
    for (Index i = 0; i < m; ++i) {
        Offset count = 0;
        auto visit = [&](Index j) {
            if (marker[j] != i) {
                marker[j] = i;
                ++count;
            }
        };
        for (const Index k : a.row_cols(i)) {
            for (const Index j : b.row_cols(k)) {
                visit(j);
            }
        }
        for (const auto& t : terms) {
            for (const Index j : t.matrix->row_cols(i)) {
                visit(j);
            }
        }
        row_ptr[i + 1] = row_ptr[i] + count;
    }

    std::vector<Index> cols(static_cast<std::size_t>(row_ptr.back()));
    std::vector<double> vals(cols.size());
    std::vector<double> accum(static_cast<std::size_t>(n), 0.0);
    std::fill(marker.begin(), marker.end(), -1);
    for (Index i = 0; i < m; ++i) {
        Offset pos = row_ptr[i];
        auto add = [&](Index j, double v) {
            if (marker[j] != i) {
                marker[j] = i;
                accum[j] = 0.0;
                cols[pos++] = j;
            }
            accum[j] += v;
        };
        const auto acols = a.row_cols(i);
        const auto avals = a.row_values(i);
        for (std::size_t q = 0; q < acols.size(); ++q) {
            const Index k = acols[q];
            const double aik = scale * avals[q];
            const auto bcols = b.row_cols(k);
            const auto bvals = b.row_values(k);
            for (std::size_t r = 0; r < bcols.size(); ++r) {
                add(bcols[r], aik * bvals[r]);
            }
        }
        for (const auto& t : terms) {
            const auto tcols = t.matrix->row_cols(i);
            const auto tvals = t.matrix->row_values(i);
            for (std::size_t r = 0; r < tcols.size(); ++r) {
                add(tcols[r], t.alpha * tvals[r]);
            }
        }
        std::sort(cols.begin() + row_ptr[i], cols.begin() + row_ptr[i + 1]);
        for (Offset p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            vals[p] = accum[cols[p]];
        }
    }
    return CsrMatrix(m, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrMatrix transpose(const CsrMatrix& a)
{
    const Index m = a.rows();
    const Index n = a.cols();
    std::vector<Offset> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    for (const Index j : a.col_idx()) {
        ++row_ptr[static_cast<std::size_t>(j) + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    std::vector<Offset> next(row_ptr.begin(), row_ptr.end() - 1);
    std::vector<Index> cols(static_cast<std::size_t>(a.nnz()));
    std::vector<double> vals(cols.size());
    for (Index i = 0; i < m; ++i) {
        const auto rc = a.row_cols(i);
        const auto rv = a.row_values(i);
        for (std::size_t q = 0; q < rc.size(); ++q) {
            const Offset p = next[rc[q]]++;
            cols[p] = i;
            vals[p] = rv[q];
        }
    }
    return CsrMatrix(n, m, std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("add_scaled: shapes differ");
    }
    const Index m = a.rows();
    std::vector<Offset> row_ptr(static_cast<std::size_t>(m) + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(static_cast<std::size_t>(std::max(a.nnz(), b.nnz())));
    vals.reserve(cols.capacity());
    for (Index i = 0; i < m; ++i) {
        const auto ac = a.row_cols(i);
        const auto av = a.row_values(i);
        const auto bc = b.row_cols(i);
        const auto bv = b.row_values(i);
        std::size_t p = 0;
        std::size_t q = 0;
        while (p < ac.size() || q < bc.size()) {
            if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
                cols.push_back(ac[p]);
                vals.push_back(alpha * av[p]);
                ++p;
            } else if (p == ac.size() || bc[q] < ac[p]) {
                cols.push_back(bc[q]);
                vals.push_back(beta * bv[q]);
                ++q;
            } else {
                cols.push_back(ac[p]);
                vals.push_back(alpha * av[p] + beta * bv[q]);
                ++p;
                ++q;
            }
        }
        row_ptr[i + 1] = static_cast<Offset>(cols.size());
    }
    return CsrMatrix(m, a.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

CsrMatrix prune(const CsrMatrix& a, double tol)
{
    std::vector<Offset> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i = 0; i < a.rows(); ++i) {
        const auto rc = a.row_cols(i);
        const auto rv = a.row_values(i);
        for (std::size_t q = 0; q < rc.size(); ++q) {
            if (rc[q] == i || std::abs(rv[q]) > tol) {
                cols.push_back(rc[q]);
                vals.push_back(rv[q]);
            }
        }
        row_ptr[i + 1] = static_cast<Offset>(cols.size());
    }
    return CsrMatrix(a.rows(), a.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

double frobenius_norm(const CsrMatrix& a)
{
    double sum = 0.0;
    for (const double v : a.values()) {
        sum += v * v;
    }
    return std::sqrt(sum);
}

void tri_solve(const CsrMatrix& t, Triangle tri, std::span<const double> b, std::span<double> x)
{
    const Index n = t.rows();
    if (t.cols() != n || b.size() != static_cast<std::size_t>(n) ||
        x.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("tri_solve: dimension mismatch");
    }
    const auto rp = t.row_ptr();
    const auto ci = t.col_idx();
    const auto va = t.values();
    if (tri == Triangle::Lower) {
        for (Index i = 0; i < n; ++i) {
            double sum = b[i];
            double diag = 0.0;
            for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
                const Index j = ci[p];
                if (j < i) {
                    sum -= va[p] * x[j];
                } else if (j == i) {
                    diag = va[p];
                }
            }
            if (diag == 0.0) {
                throw ZeroPivotError(i);
            }
            x[i] = sum / diag;
        }
    } else {
        for (Index i = n - 1; i >= 0; --i) {
            double sum = b[i];
            double diag = 0.0;
            for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
                const Index j = ci[p];
                if (j > i) {
                    sum -= va[p] * x[j];
                } else if (j == i) {
                    diag = va[p];
                }
            }
            if (diag == 0.0) {
                throw ZeroPivotError(i);
            }
            x[i] = sum / diag;
        }
    }
}

Vector tri_solve(const CsrMatrix& t, std::span<const double> b)
{
    Triangle tri;
    if (t.is_lower_triangular()) {
        tri = Triangle::Lower;
    } else if (t.is_upper_triangular()) {
        tri = Triangle::Upper;
    } else {
        throw std::invalid_argument("tri_solve: matrix is not triangular");
    }
    Vector x(b.size());
    tri_solve(t, tri, b, x);
    return x;
}

}  // namespace derham
