#include <algorithm>
#include <cmath>

#include "derham/sparse.hpp"

namespace derham {

TriangularFactorPair ilu0(CsrMatrix a)
{
    const Index n = a.rows();
    if (a.cols() != n) {
        throw DimensionError("ilu0: matrix must be square");
    }

    std::vector<Offset> diag_pos(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        diag_pos[i] = a.find(i, i);
        if (diag_pos[i] < 0) {
            throw ZeroPivotError(i);
        }
    }

    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    auto va = a.values();

    // IKJ elimination restricted to the pattern; pos maps column -> slot in row i.
    std::vector<Offset> pos(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
            pos[ci[p]] = p;
        }
        for (Offset p = rp[i]; p < rp[i + 1] && ci[p] < i; ++p) {
            const Index k = ci[p];
            const double pivot = va[diag_pos[k]];
            if (pivot == 0.0) {
                throw ZeroPivotError(k);
            }
            const double lik = va[p] / pivot;
            va[p] = lik;
            for (Offset q = diag_pos[k] + 1; q < rp[k + 1]; ++q) {
                const Offset target = pos[ci[q]];
                if (target >= 0) {
                    va[target] -= lik * va[q];
                }
            }
        }
        if (va[diag_pos[i]] == 0.0) {
            throw ZeroPivotError(i);
        }
        for (Offset p = rp[i]; p < rp[i + 1]; ++p) {
            pos[ci[p]] = -1;
        }
    }

    // Split: L gets a fresh array, U reuses the factored storage in place.
    const Index ncols = a.cols();
    auto storage = std::move(a).release();
    std::vector<Offset> lrp(static_cast<std::size_t>(n) + 1, 0);
    for (Index i = 0; i < n; ++i) {
        lrp[i + 1] = lrp[i] + (diag_pos[i] - storage.row_ptr[i]) + 1;
    }
    std::vector<Index> lci(static_cast<std::size_t>(lrp.back()));
    std::vector<double> lva(lci.size());
    for (Index i = 0; i < n; ++i) {
        Offset out = lrp[i];
        for (Offset p = storage.row_ptr[i]; p < diag_pos[i]; ++p, ++out) {
            lci[out] = storage.col_idx[p];
            lva[out] = storage.values[p];
        }
        lci[out] = i;
        lva[out] = 1.0;
    }

    Offset out = 0;
    for (Index i = 0; i < n; ++i) {
        const Offset end = storage.row_ptr[i + 1];
        const Offset begin = diag_pos[i];
        storage.row_ptr[i] = out;
        for (Offset p = begin; p < end; ++p, ++out) {
            storage.col_idx[out] = storage.col_idx[p];
            storage.values[out] = storage.values[p];
        }
    }
    storage.row_ptr[n] = out;
    storage.col_idx.resize(static_cast<std::size_t>(out));
    storage.values.resize(static_cast<std::size_t>(out));

    return {CsrMatrix(n, ncols, std::move(lrp), std::move(lci), std::move(lva)),
            CsrMatrix(n, ncols, std::move(storage.row_ptr), std::move(storage.col_idx),
                      std::move(storage.values))};
}

namespace {

// Drops off-diagonal entries below tau; the diagonal always survives.
CsrMatrix drop_small(const CsrMatrix& m, double tau)
{
    std::vector<Offset> rp(static_cast<std::size_t>(m.rows()) + 1, 0);
    std::vector<Index> ci;
    std::vector<double> va;
    ci.reserve(static_cast<std::size_t>(m.nnz()));
    va.reserve(static_cast<std::size_t>(m.nnz()));
    for (Index i = 0; i < m.rows(); ++i) {
        const auto cols = m.row_cols(i);
        const auto vals = m.row_values(i);
        for (std::size_t q = 0; q < cols.size(); ++q) {
            if (cols[q] == i || !(std::abs(vals[q]) < tau)) {
                ci.push_back(cols[q]);
                va.push_back(vals[q]);
            }
        }
        rp[i + 1] = static_cast<Offset>(ci.size());
    }
    return CsrMatrix(m.rows(), m.cols(), std::move(rp), std::move(ci), std::move(va));
}

}  // namespace

CsrMatrix sait_thr(const CsrMatrix& t, double tau, int iterations)
{
    const Index n = t.rows();
    if (t.cols() != n) {
        throw DimensionError("sait_thr: matrix must be square");
    }
    if (!t.is_lower_triangular() && !t.is_upper_triangular()) {
        throw std::invalid_argument("sait_thr: matrix is not triangular");
    }
    if (tau < 0.0 || tau >= 1.0 || iterations < 1) {
        throw std::invalid_argument("sait_thr: need 0 <= tau < 1 and iterations >= 1");
    }

    const Vector d = t.diagonal_values();
    for (Index i = 0; i < n; ++i) {
        if (d[i] == 0.0) {
            throw ZeroPivotError(i);
        }
    }

    // T0 = I - D^-1 T is strictly triangular.
    std::vector<Offset> rp(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> ci;
    std::vector<double> va;
    for (Index i = 0; i < n; ++i) {
        const auto cols = t.row_cols(i);
        const auto vals = t.row_values(i);
        for (std::size_t q = 0; q < cols.size(); ++q) {
            if (cols[q] != i) {
                ci.push_back(cols[q]);
                va.push_back(-vals[q] / d[i]);
            }
        }
        rp[i + 1] = static_cast<Offset>(ci.size());
    }
    const CsrMatrix t0(n, n, std::move(rp), std::move(ci), std::move(va));
    const CsrMatrix eye = CsrMatrix::identity(n);

    CsrMatrix m = eye;
    for (int k = 0; k < iterations; ++k) {
        m = drop_small(add_scaled(spgemm(t0, m), eye, 1.0, 1.0), tau);
    }

    // Fold D^-1 into the columns.
    auto storage = std::move(m).release();
    for (std::size_t p = 0; p < storage.col_idx.size(); ++p) {
        storage.values[p] /= d[storage.col_idx[p]];
    }
    return CsrMatrix(n, n, std::move(storage.row_ptr), std::move(storage.col_idx),
                     std::move(storage.values));
}

}  // namespace derham
