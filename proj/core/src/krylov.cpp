#include "derham/krylov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace derham {

LinearOperator LinearOperator::from_matrix(const CsrMatrix& a)
{
    if (a.rows() != a.cols()) {
        throw DimensionError("LinearOperator: matrix must be square");
    }
    const CsrMatrix* p = &a;
    return {a.rows(), [p](std::span<const double> x, std::span<double> y) { spmv(*p, x, y); }};
}

LinearOperator LinearOperator::identity(Index n)
{
    return {n, [](std::span<const double> x, std::span<double> y) {
                std::copy(x.begin(), x.end(), y.begin());
            }};
}

Vector LinearOperator::operator()(std::span<const double> x) const
{
    Vector y(static_cast<std::size_t>(dim));
    apply(x, y);
    return y;
}

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged:
        return "converged";
    case SolveStatus::MaxIterations:
        return "max-iterations";
    case SolveStatus::Breakdown:
        return "breakdown";
    }
    return "unknown";
}

double dot(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double norm2(std::span<const double> x)
{
    return std::sqrt(dot(x, x));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

namespace {

void check_operator(const LinearOperator& op, std::size_t n, const char* what)
{
    if (!op.apply || static_cast<std::size_t>(op.dim) != n) {
        throw DimensionError(std::string("cg: ") + what + " does not match the right-hand side");
    }
}

}  // namespace

SolveReport cg(const LinearOperator& a, std::span<const double> b, std::span<double> x,
               const LinearOperator* precond, const CgOptions& opts)
{
    const std::size_t n = b.size();
    check_operator(a, n, "operator");
    if (x.size() != n) {
        throw DimensionError("cg: initial guess has the wrong length");
    }
    if (precond) {
        check_operator(*precond, n, "preconditioner");
    }
    if (!(opts.tol > 0.0) || opts.max_iterations < 0) {
        throw std::invalid_argument("cg: tolerance must be positive and max_iterations >= 0");
    }

    SolveReport rep;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        rep.residual_history = {0.0};
        rep.converged = true;
        rep.status = SolveStatus::Converged;
        return rep;
    }

    Vector r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        a.apply(x, q);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = b[i] - q[i];
        }
        return norm2(r) / bnorm;
    };

    double rel = true_residual();
    rep.residual_history.push_back(rel);
    auto precondition = [&] {
        if (precond) {
            precond->apply(r, z);
        } else {
            std::copy(r.begin(), r.end(), z.begin());
        }
    };

    // After the recurrence residual reaches tol the true residual is checked;
    // if rounding has let the two drift apart the iteration restarts from it.
    int restarts = 0;
    bool restart = true;
    double rz = 0.0;
    int it = 0;
    while (true) {
        if (rel <= opts.tol) {
            const double actual = true_residual();
            if (actual <= opts.tol || restarts >= 3) {
                rep.residual_history.back() = actual;
                rel = actual;
                rep.converged = actual <= opts.tol;
                rep.status = rep.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
                break;
            }
            rel = actual;
            rep.residual_history.back() = actual;
            restart = true;
            ++restarts;
        }
        if (it >= opts.max_iterations) {
            rep.status = SolveStatus::MaxIterations;
            break;
        }
        if (restart) {
            precondition();
            rz = dot(r, z);
            p = z;
            restart = false;
        }
        if (!(rz > 0.0)) {
            rep.status = SolveStatus::Breakdown;
            break;
        }
        a.apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            rep.status = SolveStatus::Breakdown;
            break;
        }
        const double alpha = rz / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        ++it;
        rel = norm2(r) / bnorm;
        rep.residual_history.push_back(rel);
        if (rel <= opts.tol) {
            continue;
        }
        precondition();
        const double rz_new = dot(r, z);
        double beta = rz_new / rz;
        if (opts.flexible) {
            // r_old = r + alpha q
            double corr = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                corr += (r[i] + alpha * q[i]) * z[i];
            }
            beta = (rz_new - corr) / rz;
        }
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    rep.iterations = it;
    rep.final_relative_residual = rel;
    return rep;
}

CgResult cg(const LinearOperator& a, std::span<const double> b, const LinearOperator* precond,
            const CgOptions& opts)
{
    CgResult res;
    res.x.assign(b.size(), 0.0);
    res.report = cg(a, b, res.x, precond, opts);
    return res;
}

// ---------------------------------------------------------------------------
// LOBPCG

namespace {

using Mat = Eigen::MatrixXd;
using Map = Eigen::Map<const Eigen::VectorXd>;

void apply_block(const LinearOperator& op, const Mat& x, Mat& y)
{
    y.resize(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        op.apply(std::span<const double>(x.col(j).data(), static_cast<std::size_t>(x.rows())),
                 std::span<double>(y.col(j).data(), static_cast<std::size_t>(y.rows())));
    }
}

// Basis T with T^T G T = I over the numerically independent directions of the
// Gram matrix G, dropping those with relative weight below `drop`.
Mat gram_basis(const Mat& g, double drop)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const auto& w = es.eigenvalues();
    const double wmax = w.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] > drop * wmax) {
            keep.push_back(i);
        }
    }
    Mat t(g.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        t.col(static_cast<Eigen::Index>(j)) =
            es.eigenvectors().col(keep[j]) / std::sqrt(w[keep[j]]);
    }
    return t;
}

Mat columns(const Mat& m, const std::vector<Eigen::Index>& idx)
{
    Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    }
    return out;
}

}  // namespace

EigenReport lobpcg(const LinearOperator& a, const LinearOperator& m, const LobpcgOptions& opts,
                   const LinearOperator* precond)
{
    const Index n = a.dim;
    if (!a.apply || !m.apply || m.dim != n || (precond && precond->dim != n)) {
        throw DimensionError("lobpcg: operator sizes differ");
    }
    if (opts.nev < 1 || opts.block < opts.nev || opts.block > n) {
        throw std::invalid_argument("lobpcg: need 1 <= nev <= block <= n");
    }
    if (!(opts.tol > 0.0)) {
        throw std::invalid_argument("lobpcg: tolerance must be positive");
    }
    const Eigen::Index b = opts.block;
    const int nev = opts.nev;
    constexpr double kDrop = 1e-12;

    EigenReport rep;
    rep.block_size = opts.block;
    rep.seed = opts.seed;

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat x(n, b);
    for (Eigen::Index j = 0; j < b; ++j) {
        for (Index i = 0; i < n; ++i) {
            x(i, j) = dist(rng);
        }
    }

    Mat ax, mx;
    apply_block(a, x, ax);
    apply_block(m, x, mx);

    // Initial Rayleigh-Ritz on the random block.
    Eigen::VectorXd lambda;
    {
        const Mat gm = (x.transpose() * mx + mx.transpose() * x) * 0.5;
        const Mat ga = (x.transpose() * ax + ax.transpose() * x) * 0.5;
        const Mat t = gram_basis(gm, kDrop);
        if (t.cols() < b) {
            throw std::runtime_error("lobpcg: initial block is rank deficient");
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(t.transpose() * ga * t);
        const Mat y = t * es.eigenvectors();
        x = x * y;
        ax = ax * y;
        mx = mx * y;
        lambda = es.eigenvalues();
    }

    Mat p, ap, mp;  // n x b once available
    Mat r(n, b), mr;
    Eigen::VectorXd res(b);

    for (int iter = 0;; ++iter) {
        for (Eigen::Index j = 0; j < b; ++j) {
            r.col(j) = ax.col(j) - lambda[j] * mx.col(j);
        }
        apply_block(m, r, mr);
        for (Eigen::Index j = 0; j < b; ++j) {
            const double un = std::sqrt(std::max(0.0, x.col(j).dot(mx.col(j))));
            res[j] = std::sqrt(std::max(0.0, r.col(j).dot(mr.col(j)))) / un;
        }
        rep.ritz_history.emplace_back(lambda.data(), lambda.data() + b);
        rep.residual_history.emplace_back(res.data(), res.data() + nev);

        int conv = 0;
        while (conv < nev && res[conv] <= opts.tol) {
            ++conv;
        }
        rep.converged_count = conv;
        rep.iterations = iter;
        if (conv == nev) {
            rep.converged = true;
            break;
        }
        if (iter >= opts.max_iterations) {
            break;
        }

        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < b; ++j) {
            if (res[j] > opts.tol) {
                active.push_back(j);
            }
        }
        const Mat ra = columns(r, active);
        Mat w(n, ra.cols());
        if (precond) {
            apply_block(*precond, ra, w);
        } else {
            w = ra;
        }
        // Remove the X component in the M inner product.
        w -= x * (mx.transpose() * w);
        Mat aw, mw;
        apply_block(m, w, mw);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            const double s = std::sqrt(std::max(w.col(j).dot(mw.col(j)), 0.0));
            if (s > 0.0) {
                w.col(j) /= s;
                mw.col(j) /= s;
            }
        }
        apply_block(a, w, aw);

        const bool use_p = p.cols() > 0;
        Mat pa, apa, mpa;
        if (use_p) {
            pa = columns(p, active);
            apa = columns(ap, active);
            mpa = columns(mp, active);
            for (Eigen::Index j = 0; j < pa.cols(); ++j) {
                const double s = std::sqrt(std::max(pa.col(j).dot(mpa.col(j)), 0.0));
                if (s > 0.0) {
                    pa.col(j) /= s;
                    apa.col(j) /= s;
                    mpa.col(j) /= s;
                }
            }
        }

        const Eigen::Index nw = w.cols();
        const Eigen::Index np = use_p ? pa.cols() : 0;
        const Eigen::Index ns = b + nw + np;
        Mat s(n, ns), as(n, ns), ms(n, ns);
        s << x, w, pa;
        as << ax, aw, apa;
        ms << mx, mw, mpa;

        Mat gm = s.transpose() * ms;
        Mat ga = s.transpose() * as;
        gm = (gm + gm.transpose()).eval() * 0.5;
        ga = (ga + ga.transpose()).eval() * 0.5;
        const Mat t = gram_basis(gm, kDrop);
        if (t.cols() < b) {
            throw std::runtime_error("lobpcg: search space collapsed below the block size");
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(t.transpose() * ga * t);
        const Mat y = t * es.eigenvectors().leftCols(b);
        lambda = es.eigenvalues().head(b);

        // New directions: the W and P part of the update.
        const Mat yr = y.bottomRows(ns - b);
        p = s.rightCols(ns - b) * yr;
        ap = as.rightCols(ns - b) * yr;
        mp = ms.rightCols(ns - b) * yr;
        x = s * y;
        ax = as * y;
        mx = ms * y;
    }

    rep.pairs.resize(static_cast<std::size_t>(nev));
    for (int j = 0; j < nev; ++j) {
        const double un = std::sqrt(std::max(0.0, x.col(j).dot(mx.col(j))));
        rep.pairs[static_cast<std::size_t>(j)].lambda = lambda[j];
        rep.pairs[static_cast<std::size_t>(j)].vector.assign(x.col(j).data(), x.col(j).data() + n);
        for (double& v : rep.pairs[static_cast<std::size_t>(j)].vector) {
            v /= un;
        }
    }
    return rep;
}

}  // namespace derham
