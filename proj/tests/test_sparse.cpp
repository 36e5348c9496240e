#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "derham/matrix_market.hpp"
#include "derham/mesh.hpp"
#include "derham/sparse.hpp"
#include "support/oracle.hpp"

using namespace derham;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CsrMatrix tridiagonal(Index n)
{
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, 4.0 + 0.1 * i});
        if (i > 0) {
            t.push_back({i, i - 1, -1.0 - 0.01 * i});
            t.push_back({i - 1, i, -1.0 - 0.01 * i});
        }
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

TEST(Csr, FromTripletsSumsDuplicatesAndSorts)
{
    auto a = CsrMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 2, 4.0}});
    a.check_invariants();
    EXPECT_EQ(a.nnz(), 3);
    EXPECT_EQ(a.coeff(1, 2), 5.0);
    EXPECT_EQ(a.coeff(0, 0), 0.0);
    EXPECT_EQ(a.find(0, 0), -1);
    EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionError);
}

TEST(Csr, InvariantCheckRejectsUnsortedRows)
{
    EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), std::logic_error);
    EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {0, 3}, {1.0, 1.0}), std::logic_error);
}

TEST(Spmv, HandExamples)
{
    const Vector x{1.0, 1.0};
    EXPECT_EQ(spmv(CsrMatrix::identity(2), x), x);
    EXPECT_EQ(spmv(CsrMatrix(2, 2), x), (Vector{0.0, 0.0}));
    auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 3.0}});
    EXPECT_EQ(spmv(a, x), (Vector{3.0, 3.0}));
    Vector y{1.0, 2.0};
    spmv_axpby(2.0, a, x, -1.0, y);
    EXPECT_EQ(y, (Vector{5.0, 4.0}));
    EXPECT_THROW(spmv(a, Vector{1.0}), DimensionError);
}

TEST(Spgemm, AgreesWithDenseOnRandomMatrices)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = oracle::random_sparse(20, 20, 0.2, rng);
        const auto b = oracle::random_sparse(20, 20, 0.2, rng);
        const auto c = oracle::random_sparse(20, 20, 0.3, rng);
        const Eigen::MatrixXd da = oracle::dense(a), db = oracle::dense(b), dc = oracle::dense(c);

        EXPECT_LE(max_abs(oracle::dense(spgemm(a, b)) - da * db), 1e-13);
        EXPECT_LE(max_abs(oracle::dense(transpose(a)) - da.transpose()), 0.0);
        EXPECT_LE(max_abs(oracle::dense(add_scaled(a, b, 0.5, -2.0)) - (0.5 * da - 2.0 * db)), 1e-13);

        const std::vector<ScaledTerm> terms{{3.0, &c}};
        EXPECT_LE(max_abs(oracle::dense(spgemm_sum(a, b, 2.0, terms)) - (2.0 * da * db + 3.0 * dc)),
                  1e-13);

        const Vector x = oracle::random_vector(20, rng);
        EXPECT_LE((oracle::to_eigen(spmv(a, x)) - da * oracle::to_eigen(x)).cwiseAbs().maxCoeff(),
                  1e-13);
    }
}

TEST(Spgemm, ShapeErrors)
{
    EXPECT_THROW(spgemm(CsrMatrix(2, 3), CsrMatrix(2, 3)), DimensionError);
    EXPECT_THROW(add_scaled(CsrMatrix(2, 3), CsrMatrix(3, 2), 1.0, 1.0), DimensionError);
}

TEST(Spgemm, CurlOfGradientIsStructurallyZero)
{
    StructuredMesh mesh(DomainKind::Cube, 1);
    const auto cg = spgemm(incidence(mesh, 1).matrix, incidence(mesh, 0).matrix);
    for (double v : cg.values()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Transpose, IsAnInvolution)
{
    std::mt19937_64 rng(3);
    const auto a = oracle::random_sparse(17, 9, 0.3, rng);
    EXPECT_EQ(transpose(transpose(a)), a);
}

TEST(AddScaled, ZeroMultipleKeepsValuesOnMergedPattern)
{
    std::mt19937_64 rng(5);
    const auto a = oracle::random_sparse(10, 10, 0.2, rng);
    const auto b = oracle::random_sparse(10, 10, 0.2, rng);
    const auto s = add_scaled(a, b, 1.0, 0.0);
    for (Index i = 0; i < 10; ++i) {
        for (Index j = 0; j < 10; ++j) {
            EXPECT_EQ(s.coeff(i, j), a.coeff(i, j));
            if (a.find(i, j) >= 0 || b.find(i, j) >= 0) {
                EXPECT_GE(s.find(i, j), 0);
            }
        }
    }
}

TEST(Prune, DropsSmallOffDiagonals)
{
    auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1e-20}, {0, 1, 1e-3}, {1, 0, 2.0}, {1, 1, 1.0}});
    const auto p = prune(a, 1e-2);
    EXPECT_EQ(p.nnz(), 3);
    EXPECT_GE(p.find(0, 0), 0);
    EXPECT_EQ(p.find(0, 1), -1);
}

TEST(TriSolve, HandExamples)
{
    const Vector b{1.0, 3.0};
    EXPECT_EQ(tri_solve(CsrMatrix::identity(2), b), b);
    auto l = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 2.0}, {1, 1, 1.0}});
    EXPECT_EQ(tri_solve(l, b), (Vector{1.0, 1.0}));

    auto singular = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 2.0}});
    Vector x(2);
    EXPECT_THROW(tri_solve(singular, Triangle::Lower, b, x), ZeroPivotError);
}

TEST(TriSolve, RoundTrip)
{
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd d = oracle::dense(oracle::random_spd(40, 0.2, rng));
    const CsrMatrix lower = oracle::sparse(Eigen::MatrixXd(d.triangularView<Eigen::Lower>()));
    const CsrMatrix upper = oracle::sparse(Eigen::MatrixXd(d.triangularView<Eigen::Upper>()));
    const Vector x = oracle::random_vector(40, rng);
    for (const auto* t : {&lower, &upper}) {
        const Vector y = tri_solve(*t, spmv(*t, x));
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_NEAR(y[i], x[i], 1e-12);
        }
    }
}

TEST(Ilu0, DiagonalGivesIdentityLower)
{
    const Vector d{2.0, 3.0, 5.0};
    const auto a = CsrMatrix::diagonal(d);
    const auto f = ilu0(a);
    EXPECT_EQ(f.lower, CsrMatrix::identity(3));
    EXPECT_EQ(f.upper, a);
}

TEST(Ilu0, TridiagonalIsExactLu)
{
    const auto a = tridiagonal(50);
    const auto f = ilu0(a);
    EXPECT_LE(max_abs(oracle::dense(f.lower) * oracle::dense(f.upper) - oracle::dense(a)), 1e-12);
    for (Index i = 0; i < 50; ++i) {
        EXPECT_EQ(f.lower.coeff(i, i), 1.0);
    }
}

TEST(Ilu0, MatchesDenseOracleAndReproducesPattern)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = oracle::random_spd(60, 0.08, rng);
        const auto f = ilu0(a);
        const Eigen::MatrixXd w = oracle::dense_ilu0(a);
        const Eigen::MatrixXd l = oracle::dense(f.lower);
        const Eigen::MatrixXd u = oracle::dense(f.upper);
        Eigen::MatrixXd lw = w.triangularView<Eigen::StrictlyLower>();
        lw.diagonal().setOnes();
        EXPECT_LE(max_abs(l - lw), 1e-13);
        EXPECT_LE(max_abs(u - Eigen::MatrixXd(w.triangularView<Eigen::Upper>())), 1e-13);

        const Eigen::MatrixXd lu = l * u;
        const Eigen::MatrixXd da = oracle::dense(a);
        for (Index i = 0; i < a.rows(); ++i) {
            for (Index j = 0; j < a.cols(); ++j) {
                const bool on = a.find(i, j) >= 0;
                EXPECT_EQ(on, (j < i ? f.lower.find(i, j) : f.upper.find(i, j)) >= 0 || i == j);
                if (on) {
                    EXPECT_NEAR(lu(i, j), da(i, j), 1e-12);
                }
            }
        }
    }
}

TEST(Ilu0, ZeroPivotNamesRow)
{
    auto a = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 0.0}, {2, 2, 1.0}});
    try {
        ilu0(a);
        FAIL() << "expected ZeroPivotError";
    } catch (const ZeroPivotError& e) {
        EXPECT_EQ(e.row(), 1);
    }
}

TEST(Sait, IdentityIsFixed)
{
    for (double tau : {0.0, 0.05, 0.5}) {
        for (int m : {1, 3, 10}) {
            EXPECT_EQ(sait_thr(CsrMatrix::identity(7), tau, m), CsrMatrix::identity(7));
        }
    }
}

TEST(Sait, ExactInverseWithoutDropping)
{
    std::mt19937_64 rng(4);
    const Index n = 120;
    const auto f = ilu0(oracle::random_spd(n, 0.05, rng));
    for (const auto* t : {&f.lower, &f.upper}) {
        const Eigen::MatrixXd dt = oracle::dense(*t);
        const Eigen::MatrixXd inv = dt.inverse();
        const Eigen::MatrixXd m = oracle::dense(sait_thr(*t, 0.0, n));
        EXPECT_LE(max_abs(m - inv), 1e-10);
    }
}

TEST(Sait, ResidualNonIncreasingInIterations)
{
    std::mt19937_64 rng(8);
    const Index n = 80;
    const auto f = ilu0(oracle::random_spd(n, 0.06, rng));
    const Eigen::MatrixXd t = oracle::dense(f.lower);
    const Eigen::MatrixXd t0 = Eigen::MatrixXd::Identity(n, n) - t;
    ASSERT_LT(t0.operatorNorm(), 1.0);
    double prev = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 12; ++m) {
        const Eigen::MatrixXd r =
            Eigen::MatrixXd::Identity(n, n) - oracle::dense(sait_thr(f.lower, 0.0, m)) * t;
        const double norm = r.norm();
        EXPECT_LE(norm, prev * (1.0 + 1e-12)) << "m = " << m;
        prev = norm;
    }
}

TEST(Sait, RejectsBadArguments)
{
    auto full = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    EXPECT_THROW(sait_thr(full, 0.0, 2), std::invalid_argument);
    EXPECT_THROW(sait_thr(CsrMatrix::identity(2), 1.0, 2), std::invalid_argument);
    EXPECT_THROW(sait_thr(CsrMatrix::identity(2), 0.0, 0), std::invalid_argument);
    auto zero_diag = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}});
    EXPECT_THROW(sait_thr(zero_diag, 0.0, 2), ZeroPivotError);
}

TEST(MatrixMarket, RoundTripIsBitExact)
{
    std::mt19937_64 rng(13);
    auto a = oracle::random_sparse(15, 11, 0.3, rng);
    a.values()[0] = 1.0 / 3.0;
    std::stringstream s;
    write_matrix_market(s, a);
    EXPECT_EQ(read_matrix_market(s), a);
}

TEST(MatrixMarket, ReadsSymmetricStorage)
{
    std::istringstream in(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "% comment\n"
        "2 2 2\n"
        "1 1 4.0\n"
        "2 1 -1.5\n");
    const auto a = read_matrix_market(in);
    EXPECT_EQ(a.coeff(0, 1), -1.5);
    EXPECT_EQ(a.coeff(1, 0), -1.5);
    EXPECT_EQ(a.coeff(0, 0), 4.0);
    EXPECT_EQ(a.nnz(), 3);
}
