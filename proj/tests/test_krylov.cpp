#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "derham/auxscheme.hpp"
#include "derham/krylov.hpp"
#include "support/oracle.hpp"

using namespace derham;

TEST(Cg, IdentityConvergesInOneIteration)
{
    const auto id = LinearOperator::identity(10);
    std::mt19937_64 rng(1);
    const Vector b = oracle::random_vector(10, rng);
    const auto res = cg(id, b);
    EXPECT_TRUE(res.report.converged);
    EXPECT_EQ(res.report.status, SolveStatus::Converged);
    EXPECT_EQ(res.report.iterations, 1);
    EXPECT_EQ(res.report.residual_history.size(), 2u);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(res.x[i], b[i], 1e-15);
    }
}

TEST(Cg, ZeroRightHandSideNeedsNoIterations)
{
    const Vector b(5, 0.0);
    const auto res = cg(LinearOperator::identity(5), b);
    EXPECT_TRUE(res.report.converged);
    EXPECT_EQ(res.report.iterations, 0);
}

TEST(Cg, EnergyErrorDecreasesEveryIteration)
{
    std::mt19937_64 rng(17);
    const auto a = oracle::random_spd(40, 0.15, rng);
    const Eigen::MatrixXd da = oracle::dense(a);
    const Vector b = oracle::random_vector(40, rng);
    const Eigen::VectorXd exact = da.llt().solve(oracle::to_eigen(b));
    const auto op = LinearOperator::from_matrix(a);

    auto energy = [&](const Vector& x) {
        const Eigen::VectorXd e = oracle::to_eigen(x) - exact;
        return std::sqrt(e.dot(da * e));
    };
    double prev = energy(Vector(40, 0.0));
    const auto full = cg(op, b, nullptr, {1e-12, 500, false});
    ASSERT_TRUE(full.report.converged);
    for (int it = 1; it <= full.report.iterations; ++it) {
        const auto partial = cg(op, b, nullptr, {1e-12, it, false});
        const double err = energy(partial.x);
        EXPECT_LT(err, prev) << "iteration " << it;
        prev = err;
    }
    EXPECT_LE((oracle::to_eigen(full.x) - exact).norm(), 1e-9 * exact.norm());
}

TEST(Cg, ReportInvariants)
{
    std::mt19937_64 rng(5);
    const auto a = oracle::random_spd(60, 0.1, rng);
    const Vector b = oracle::random_vector(60, rng);
    const auto res = cg(LinearOperator::from_matrix(a), b, nullptr, {1e-10, 500, false});
    ASSERT_TRUE(res.report.converged);
    EXPECT_EQ(res.report.residual_history.size(), static_cast<std::size_t>(res.report.iterations) + 1);
    EXPECT_DOUBLE_EQ(res.report.residual_history.front(), 1.0);
    EXPECT_LE(res.report.residual_history.back(), 1e-10);
    EXPECT_LE(res.report.final_relative_residual, 1e-10);

    const auto capped = cg(LinearOperator::from_matrix(a), b, nullptr, {1e-14, 2, false});
    EXPECT_FALSE(capped.report.converged);
    EXPECT_EQ(capped.report.status, SolveStatus::MaxIterations);
    EXPECT_EQ(capped.report.iterations, 2);
}

TEST(Cg, IndefiniteCurvatureIsBreakdown)
{
    const auto a = CsrMatrix::diagonal(Vector{1.0, -1.0});
    const auto res = cg(LinearOperator::from_matrix(a), Vector{1.0, 1.0});
    EXPECT_FALSE(res.report.converged);
    EXPECT_EQ(res.report.status, SolveStatus::Breakdown);
    EXPECT_EQ(to_string(SolveStatus::Breakdown), "breakdown");
}

TEST(Cg, PreconditionedWithExactInverseIsImmediate)
{
    const auto a = CsrMatrix::diagonal(Vector{1.0, 10.0, 100.0, 1000.0});
    const auto inv = CsrMatrix::diagonal(Vector{1.0, 0.1, 0.01, 0.001});
    const auto pinv = LinearOperator::from_matrix(inv);
    const auto res = cg(LinearOperator::from_matrix(a), Vector{1.0, 1.0, 1.0, 1.0}, &pinv);
    EXPECT_EQ(res.report.iterations, 1);
}

TEST(Cg, DimensionErrors)
{
    EXPECT_THROW(cg(LinearOperator::identity(3), Vector{1.0, 2.0}), DimensionError);
    Vector x(2);
    EXPECT_THROW(cg(LinearOperator::identity(3), Vector{1.0, 2.0, 3.0}, x), DimensionError);
}

TEST(Cg, MassEquationIterationCount)
{
    const StructuredMesh mesh(DomainKind::Cube, 3);
    const CsrMatrix m = assemble_mass(mesh, 1);
    std::mt19937_64 rng(20240601);
    const Vector f = oracle::random_vector(m.rows(), rng);
    const auto res = cg(LinearOperator::from_matrix(m), f);
    ASSERT_TRUE(res.report.converged);
    EXPECT_GE(res.report.iterations, 25);
    EXPECT_LE(res.report.iterations, 45);
}

TEST(Cg, AuxiliaryMaxwellLevelTwoIterationCount)
{
    const StructuredMesh mesh(DomainKind::Cube, 2);
    const auto ops = build_operators(mesh, 1, 1.0);
    std::mt19937_64 rng(20240601);
    const Vector f = oracle::random_vector(ops.size(), rng);
    const auto res = cg(auxiliary_operator(ops, 1.0), f);
    ASSERT_TRUE(res.report.converged);
    EXPECT_NEAR(res.report.iterations, 84, 0.3 * 84);
}

TEST(Lobpcg, DiagonalProblem)
{
    Vector d(10);
    for (int i = 0; i < 10; ++i) {
        d[static_cast<std::size_t>(i)] = i + 1.0;
    }
    const auto a = CsrMatrix::diagonal(d);
    LobpcgOptions opts;
    opts.nev = 3;
    opts.block = 4;
    opts.tol = 1e-10;
    const auto rep = lobpcg(LinearOperator::from_matrix(a), LinearOperator::identity(10), opts);
    ASSERT_TRUE(rep.converged);
    ASSERT_EQ(rep.pairs.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(rep.pairs[static_cast<std::size_t>(i)].lambda, i + 1.0, 1e-10);
    }
    EXPECT_EQ(rep.block_size, 4);
    EXPECT_EQ(rep.seed, opts.seed);
}

TEST(Lobpcg, RejectsBadSizes)
{
    const auto id = LinearOperator::identity(10);
    LobpcgOptions opts;
    opts.nev = 5;
    opts.block = 4;
    EXPECT_THROW(lobpcg(id, id, opts), std::invalid_argument);
    opts.block = 11;
    EXPECT_THROW(lobpcg(id, id, opts), std::invalid_argument);
    EXPECT_THROW(lobpcg(id, LinearOperator::identity(9), LobpcgOptions{}), DimensionError);
}

class LevelOneEigen : public ::testing::TestWithParam<std::tuple<DomainKind, int>> {};

TEST_P(LevelOneEigen, MatchesDenseGeneralizedSolver)
{
    const auto [domain, k] = GetParam();
    const StructuredMesh mesh(domain, 1);
    const auto ops = build_operators(mesh, k, 0.0);
    const auto s = build_auxiliary_matrix(ops, 0.0);
    LobpcgOptions opts;
    opts.tol = 1e-10;
    const auto rep = lobpcg(LinearOperator::from_matrix(s), LinearOperator::from_matrix(ops.Mk), opts);
    ASSERT_TRUE(rep.converged);
    ASSERT_EQ(rep.pairs.size(), 20u);

    const Eigen::VectorXd ref = oracle::generalized_eigenvalues(oracle::dense(s), oracle::dense(ops.Mk));
    const Eigen::MatrixXd m = oracle::dense(ops.Mk);
    for (int i = 0; i < 20; ++i) {
        const auto& p = rep.pairs[static_cast<std::size_t>(i)];
        EXPECT_LE(std::abs(p.lambda - ref(i)), 1e-7 * std::max(1.0, std::abs(ref(i)))) << "index " << i;
        if (i > 0) {
            EXPECT_LE(rep.pairs[static_cast<std::size_t>(i - 1)].lambda, p.lambda);
        }
    }
    // M-orthonormal eigenvectors.
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd ui = oracle::to_eigen(rep.pairs[static_cast<std::size_t>(i)].vector);
        for (int j = 0; j <= i; ++j) {
            const Eigen::VectorXd uj = oracle::to_eigen(rep.pairs[static_cast<std::size_t>(j)].vector);
            EXPECT_NEAR(ui.dot(m * uj), i == j ? 1.0 : 0.0, 1e-8);
        }
    }
}

TEST_P(LevelOneEigen, RitzValuesNeverIncrease)
{
    const auto [domain, k] = GetParam();
    const StructuredMesh mesh(domain, 1);
    const auto ops = build_operators(mesh, k, 0.0);
    const auto rep = lobpcg(auxiliary_operator(ops, 0.0), LinearOperator::from_matrix(ops.Mk), {});
    ASSERT_GE(rep.ritz_history.size(), 2u);
    EXPECT_EQ(rep.residual_history.size(), rep.ritz_history.size());
    for (std::size_t it = 1; it < rep.ritz_history.size(); ++it) {
        const auto& prev = rep.ritz_history[it - 1];
        const auto& cur = rep.ritz_history[it];
        ASSERT_EQ(prev.size(), cur.size());
        for (std::size_t j = 0; j < cur.size(); ++j) {
            EXPECT_LE(cur[j], prev[j] + 1e-10 * std::max(1.0, std::abs(prev[j])))
                << "iteration " << it << " index " << j;
        }
    }
}

INSTANTIATE_TEST_SUITE_P(AllCombos, LevelOneEigen,
                         ::testing::Combine(::testing::Values(DomainKind::Cube, DomainKind::CubeWithHole),
                                            ::testing::Values(1, 2)));

TEST(Lobpcg, SeedMakesRunsReproducible)
{
    const StructuredMesh mesh(DomainKind::Cube, 1);
    const auto ops = build_operators(mesh, 2, 0.0);
    const auto a = auxiliary_operator(ops, 0.0);
    const auto m = LinearOperator::from_matrix(ops.Mk);
    const auto r1 = lobpcg(a, m, {});
    const auto r2 = lobpcg(a, m, {});
    EXPECT_EQ(r1.iterations, r2.iterations);
    EXPECT_EQ(r1.residual_history, r2.residual_history);
}

TEST(Helpers, DotNormAxpy)
{
    const Vector x{3.0, 4.0};
    Vector y{1.0, 1.0};
    EXPECT_DOUBLE_EQ(dot(x, y), 7.0);
    EXPECT_DOUBLE_EQ(norm2(x), 5.0);
    axpy(2.0, x, y);
    EXPECT_EQ(y, (Vector{7.0, 9.0}));
}
