#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "derham/auxscheme.hpp"

using namespace derham;

namespace {

// Operators are cached per level; building them is not what is measured.
const ComplexOperators& maxwell(int level)
{
    static std::map<int, std::unique_ptr<ComplexOperators>> cache;
    auto& slot = cache[level];
    if (!slot) {
        slot = std::make_unique<ComplexOperators>(build_operators(StructuredMesh(DomainKind::Cube, level), 1, 1.0));
    }
    return *slot;
}

Vector random_vector(Index n)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(static_cast<std::size_t>(n));
    for (double& x : v) {
        x = u(rng);
    }
    return v;
}

void BM_SpmvAssembled(benchmark::State& state)
{
    const auto s = build_auxiliary_matrix(maxwell(static_cast<int>(state.range(0))));
    const Vector x = random_vector(s.cols());
    Vector y(x.size());
    for (auto _ : state) {
        spmv(s, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * s.nnz());
}
BENCHMARK(BM_SpmvAssembled)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_ApplyMatrixFree(benchmark::State& state)
{
    const auto& ops = maxwell(static_cast<int>(state.range(0)));
    const auto op = auxiliary_operator(ops, 1.0);
    const Vector x = random_vector(ops.size());
    Vector y(x.size());
    for (auto _ : state) {
        op.apply(x, y);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_ApplyMatrixFree)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_Ilu0Factor(benchmark::State& state)
{
    const auto s = build_auxiliary_matrix(maxwell(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        auto f = ilu0(s);
        benchmark::DoNotOptimize(f.lower.nnz());
    }
}
BENCHMARK(BM_Ilu0Factor)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Ilu0Apply(benchmark::State& state)
{
    const auto f = ilu0(build_auxiliary_matrix(maxwell(static_cast<int>(state.range(0)))));
    const Vector r = random_vector(f.lower.rows());
    Vector z(r.size());
    for (auto _ : state) {
        apply_ilu0(f, r, z);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(BM_Ilu0Apply)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_SaitApply(benchmark::State& state)
{
    const auto s = build_sait(ilu0(build_auxiliary_matrix(maxwell(static_cast<int>(state.range(0))))));
    const Vector r = random_vector(s.lower_inv.rows());
    Vector z(r.size());
    for (auto _ : state) {
        apply_sait(s, r, z);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(BM_SaitApply)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_VCycle(benchmark::State& state)
{
    const MgHierarchy h(DomainKind::Cube, static_cast<int>(state.range(0)), 1, 1.0);
    const Vector f = random_vector(h.finest_matrix().rows());
    Vector u(f.size());
    for (auto _ : state) {
        std::fill(u.begin(), u.end(), 0.0);
        h.vcycle(f, u);
        benchmark::DoNotOptimize(u.data());
    }
}
BENCHMARK(BM_VCycle)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
