#include <benchmark/benchmark.h>

#include <vector>

#include "kmis/domains.hpp"
#include "kmis/estimators.hpp"
#include "kmis/linalg.hpp"
#include "kmis/metric.hpp"
#include "kmis/reward_model.hpp"
#include "kmis/rng.hpp"

namespace {

kmis::SymMatrix random_symmetric(int d, kmis::Rng& rng) {
    kmis::SymMatrix m(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) m.set(i, j, rng.normal());
    return m;
}

void bm_sym_eig(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    kmis::Rng rng(42);
    const kmis::SymMatrix m = random_symmetric(d, rng);
    for (auto _ : state) benchmark::DoNotOptimize(kmis::sym_eig(m));
}
BENCHMARK(bm_sym_eig)->Arg(2)->Arg(8)->Arg(16);

void bm_regularized_metric(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    kmis::Rng rng(42);
    const kmis::SymMatrix m = random_symmetric(d, rng);
    for (auto _ : state) benchmark::DoNotOptimize(kmis::regularized_metric(m));
}
BENCHMARK(bm_regularized_metric)->Arg(2)->Arg(8);

void bm_kernel_is(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const kmis::SyntheticDomain dom = kmis::make_quadratic(0.5);
    const kmis::LoggedDataset data = kmis::generate_dataset(dom, n, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(kmis::kernel_is(data, dom.target, 0.25, true));
}
BENCHMARK(bm_kernel_is)->Arg(1000)->Arg(10000);

void bm_hessian_at(benchmark::State& state) {
    const kmis::SyntheticDomain dom = kmis::make_quadratic(0.5);
    const kmis::LoggedDataset data = kmis::generate_dataset(dom, 512, 7);
    const auto fit = kmis::fit_reward_model(
        data, {.max_epochs = 30, .patience = 30}, 11);
    const kmis::Vec s = data.state_vec(0);
    const kmis::Vec a = dom.target(s);
    for (auto _ : state) benchmark::DoNotOptimize(kmis::hessian_at(fit.first, s, a));
}
BENCHMARK(bm_hessian_at);

}  // namespace

BENCHMARK_MAIN();
