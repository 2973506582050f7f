#include <benchmark/benchmark.h>

#include "bomm/design.hpp"
#include "bomm/estimators.hpp"
#include "bomm/kernels.hpp"
#include "bomm/marginal.hpp"
#include "bomm/taag.hpp"
#include "bomm/testbed.hpp"

using namespace bomm;

namespace {

Dataset piston_data(std::size_t n) {
    const auto f = make_test_function("piston");
    Rng rng(1, 0);
    const MatrixXd X = unscale_rows_from_unit(random_lhd(n, f.dims(), rng), f.domain);
    VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = f(X.row(i).transpose());
    return Dataset(DesignMatrix(X), y);
}

void BM_GramMixture(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(2, 0);
    const MatrixXd X = random_lhd(n, 10, rng);
    const auto p = KernelParams::uniform(10);
    for (auto _ : state) benchmark::DoNotOptimize(gram_mixture(X, 0.3, p, kBaseNugget));
}
BENCHMARK(BM_GramMixture)->Arg(50)->Arg(100)->Arg(200);

void BM_ProfiledLikelihood(benchmark::State& state) {
    const auto data = piston_data(static_cast<std::size_t>(state.range(0)));
    const auto dom = make_test_function("piston").domain;
    const auto p = KernelParams::uniform(7);
    for (auto _ : state) benchmark::DoNotOptimize(profiled_log_likelihood(0.5, 0.3, p, data, dom));
}
BENCHMARK(BM_ProfiledLikelihood)->Arg(35)->Arg(70);

void BM_Fit(benchmark::State& state) {
    const auto data = piston_data(70);
    const auto dom = make_test_function("piston").domain;
    FitConfig cfg;
    cfg.kind = state.range(0) == 0 ? SurrogateKind::taag : SurrogateKind::sqexp;
    for (auto _ : state) {
        Rng rng(3, 0);
        benchmark::DoNotOptimize(fit(data, dom, cfg, rng));
    }
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_MarginalProfiles(benchmark::State& state) {
    const auto data = piston_data(70);
    const auto dom = make_test_function("piston").domain;
    TaagParams p;
    p.eta = 0.3;
    p.kernel = KernelParams::uniform(7);
    const auto m = condition(data, dom, p);
    const bool with_var = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(marginal_posteriors(m, kDefaultGridSize, with_var));
}
BENCHMARK(BM_MarginalProfiles)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Maximin(benchmark::State& state) {
    LhdConfig cfg = LhdConfig::defaults(static_cast<std::size_t>(state.range(0)), 10);
    for (auto _ : state) {
        Rng rng(4, 0);
        benchmark::DoNotOptimize(maximin_lhd(cfg, rng));
    }
}
BENCHMARK(BM_Maximin)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
