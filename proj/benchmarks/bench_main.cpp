// Microbenchmarks for the hot paths: the generalized eigensolve, CSPR
// training, zero-phase filtering, Welch PSD and the two regressors.

#include <cspr/datagen.hpp>
#include <cspr/dsp.hpp>
#include <cspr/features.hpp>
#include <cspr/linalg.hpp>
#include <cspr/regression.hpp>
#include <cspr/rng.hpp>
#include <cspr/spatial_filter.hpp>

#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <random>
#include <vector>

namespace {

cspr::Matrix spd(Eigen::Index n, std::uint64_t seed) {
  auto rng = cspr::make_rng(seed, {0xbe});
  std::normal_distribution<double> normal;
  cspr::Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  return g * g.transpose() / static_cast<double>(n) + 0.1 * cspr::Matrix::Identity(n, n);
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  auto rng = cspr::make_rng(seed, {0x5e});
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

// Worlds are generated once per shape and reused.
const cspr::SynthWorld& world(std::size_t channels, std::size_t trials) {
  static std::map<std::pair<std::size_t, std::size_t>, cspr::SynthWorld> cache;
  auto it = cache.find({channels, trials});
  if (it == cache.end()) {
    cspr::SynthSpec spec;
    spec.channels = channels;
    spec.trials = trials;
    spec.bandpass = false;
    it = cache.emplace(std::pair{channels, trials}, cspr::generate_trials(spec, 1)).first;
  }
  return it->second;
}

void BM_GeneralizedEig(benchmark::State& state) {
  const auto c = state.range(0);
  const auto a = spd(c, 1);
  const auto b = spd(c, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cspr::solve_generalized_eig(a, b, static_cast<std::size_t>(c), cspr::kDefaultRidge));
  }
  state.SetComplexityN(c);
}
BENCHMARK(BM_GeneralizedEig)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

void BM_FitCspr(benchmark::State& state) {
  const auto& w = world(62, static_cast<std::size_t>(state.range(0)));
  cspr::CsprOptions opt;
  opt.objective = state.range(1) == 0 ? cspr::Objective::OneVsRest : cspr::Objective::OneVsAll;
  for (auto _ : state) benchmark::DoNotOptimize(cspr::fit_cspr(w.data, opt));
  state.SetComplexityN(state.range(0));
  state.SetLabel(state.range(1) == 0 ? "ovr" : "ova");
}
BENCHMARK(BM_FitCspr)
    ->ArgsProduct({{100, 200, 400}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_FilterTrial(benchmark::State& state) {
  const auto& w = world(62, 100);
  const auto bp = cspr::design_bandpass(1.0, 20.0, 256.0);
  for (auto _ : state) benchmark::DoNotOptimize(cspr::filter_trial(bp, w.data.trials.front()));
  state.SetItemsProcessed(state.iterations() * 62);
}
BENCHMARK(BM_FilterTrial)->Unit(benchmark::kMicrosecond);

void BM_Filtfilt(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 3);
  const auto bp = cspr::design_bandpass(1.0, 20.0, 256.0);
  for (auto _ : state) benchmark::DoNotOptimize(cspr::filtfilt(bp, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Filtfilt)->Arg(768)->Arg(3072)->Arg(12288)->Arg(49152)->Complexity(benchmark::oN);

void BM_WelchPsd(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(cspr::welch_psd(x, 256.0, 256));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WelchPsd)->Arg(768)->Arg(3072)->Arg(12288)->Arg(49152)->Complexity(benchmark::oN);

void BM_ExtractRawFeatures(benchmark::State& state) {
  const auto& w = world(62, 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cspr::extract_features(w.data.trials, cspr::FeatureMode::Raw, {}, nullptr));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ExtractRawFeatures)->Unit(benchmark::kMillisecond);

void BM_LassoCv(benchmark::State& state) {
  const auto n = state.range(0);
  cspr::Matrix x(n, 126);
  const auto v = noise(static_cast<std::size_t>(x.size()), 5);
  std::copy(v.begin(), v.end(), x.data());
  const auto y = noise(static_cast<std::size_t>(n), 6);
  for (auto _ : state) benchmark::DoNotOptimize(cspr::lasso_cv_fit(x, y));
}
BENCHMARK(BM_LassoCv)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  const auto n = state.range(0);
  cspr::Matrix x(n, 126);
  const auto v = noise(static_cast<std::size_t>(x.size()), 7);
  std::copy(v.begin(), v.end(), x.data());
  const auto y = noise(static_cast<std::size_t>(n), 8);
  const auto model = cspr::KnnModel::fit(x, y, 5);
  const cspr::Matrix queries = x.topRows(n / 5);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(queries));
}
BENCHMARK(BM_KnnPredict)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
