#include <benchmark/benchmark.h>

#include <vector>

#include "ehspc/channel.hpp"
#include "ehspc/fblmetrics.hpp"
#include "ehspc/montecarlo.hpp"
#include "ehspc/surrogate.hpp"

using namespace ehspc;

namespace {

Scenario table2_row(int k, int l, int m, int n) {
  Scenario s;
  s.K = k;
  s.L = l;
  s.M = m;
  s.N = n;
  return s;
}

void BM_InstBler(benchmark::State& state) {
  const FblParams fbl = make_fbl_params(250.0, 256.0 / 250.0);
  double g = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(inst_bler(g, fbl));
    g = g < 100.0 ? g * 1.001 : 0.5;
  }
}
BENCHMARK(BM_InstBler);

void BM_DrawBlock(benchmark::State& state) {
  const Scenario s = table2_row(4, 5, 6, 5);
  const Constants c;
  const LinkMeans means = link_means(s, build_geometry(s, c), c);
  ChannelDraw d;
  std::uint64_t i = 0;
  for (auto _ : state) {
    draw_block_into(d, realization_stream(1, i++), means);
    benchmark::DoNotOptimize(d.h.data());
  }
}
BENCHMARK(BM_DrawBlock);

void BM_Estimate(benchmark::State& state) {
  const Scenario s = table2_row(static_cast<int>(state.range(0)), 5, 6, 5);
  McConfig mc;
  mc.n_realizations = 50'000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(s, Constants{}, mc, 1).e2e_bler);
  state.SetItemsProcessed(state.iterations() * mc.n_realizations);
}
BENCHMARK(BM_Estimate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  const Network net(random_cnn_bundle(7));
  std::vector<FeatureVector> xs(static_cast<std::size_t>(state.range(0)),
                                to_features(table2_row(4, 5, 6, 5)));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(xs).size());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
