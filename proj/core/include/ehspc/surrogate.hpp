#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ehspc/bundle.hpp"
#include "ehspc/montecarlo.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc {

/// Row-major W x C activation; a C-vector is width 1 with is_map false.
struct FeatureMap {
  bool is_map = true;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  double at(int w, int c) const { return data[static_cast<std::size_t>(w * channels + c)]; }
  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double eps = 1e-5;
};

/// Weights of one channel-attention block over C channels. All matrices are
/// [out][in] = C x C.
struct ChiBlockWeights {
  int channels = 0;
  std::vector<double> attn_conv_w, attn_conv_b;  // 1x1 conv on the pooled vector
  std::vector<double> attn_fc_w, attn_fc_b;
  std::vector<double> map_conv1_w, map_conv1_b;
  BatchNormParams map_bn1;
  std::vector<double> map_conv2_w, map_conv2_b;
  BatchNormParams map_bn2;
};

/// Layers of one block reading from `input`; the last is named `<prefix>_out`.
std::vector<Layer> chi_block_layers(const std::string& prefix, const std::string& input,
                                    const ChiBlockWeights& w);

/// Runs a single block on a W x C map.
FeatureMap chi_block_forward(const FeatureMap& in, const ChiBlockWeights& w);

struct Prediction {
  std::array<double, 2> y{};  // [bler, throughput]
  double wall_seconds = 0.0;
  bool extrapolated = false;  // some input fell outside the bundle bounds
  std::vector<int> out_of_bounds;
};

/// A validated, immutable bundle ready for inference.
class Network {
 public:
  explicit Network(ModelBundle bundle);

  const ModelBundle& bundle() const noexcept;
  /// Output shape of each layer, in bundle order.
  const std::vector<Shape>& shapes() const noexcept;

  Prediction forward(const FeatureVector& x) const;
  std::vector<Prediction> forward_batch(std::span<const FeatureVector> xs, int workers = 1) const;
  /// Output of every layer for one input.
  std::vector<FeatureMap> trace(const FeatureVector& x) const;
  /// Evaluates the layer graph on an arbitrary input map, skipping the
  /// normalization step.
  FeatureMap run(const FeatureMap& input) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct CnnSpec {
  int channels = 64;
  int blocks = 4;
  int fc_width = 64;
  int kernel = 5;
};

/// Stem conv -> bn -> relu, `blocks` attention blocks, flatten, fc1 -> relu ->
/// fc2, with seeded random weights. Normalization bounds default to table1_bounds().
ModelBundle random_cnn_bundle(std::uint64_t seed, const CnnSpec& spec = {});
/// Fully connected baseline: `hidden` relu layers of `width` neurons.
ModelBundle random_dnn_bundle(std::uint64_t seed, int hidden = 5, int width = 120);

/// sqrt of the mean squared difference over all n*2 entries.
double rmse(std::span<const std::array<double, 2>> y,
            std::span<const std::array<double, 2>> y_hat);

struct BenchRow {
  Scenario scenario;
  long long realizations = 0;
  int batch = 0;
  double sim_seconds = 0.0;  // one Monte-Carlo estimate of `scenario`
  double cnn_seconds = 0.0;  // forward over `batch` scenarios
  double rmse = 0.0;         // MC labels vs prediction for `scenario`
};

/// Times one estimate() of `s` against batch inference over `batch` inputs:
/// `s` itself plus scenarios sharing its K, L, M, N drawn from table1_bounds().
BenchRow bench(const Network& net, const Scenario& s, const Constants& c,
               const McConfig& mc, int batch = 100, int workers = 1);

void write_bench_header(std::ostream& os);
void write_bench_row(std::ostream& os, const BenchRow& row);

}  // namespace ehspc
