#pragma once

// A one-channel network small enough to evaluate by hand, and that
// evaluation written out as plain scalar loops.

#include <array>
#include <cmath>
#include <vector>

#include "ehspc/bundle.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc::test {

struct MicroWeights {
  std::array<double, 3> stem_w{0.4, -0.7, 0.9};
  double stem_b = 0.05;
  // gamma, beta, mean, var
  std::array<double, 4> stem_bn{1.3, -0.1, 0.2, 0.8};
  double attn_conv_w = 1.7, attn_conv_b = -0.3;
  double attn_fc_w = -0.8, attn_fc_b = 0.6;
  double map1_w = 0.9, map1_b = 0.1;
  std::array<double, 4> bn1{0.7, 0.2, -0.05, 1.4};
  double map2_w = -1.2, map2_b = 0.25;
  std::array<double, 4> bn2{1.1, -0.3, 0.1, 0.6};
  std::array<double, 30> fc_w{};
  std::array<double, 2> fc_b{0.01, -0.02};
  double eps = 1e-5;

  MicroWeights() {
    for (int i = 0; i < 15; ++i) {
      fc_w[static_cast<std::size_t>(i)] = 0.1 * std::sin(1.0 + i);
      fc_w[static_cast<std::size_t>(15 + i)] = 0.05 * std::cos(2.0 * i);
    }
  }
};

inline Layer micro_bn(const std::string& name, const std::array<double, 4>& p, double eps) {
  Layer l;
  l.name = name;
  l.kind = LayerKind::kBatchNorm;
  l.channels = 1;
  l.eps = eps;
  l.gamma = {p[0]};
  l.beta = {p[1]};
  l.running_mean = {p[2]};
  l.running_var = {p[3]};
  return l;
}

inline Layer micro_linear(const std::string& name, LayerKind kind, int in, int out,
                          std::vector<double> w, std::vector<double> b,
                          std::vector<std::string> inputs = {}) {
  Layer l;
  l.name = name;
  l.kind = kind;
  l.in_channels = in;
  l.out_channels = out;
  l.weight = std::move(w);
  l.bias = std::move(b);
  l.inputs = std::move(inputs);
  return l;
}

inline Layer micro_simple(const std::string& name, LayerKind kind,
                          std::vector<std::string> inputs = {}) {
  Layer l;
  l.name = name;
  l.kind = kind;
  l.inputs = std::move(inputs);
  return l;
}

inline ModelBundle micro_bundle(const MicroWeights& w = {}) {
  ModelBundle b;
  b.bounds = table1_bounds().feature_ranges();
  Layer stem = micro_linear("stem_conv", LayerKind::kConv1d, 1, 1,
                            {w.stem_w[0], w.stem_w[1], w.stem_w[2]}, {w.stem_b});
  stem.kernel = 3;
  b.layers.push_back(stem);
  b.layers.push_back(micro_bn("stem_bn", w.stem_bn, w.eps));
  b.layers.push_back(micro_simple("stem_relu", LayerKind::kRelu));
  b.layers.push_back(micro_simple("gap", LayerKind::kGap, {"stem_relu"}));
  b.layers.push_back(micro_linear("attn_conv", LayerKind::kConv1x1, 1, 1, {w.attn_conv_w}, {w.attn_conv_b}));
  b.layers.push_back(micro_simple("gate1", LayerKind::kSigmoidGateMul));
  b.layers.push_back(micro_linear("attn_fc", LayerKind::kFullyConnected, 1, 1, {w.attn_fc_w}, {w.attn_fc_b}));
  b.layers.push_back(micro_simple("gate2", LayerKind::kSigmoidGateMul));
  b.layers.push_back(micro_linear("map1", LayerKind::kConv1x1, 1, 1, {w.map1_w}, {w.map1_b}, {"stem_relu"}));
  b.layers.push_back(micro_bn("bn1", w.bn1, w.eps));
  b.layers.push_back(micro_linear("map2", LayerKind::kConv1x1, 1, 1, {w.map2_w}, {w.map2_b}));
  b.layers.push_back(micro_bn("bn2", w.bn2, w.eps));
  b.layers.push_back(micro_simple("recal", LayerKind::kBroadcastMul, {"gate2", "bn2"}));
  b.layers.push_back(micro_simple("flatten", LayerKind::kFlatten));
  b.layers.push_back(micro_linear("fc", LayerKind::kFullyConnected, 15, 2,
                                  std::vector<double>(w.fc_w.begin(), w.fc_w.end()),
                                  {w.fc_b[0], w.fc_b[1]}));
  return b;
}

inline double hand_bn(double x, const std::array<double, 4>& p, double eps) {
  return p[0] * (x - p[2]) / std::sqrt(p[3] + eps) + p[1];
}

inline double hand_gate(double x) { return x / (1.0 + std::exp(-x)); }

/// Step-by-step evaluation of micro_bundle on raw features.
inline std::array<double, 2> micro_hand_trace(const FeatureVector& x, const MicroWeights& w = {}) {
  const auto r = table1_bounds().feature_ranges();
  double u[15];
  for (int i = 0; i < 15; ++i) u[i] = (x[i] - r[i].lo) / (r[i].hi - r[i].lo);
  double a[15];
  for (int i = 0; i < 15; ++i) {
    double acc = w.stem_b;
    for (int t = 0; t < 3; ++t) {
      const int j = i + t - 1;
      if (j >= 0 && j < 15) acc += w.stem_w[t] * u[j];
    }
    a[i] = std::max(0.0, hand_bn(acc, w.stem_bn, w.eps));
  }
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= 15.0;
  const double g1 = hand_gate(w.attn_conv_w * mean + w.attn_conv_b);
  const double att = hand_gate(w.attn_fc_w * g1 + w.attn_fc_b);
  double f[15];
  for (int i = 0; i < 15; ++i) {
    const double m1 = hand_bn(w.map1_w * a[i] + w.map1_b, w.bn1, w.eps);
    const double m2 = hand_bn(w.map2_w * m1 + w.map2_b, w.bn2, w.eps);
    f[i] = att * m2;
  }
  std::array<double, 2> y{w.fc_b[0], w.fc_b[1]};
  for (int i = 0; i < 15; ++i) {
    y[0] += w.fc_w[static_cast<std::size_t>(i)] * f[i];
    y[1] += w.fc_w[static_cast<std::size_t>(15 + i)] * f[i];
  }
  return y;
}

}  // namespace ehspc::test
