#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ehspc/scenario.hpp"

namespace ehspc {

inline constexpr int kBundleVersion = 1;
inline constexpr std::string_view kBundleFormat = "ehspc-model-bundle";

enum class LayerKind {
  kConv1d,
  kBatchNorm,
  kRelu,
  kGap,
  kConv1x1,
  kSigmoidGateMul,
  kFullyConnected,
  kFlatten,
  kBroadcastMul,
};

std::string_view to_string(LayerKind k) noexcept;
LayerKind parse_layer_kind(std::string_view text);

/// One node of the layer graph. `inputs` names earlier layers ("input" is the
/// normalized feature map, 15 wide with one channel); when empty the previous
/// layer is used. Weight layouts, all row-major:
///   conv1d           weight [out][in][kernel], bias [out], zero "same" padding
///   conv1x1          weight [out][in], bias [out]; applies per width position
///   fully_connected  weight [out][in], bias [out]
///   batchnorm        gamma, beta, running_mean, running_var [channels], eps
///   flatten          W x C map to a vector, index w * C + c
///   broadcast_mul    inputs (C-vector, W x C map) -> map[w][c] * vec[c]
///   sigmoid_gate_mul x * sigmoid(x)
struct Layer {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  std::vector<std::string> inputs;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int channels = 0;  // batchnorm
  double eps = 1e-5;
  std::vector<double> weight;
  std::vector<double> bias;
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct ModelBundle {
  int version = kBundleVersion;
  int input_width = static_cast<int>(kFeatureCount);
  std::vector<std::string> outputs{"bler", "throughput"};
  std::array<Range, kFeatureCount> bounds{};
  std::vector<Layer> layers;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Tensor shape flowing between layers: a W x C map or a C-vector.
struct Shape {
  bool is_map = false;
  int width = 0;
  int channels = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Checks every invariant and returns the output shape of each layer.
/// Errors: kShapeMismatch / kInvariant / kNonFinite naming the layer.
std::vector<Shape> validate(const ModelBundle& b);

/// Layer-graph checks alone, for a graph fed by `input`. The final layer is
/// not required to produce a 2-vector.
std::vector<Shape> validate_layers(const std::vector<Layer>& layers, Shape input);

std::string write_bundle(const ModelBundle& b);
/// Parses and validates. A missing `end_layer` or short layer list is a
/// kParse "truncated" error; an unknown version is kVersionMismatch.
ModelBundle parse_bundle(std::string_view text);

void save_bundle(const std::filesystem::path& path, const ModelBundle& b);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace ehspc
