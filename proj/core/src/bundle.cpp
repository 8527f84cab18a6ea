#include "ehspc/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"

namespace ehspc {
namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 9> kKindNames{{
    {LayerKind::kConv1d, "conv1d"},
    {LayerKind::kBatchNorm, "batchnorm"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kGap, "gap"},
    {LayerKind::kConv1x1, "conv1x1"},
    {LayerKind::kSigmoidGateMul, "sigmoid_gate_mul"},
    {LayerKind::kFullyConnected, "fully_connected"},
    {LayerKind::kFlatten, "flatten"},
    {LayerKind::kBroadcastMul, "broadcast_mul"},
}};

[[noreturn]] void layer_error(ErrorCode code, const Layer& l, const std::string& what) {
  throw Error(code, "layer '" + l.name + "': " + what);
}

void expect_size(const Layer& l, const std::vector<double>& v, std::size_t n,
                 std::string_view field) {
  if (v.size() != n) {
    layer_error(ErrorCode::kShapeMismatch, l,
                std::string(field) + " has " + std::to_string(v.size()) +
                    " values, expected " + std::to_string(n));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      layer_error(ErrorCode::kNonFinite, l, "non-finite value in " + std::string(field));
    }
  }
}

void expect_empty(const Layer& l, const std::vector<double>& v, std::string_view field) {
  if (!v.empty()) {
    layer_error(ErrorCode::kShapeMismatch, l, std::string(field) + " not used by " +
                                                  std::string(to_string(l.kind)));
  }
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto next = text.find(' ', pos);
    const auto tok = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    if (!tok.empty()) out.push_back(parse_double(tok, what));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

bool uses_linear(LayerKind k) {
  return k == LayerKind::kConv1d || k == LayerKind::kConv1x1 ||
         k == LayerKind::kFullyConnected;
}

}  // namespace

std::string_view to_string(LayerKind k) noexcept {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view text) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == text) return kind;
  }
  throw Error(ErrorCode::kParse, "unknown layer kind '" + std::string(text) + "'");
}

std::vector<Shape> validate(const ModelBundle& b) {
  if (b.version != kBundleVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "bundle version " + std::to_string(b.version) + " is not supported");
  }
  if (b.input_width != static_cast<int>(kFeatureCount)) {
    throw Error(ErrorCode::kShapeMismatch, "bundle input_width must be 15");
  }
  if (b.outputs != std::vector<std::string>{"bler", "throughput"}) {
    throw Error(ErrorCode::kShapeMismatch, "bundle outputs must be bler,throughput");
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const Range r = b.bounds[i];
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw Error(ErrorCode::kNonFinite, "non-finite normalization bound for " +
                                             std::string(feature_names()[i]));
    }
    if (r.lo > r.hi) {
      throw Error(ErrorCode::kInvariant, "inverted normalization bound for " +
                                             std::string(feature_names()[i]));
    }
  }
  if (b.layers.empty()) throw Error(ErrorCode::kShapeMismatch, "bundle has no layers");
  const auto out = validate_layers(b.layers, Shape{true, b.input_width, 1});
  const Shape last = out.back();
  if (last.is_map || last.channels != 2) {
    layer_error(ErrorCode::kShapeMismatch, b.layers.back(), "final output must be a 2-vector");
  }
  return out;
}

std::vector<Shape> validate_layers(const std::vector<Layer>& layers, Shape input) {
  std::map<std::string, Shape, std::less<>> shapes;
  shapes["input"] = input;
  std::vector<Shape> out;
  std::string previous = "input";
  for (const Layer& l : layers) {
    if (l.name.empty() || l.name == "input" || shapes.contains(l.name) ||
        l.name.find_first_of(" \t=") != std::string::npos) {
      layer_error(ErrorCode::kInvariant, l, "invalid or duplicate layer name");
    }
    std::vector<Shape> in;
    const std::vector<std::string> names =
        l.inputs.empty() ? std::vector<std::string>{previous} : l.inputs;
    for (const auto& n : names) {
      auto it = shapes.find(n);
      if (it == shapes.end()) layer_error(ErrorCode::kShapeMismatch, l, "unknown input '" + n + "'");
      in.push_back(it->second);
    }
    const std::size_t arity = l.kind == LayerKind::kBroadcastMul ? 2 : 1;
    if (in.size() != arity) {
      layer_error(ErrorCode::kShapeMismatch, l, "expects " + std::to_string(arity) + " input(s)");
    }
    if (!uses_linear(l.kind)) {
      expect_empty(l, l.weight, "weight");
      expect_empty(l, l.bias, "bias");
    }
    if (l.kind != LayerKind::kBatchNorm) {
      expect_empty(l, l.gamma, "gamma");
      expect_empty(l, l.beta, "beta");
      expect_empty(l, l.running_mean, "running_mean");
      expect_empty(l, l.running_var, "running_var");
    }
    const Shape x = in[0];
    Shape y = x;
    switch (l.kind) {
      case LayerKind::kConv1d: {
        if (!x.is_map) layer_error(ErrorCode::kShapeMismatch, l, "conv1d needs a feature map");
        if (l.kernel < 1 || l.kernel % 2 == 0) {
          layer_error(ErrorCode::kShapeMismatch, l, "kernel must be odd and positive");
        }
        if (l.in_channels != x.channels || l.out_channels < 1) {
          layer_error(ErrorCode::kShapeMismatch, l, "in_channels " + std::to_string(l.in_channels) +
                                                        " does not match incoming " +
                                                        std::to_string(x.channels));
        }
        expect_size(l, l.weight,
                    static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel, "weight");
        expect_size(l, l.bias, static_cast<std::size_t>(l.out_channels), "bias");
        y.channels = l.out_channels;
        break;
      }
      case LayerKind::kConv1x1:
      case LayerKind::kFullyConnected: {
        if (l.kind == LayerKind::kFullyConnected && x.is_map) {
          layer_error(ErrorCode::kShapeMismatch, l, "fully_connected needs a vector (flatten first)");
        }
        if (l.in_channels != x.channels || l.out_channels < 1) {
          layer_error(ErrorCode::kShapeMismatch, l, "in_channels " + std::to_string(l.in_channels) +
                                                        " does not match incoming " +
                                                        std::to_string(x.channels));
        }
        expect_size(l, l.weight, static_cast<std::size_t>(l.out_channels) * l.in_channels, "weight");
        expect_size(l, l.bias, static_cast<std::size_t>(l.out_channels), "bias");
        y.channels = l.out_channels;
        break;
      }
      case LayerKind::kBatchNorm: {
        if (l.channels != x.channels) {
          layer_error(ErrorCode::kShapeMismatch, l, "channels " + std::to_string(l.channels) +
                                                        " does not match incoming " +
                                                        std::to_string(x.channels));
        }
        const auto c = static_cast<std::size_t>(l.channels);
        expect_size(l, l.gamma, c, "gamma");
        expect_size(l, l.beta, c, "beta");
        expect_size(l, l.running_mean, c, "running_mean");
        expect_size(l, l.running_var, c, "running_var");
        if (!std::isfinite(l.eps)) layer_error(ErrorCode::kNonFinite, l, "non-finite eps");
        if (l.eps < 0.0) layer_error(ErrorCode::kInvariant, l, "negative eps");
        for (double v : l.running_var) {
          if (!(v > 0.0)) layer_error(ErrorCode::kInvariant, l, "running variance must be > 0");
        }
        break;
      }
      case LayerKind::kRelu:
      case LayerKind::kSigmoidGateMul:
        break;
      case LayerKind::kGap:
        if (!x.is_map) layer_error(ErrorCode::kShapeMismatch, l, "gap needs a feature map");
        y = Shape{false, 0, x.channels};
        break;
      case LayerKind::kFlatten:
        if (!x.is_map) layer_error(ErrorCode::kShapeMismatch, l, "flatten needs a feature map");
        y = Shape{false, 0, x.width * x.channels};
        break;
      case LayerKind::kBroadcastMul: {
        const Shape m = in[1];
        if (x.is_map || !m.is_map || x.channels != m.channels) {
          layer_error(ErrorCode::kShapeMismatch, l,
                      "broadcast_mul needs (C-vector, W x C map) with equal C");
        }
        y = m;
        break;
      }
    }
    shapes[l.name] = y;
    out.push_back(y);
    previous = l.name;
  }
  return out;
}

std::string write_bundle(const ModelBundle& b) {
  std::ostringstream out;
  out << "format = " << kBundleFormat << '\n'
      << "version = " << b.version << '\n'
      << "input_width = " << b.input_width << '\n'
      << "outputs = ";
  for (std::size_t i = 0; i < b.outputs.size(); ++i) out << (i ? "," : "") << b.outputs[i];
  out << '\n';
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out << "norm." << feature_names()[i] << " = " << format_double(b.bounds[i].lo) << ','
        << format_double(b.bounds[i].hi) << '\n';
  }
  out << "layers = " << b.layers.size() << '\n';
  for (const Layer& l : b.layers) {
    out << "layer = " << l.name << '\n' << "kind = " << to_string(l.kind) << '\n';
    if (!l.inputs.empty()) {
      out << "inputs = ";
      for (std::size_t i = 0; i < l.inputs.size(); ++i) out << (i ? "," : "") << l.inputs[i];
      out << '\n';
    }
    switch (l.kind) {
      case LayerKind::kConv1d:
        out << "in_channels = " << l.in_channels << '\n'
            << "out_channels = " << l.out_channels << '\n'
            << "kernel = " << l.kernel << '\n';
        break;
      case LayerKind::kConv1x1:
      case LayerKind::kFullyConnected:
        out << "in_channels = " << l.in_channels << '\n'
            << "out_channels = " << l.out_channels << '\n';
        break;
      case LayerKind::kBatchNorm:
        out << "channels = " << l.channels << '\n' << "eps = " << format_double(l.eps) << '\n';
        break;
      default:
        break;
    }
    if (uses_linear(l.kind)) {
      out << "weight = " << join_doubles(l.weight) << '\n'
          << "bias = " << join_doubles(l.bias) << '\n';
    }
    if (l.kind == LayerKind::kBatchNorm) {
      out << "gamma = " << join_doubles(l.gamma) << '\n'
          << "beta = " << join_doubles(l.beta) << '\n'
          << "running_mean = " << join_doubles(l.running_mean) << '\n'
          << "running_var = " << join_doubles(l.running_var) << '\n';
    }
    out << "end_layer\n";
  }
  return out.str();
}

ModelBundle parse_bundle(std::string_view text) {
  ModelBundle b;
  bool saw_format = false;
  bool saw_version = false;
  long long declared_layers = -1;
  bool in_layer = false;
  Layer cur;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "bundle line " + std::to_string(line_no);
    if (line == "end_layer") {
      if (!in_layer) throw Error(ErrorCode::kParse, where + ": end_layer outside a layer");
      b.layers.push_back(std::move(cur));
      cur = Layer{};
      in_layer = false;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::kParse, where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));

    if (key == "layer") {
      if (in_layer) throw Error(ErrorCode::kParse, where + ": layer '" + cur.name + "' truncated (missing end_layer)");
      in_layer = true;
      cur.name = std::string(value);
      continue;
    }
    if (in_layer) {
      if (key == "kind") cur.kind = parse_layer_kind(value);
      else if (key == "inputs") {
        for (auto part : split(value, ',')) cur.inputs.emplace_back(trim(part));
      } else if (key == "in_channels") cur.in_channels = static_cast<int>(parse_int(value, key));
      else if (key == "out_channels") cur.out_channels = static_cast<int>(parse_int(value, key));
      else if (key == "kernel") cur.kernel = static_cast<int>(parse_int(value, key));
      else if (key == "channels") cur.channels = static_cast<int>(parse_int(value, key));
      else if (key == "eps") cur.eps = parse_double(value, key);
      else if (key == "weight") cur.weight = parse_doubles(value, key);
      else if (key == "bias") cur.bias = parse_doubles(value, key);
      else if (key == "gamma") cur.gamma = parse_doubles(value, key);
      else if (key == "beta") cur.beta = parse_doubles(value, key);
      else if (key == "running_mean") cur.running_mean = parse_doubles(value, key);
      else if (key == "running_var") cur.running_var = parse_doubles(value, key);
      else throw Error(ErrorCode::kParse, where + ": unknown layer key '" + key + "'");
      continue;
    }
    if (key == "format") {
      if (value != kBundleFormat) throw Error(ErrorCode::kParse, where + ": not a model bundle");
      saw_format = true;
    } else if (key == "version") {
      b.version = static_cast<int>(parse_int(value, key));
      saw_version = true;
      if (b.version != kBundleVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    "bundle version " + std::to_string(b.version) + " is not supported");
      }
    } else if (key == "input_width") {
      b.input_width = static_cast<int>(parse_int(value, key));
    } else if (key == "outputs") {
      b.outputs.clear();
      for (auto part : split(value, ',')) b.outputs.emplace_back(trim(part));
    } else if (key == "layers") {
      declared_layers = parse_int(value, key);
    } else if (key.starts_with("norm.")) {
      const auto name = std::string_view(key).substr(5);
      const auto& names = feature_names();
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw Error(ErrorCode::kParse, where + ": unknown feature '" + std::string(name) + "'");
      const auto parts = split(value, ',');
      if (parts.size() != 2) throw Error(ErrorCode::kParse, where + ": bound needs lo,hi");
      b.bounds[static_cast<std::size_t>(it - names.begin())] = {parse_double(parts[0], key),
                                                                parse_double(parts[1], key)};
    } else {
      throw Error(ErrorCode::kParse, where + ": unknown key '" + key + "'");
    }
  }
  if (in_layer) {
    throw Error(ErrorCode::kParse, "bundle truncated inside layer '" + cur.name + "'");
  }
  if (!saw_format || !saw_version) throw Error(ErrorCode::kParse, "bundle truncated: missing header");
  if (declared_layers < 0 || static_cast<std::size_t>(declared_layers) != b.layers.size()) {
    throw Error(ErrorCode::kParse, "bundle truncated: declared " + std::to_string(declared_layers) +
                                       " layers, found " + std::to_string(b.layers.size()));
  }
  validate(b);
  return b;
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& b) {
  validate(b);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << write_bundle(b);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bundle(ss.str());
}

}  // namespace ehspc
