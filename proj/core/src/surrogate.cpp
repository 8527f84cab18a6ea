#include "ehspc/surrogate.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"
#include "ehspc/parallel.hpp"

namespace ehspc {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;

namespace {

struct Op {
  LayerKind kind;
  int in0 = -1;  // -1 = network input
  int in1 = -1;
  std::vector<Mat> taps;  // [in][out] per tap for conv1d; one entry otherwise
  RowVec bias;
  RowVec scale;  // batchnorm folded into scale/shift
  RowVec shift;
  int kernel = 1;
};

double gate(double x) {
  if (x >= 0.0) return x / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return x * e / (1.0 + e);
}

Mat to_mat(const FeatureMap& m) {
  Mat out(m.is_map ? m.width : 1, m.channels);
  std::copy(m.data.begin(), m.data.end(), out.data());
  return out;
}

FeatureMap to_map(const Mat& m, const Shape& s) {
  FeatureMap out;
  out.is_map = s.is_map;
  out.width = s.is_map ? s.width : 1;
  out.channels = s.channels;
  out.data.assign(m.data(), m.data() + m.size());
  return out;
}

// [out][in] weights -> [in][out] matrix so that rows (positions) multiply from the left.
Mat transpose_weights(const std::vector<double>& w, int out, int in, int kernel, int tap) {
  Mat m(in, out);
  for (int o = 0; o < out; ++o) {
    for (int i = 0; i < in; ++i) {
      m(i, o) = w[(static_cast<std::size_t>(o) * in + i) * kernel + tap];
    }
  }
  return m;
}

std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return h;
}

std::vector<double> uniform_values(RngStream rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

Layer linear_layer(std::string name, LayerKind kind, int in, int out, int kernel,
                   const RngStream& root) {
  Layer l;
  l.kind = kind;
  l.in_channels = in;
  l.out_channels = out;
  if (kind == LayerKind::kConv1d) l.kernel = kernel;
  const auto fan_in = static_cast<double>(in * (kind == LayerKind::kConv1d ? kernel : 1));
  const double s = std::sqrt(3.0 / fan_in);
  const auto h = hash_name(name);
  l.weight = uniform_values(root.child(h).child(0),
                            static_cast<std::size_t>(in) * out *
                                (kind == LayerKind::kConv1d ? kernel : 1),
                            s);
  l.bias = uniform_values(root.child(h).child(1), static_cast<std::size_t>(out), 0.1);
  l.name = std::move(name);
  return l;
}

BatchNormParams random_bn(const std::string& name, int c, const RngStream& root) {
  BatchNormParams p;
  RngStream rng = root.child(hash_name(name));
  for (int i = 0; i < c; ++i) {
    p.gamma.push_back(0.5 + rng.uniform());
    p.beta.push_back(0.2 * (2.0 * rng.uniform() - 1.0));
    p.running_mean.push_back(0.2 * (2.0 * rng.uniform() - 1.0));
    p.running_var.push_back(0.5 + rng.uniform());
  }
  return p;
}

Layer bn_layer(std::string name, int c, const BatchNormParams& p) {
  Layer l;
  l.name = std::move(name);
  l.kind = LayerKind::kBatchNorm;
  l.channels = c;
  l.eps = p.eps;
  l.gamma = p.gamma;
  l.beta = p.beta;
  l.running_mean = p.running_mean;
  l.running_var = p.running_var;
  return l;
}

Layer simple_layer(std::string name, LayerKind kind, std::vector<std::string> inputs = {}) {
  Layer l;
  l.name = std::move(name);
  l.kind = kind;
  l.inputs = std::move(inputs);
  return l;
}

Layer with_weights(std::string name, LayerKind kind, int c, std::vector<double> w,
                   std::vector<double> b, std::vector<std::string> inputs = {}) {
  Layer l = simple_layer(std::move(name), kind, std::move(inputs));
  l.in_channels = c;
  l.out_channels = c;
  l.weight = std::move(w);
  l.bias = std::move(b);
  return l;
}

struct Graph {
  std::vector<Op> ops;

  Mat apply(const Op& op, const Mat& x, const Mat* second) const {
    switch (op.kind) {
      case LayerKind::kConv1d: {
        const int w = static_cast<int>(x.rows());
        const int half = op.kernel / 2;
        Mat padded = Mat::Zero(w + op.kernel - 1, x.cols());
        padded.middleRows(half, w) = x;
        Mat y = Mat::Zero(w, op.taps[0].cols());
        for (int t = 0; t < op.kernel; ++t) {
          y.noalias() += padded.middleRows(t, w) * op.taps[static_cast<std::size_t>(t)];
        }
        y.rowwise() += op.bias;
        return y;
      }
      case LayerKind::kConv1x1:
      case LayerKind::kFullyConnected: {
        Mat y = x * op.taps[0];
        y.rowwise() += op.bias;
        return y;
      }
      case LayerKind::kBatchNorm: {
        Mat y = x;
        y.array().rowwise() *= op.scale.array();
        y.rowwise() += op.shift;
        return y;
      }
      case LayerKind::kRelu:
        return x.cwiseMax(0.0);
      case LayerKind::kSigmoidGateMul:
        return x.unaryExpr([](double v) { return gate(v); });
      case LayerKind::kGap:
        return x.colwise().mean();
      case LayerKind::kFlatten: {
        Mat y = x;
        y.resize(1, x.size());  // row-major storage: index w * C + c
        return y;
      }
      case LayerKind::kBroadcastMul: {
        Mat y = *second;
        y.array().rowwise() *= x.row(0).array();
        return y;
      }
    }
    throw Error(ErrorCode::kInvariant, "unhandled layer kind");
  }

  // Evaluates all layers; keeps every output when `all` is set.
  Mat run(const Mat& input, std::vector<Mat>* all) const {
    std::vector<Mat> outs(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Op& op = ops[i];
      const Mat& a = op.in0 < 0 ? input : outs[static_cast<std::size_t>(op.in0)];
      const Mat* b = op.in1 < 0 ? nullptr : &outs[static_cast<std::size_t>(op.in1)];
      outs[i] = apply(op, a, b);
    }
    Mat last = outs.back();
    if (all) *all = std::move(outs);
    return last;
  }
};

Graph compile(const std::vector<Layer>& layers) {
  Graph g;
  std::map<std::string, int, std::less<>> index;
  int previous = -1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    Op op;
    op.kind = l.kind;
    auto resolve = [&](const std::string& n) { return n == "input" ? -1 : index.at(n); };
    op.in0 = l.inputs.empty() ? previous : resolve(l.inputs[0]);
    if (l.inputs.size() > 1) op.in1 = resolve(l.inputs[1]);
    switch (l.kind) {
      case LayerKind::kConv1d:
        op.kernel = l.kernel;
        for (int t = 0; t < l.kernel; ++t) {
          op.taps.push_back(transpose_weights(l.weight, l.out_channels, l.in_channels, l.kernel, t));
        }
        op.bias = Eigen::Map<const RowVec>(l.bias.data(), static_cast<Eigen::Index>(l.bias.size()));
        break;
      case LayerKind::kConv1x1:
      case LayerKind::kFullyConnected:
        op.taps.push_back(transpose_weights(l.weight, l.out_channels, l.in_channels, 1, 0));
        op.bias = Eigen::Map<const RowVec>(l.bias.data(), static_cast<Eigen::Index>(l.bias.size()));
        break;
      case LayerKind::kBatchNorm: {
        op.scale.resize(l.channels);
        op.shift.resize(l.channels);
        for (int c = 0; c < l.channels; ++c) {
          const auto k = static_cast<std::size_t>(c);
          op.scale(c) = l.gamma[k] / std::sqrt(l.running_var[k] + l.eps);
          op.shift(c) = l.beta[k] - l.running_mean[k] * op.scale(c);
        }
        break;
      }
      default:
        break;
    }
    g.ops.push_back(std::move(op));
    index[l.name] = static_cast<int>(i);
    previous = static_cast<int>(i);
  }
  return g;
}

}  // namespace

struct Network::Impl {
  ModelBundle bundle;
  std::vector<Shape> shapes;
  Graph graph;

  Mat input_map(const FeatureVector& x, Prediction* p) const {
    Mat in(static_cast<int>(kFeatureCount), 1);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const Range r = bundle.bounds[i];
      if (!(x[i] >= r.lo && x[i] <= r.hi) && p) {
        p->extrapolated = true;
        p->out_of_bounds.push_back(static_cast<int>(i));
      }
      in(static_cast<Eigen::Index>(i), 0) = r.hi > r.lo ? (x[i] - r.lo) / (r.hi - r.lo) : 0.0;
    }
    return in;
  }
};

Network::Network(ModelBundle bundle) {
  auto impl = std::make_shared<Impl>();
  impl->shapes = validate(bundle);
  impl->graph = compile(bundle.layers);
  impl->bundle = std::move(bundle);
  impl_ = std::move(impl);
}

const ModelBundle& Network::bundle() const noexcept { return impl_->bundle; }
const std::vector<Shape>& Network::shapes() const noexcept { return impl_->shapes; }

Prediction Network::forward(const FeatureVector& x) const {
  const auto t0 = std::chrono::steady_clock::now();
  Prediction p;
  const Mat y = impl_->graph.run(impl_->input_map(x, &p), nullptr);
  p.y = {y(0, 0), y(0, 1)};
  p.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return p;
}

std::vector<Prediction> Network::forward_batch(std::span<const FeatureVector> xs,
                                               int workers) const {
  std::vector<Prediction> out(xs.size());
  parallel_for(xs.size(), workers, [&](std::size_t i) { out[i] = forward(xs[i]); });
  return out;
}

std::vector<FeatureMap> Network::trace(const FeatureVector& x) const {
  std::vector<Mat> all;
  impl_->graph.run(impl_->input_map(x, nullptr), &all);
  std::vector<FeatureMap> out;
  for (std::size_t i = 0; i < all.size(); ++i) out.push_back(to_map(all[i], impl_->shapes[i]));
  return out;
}

FeatureMap Network::run(const FeatureMap& input) const {
  const Shape expected{true, impl_->bundle.input_width, 1};
  if (!input.is_map || input.width != expected.width || input.channels != 1 ||
      input.data.size() != static_cast<std::size_t>(input.width)) {
    throw Error(ErrorCode::kShapeMismatch, "network input must be a 15 x 1 map");
  }
  return to_map(impl_->graph.run(to_mat(input), nullptr), impl_->shapes.back());
}

std::vector<Layer> chi_block_layers(const std::string& prefix, const std::string& input,
                                    const ChiBlockWeights& w) {
  const int c = w.channels;
  std::vector<Layer> ls;
  ls.push_back(simple_layer(prefix + "_gap", LayerKind::kGap, {input}));
  ls.push_back(with_weights(prefix + "_attn_conv", LayerKind::kConv1x1, c, w.attn_conv_w, w.attn_conv_b));
  ls.push_back(simple_layer(prefix + "_attn_gate1", LayerKind::kSigmoidGateMul));
  ls.push_back(with_weights(prefix + "_attn_fc", LayerKind::kFullyConnected, c, w.attn_fc_w, w.attn_fc_b));
  ls.push_back(simple_layer(prefix + "_attn_gate2", LayerKind::kSigmoidGateMul));
  ls.push_back(with_weights(prefix + "_map_conv1", LayerKind::kConv1x1, c, w.map_conv1_w,
                            w.map_conv1_b, {input}));
  ls.push_back(bn_layer(prefix + "_map_bn1", c, w.map_bn1));
  ls.push_back(with_weights(prefix + "_map_conv2", LayerKind::kConv1x1, c, w.map_conv2_w, w.map_conv2_b));
  ls.push_back(bn_layer(prefix + "_map_bn2", c, w.map_bn2));
  ls.push_back(simple_layer(prefix + "_out", LayerKind::kBroadcastMul,
                            {prefix + "_attn_gate2", prefix + "_map_bn2"}));
  return ls;
}

FeatureMap chi_block_forward(const FeatureMap& in, const ChiBlockWeights& w) {
  if (!in.is_map || in.channels != w.channels || in.width < 1 ||
      in.data.size() != static_cast<std::size_t>(in.width) * in.channels) {
    throw Error(ErrorCode::kShapeMismatch, "block input must be a W x C map with C = " +
                                               std::to_string(w.channels));
  }
  const auto layers = chi_block_layers("chi", "input", w);
  const auto shapes = validate_layers(layers, Shape{true, in.width, in.channels});
  return to_map(compile(layers).run(to_mat(in), nullptr), shapes.back());
}

ModelBundle random_cnn_bundle(std::uint64_t seed, const CnnSpec& spec) {
  if (spec.channels < 1 || spec.blocks < 0 || spec.fc_width < 1 || spec.kernel < 1 ||
      spec.kernel % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid CNN spec");
  }
  const RngStream root(seed);
  const int c = spec.channels;
  ModelBundle b;
  b.bounds = table1_bounds().feature_ranges();
  b.layers.push_back(linear_layer("stem_conv", LayerKind::kConv1d, 1, c, spec.kernel, root));
  b.layers.push_back(bn_layer("stem_bn", c, random_bn("stem_bn", c, root)));
  b.layers.push_back(simple_layer("stem_relu", LayerKind::kRelu));
  std::string prev = "stem_relu";
  for (int k = 1; k <= spec.blocks; ++k) {
    const std::string p = "chi" + std::to_string(k);
    ChiBlockWeights w;
    w.channels = c;
    const auto fill = [&](const std::string& name, std::vector<double>& wt, std::vector<double>& bs) {
      Layer l = linear_layer(p + name, LayerKind::kConv1x1, c, c, 1, root);
      wt = std::move(l.weight);
      bs = std::move(l.bias);
    };
    fill("_attn_conv", w.attn_conv_w, w.attn_conv_b);
    fill("_attn_fc", w.attn_fc_w, w.attn_fc_b);
    fill("_map_conv1", w.map_conv1_w, w.map_conv1_b);
    fill("_map_conv2", w.map_conv2_w, w.map_conv2_b);
    w.map_bn1 = random_bn(p + "_map_bn1", c, root);
    w.map_bn2 = random_bn(p + "_map_bn2", c, root);
    for (auto& l : chi_block_layers(p, prev, w)) b.layers.push_back(std::move(l));
    prev = p + "_out";
  }
  b.layers.push_back(simple_layer("flatten", LayerKind::kFlatten, {prev}));
  b.layers.push_back(linear_layer("fc1", LayerKind::kFullyConnected,
                                  static_cast<int>(kFeatureCount) * c, spec.fc_width, 1, root));
  b.layers.push_back(simple_layer("fc1_relu", LayerKind::kRelu));
  b.layers.push_back(linear_layer("fc2", LayerKind::kFullyConnected, spec.fc_width, 2, 1, root));
  validate(b);
  return b;
}

ModelBundle random_dnn_bundle(std::uint64_t seed, int hidden, int width) {
  if (hidden < 0 || width < 1) throw Error(ErrorCode::kInvalidArgument, "invalid DNN spec");
  const RngStream root(seed);
  ModelBundle b;
  b.bounds = table1_bounds().feature_ranges();
  b.layers.push_back(simple_layer("flatten", LayerKind::kFlatten));
  int in = static_cast<int>(kFeatureCount);
  for (int k = 1; k <= hidden; ++k) {
    const std::string p = "dense" + std::to_string(k);
    b.layers.push_back(linear_layer(p, LayerKind::kFullyConnected, in, width, 1, root));
    b.layers.push_back(simple_layer(p + "_relu", LayerKind::kRelu));
    in = width;
  }
  b.layers.push_back(linear_layer("out", LayerKind::kFullyConnected, in, 2, 1, root));
  validate(b);
  return b;
}

double rmse(std::span<const std::array<double, 2>> y,
            std::span<const std::array<double, 2>> y_hat) {
  if (y.size() != y_hat.size()) {
    throw Error(ErrorCode::kShapeMismatch, "rmse: " + std::to_string(y.size()) + " rows vs " +
                                               std::to_string(y_hat.size()));
  }
  if (y.empty()) throw Error(ErrorCode::kInvalidArgument, "rmse: no rows");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int j = 0; j < 2; ++j) {
      const double d = y[i][static_cast<std::size_t>(j)] - y_hat[i][static_cast<std::size_t>(j)];
      acc += d * d;
    }
  }
  return std::sqrt(acc / static_cast<double>(2 * y.size()));
}

BenchRow bench(const Network& net, const Scenario& s, const Constants& c,
               const McConfig& mc, int batch, int workers) {
  if (batch < 1) throw Error(ErrorCode::kInvalidArgument, "bench: batch must be >= 1");
  validate(s, c);
  std::vector<FeatureVector> inputs{to_features(s)};
  ScenarioBounds fixed = table1_bounds();
  fixed.K = {static_cast<double>(s.K), static_cast<double>(s.K)};
  fixed.L = {static_cast<double>(s.L), static_cast<double>(s.L)};
  fixed.M = {static_cast<double>(s.M), static_cast<double>(s.M)};
  fixed.N = {static_cast<double>(s.N), static_cast<double>(s.N)};
  RngStream rng = RngStream(mc.seed).child(hash_name("bench"));
  while (static_cast<int>(inputs.size()) < batch) inputs.push_back(to_features(sample_scenario(rng, fixed)));

  BenchRow row;
  row.scenario = s;
  row.realizations = mc.n_realizations;
  row.batch = batch;
  auto t0 = std::chrono::steady_clock::now();
  const PerfEstimate est = estimate(s, c, mc, workers);
  row.sim_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t0 = std::chrono::steady_clock::now();
  const auto preds = net.forward_batch(inputs, workers);
  row.cnn_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::array<std::array<double, 2>, 1> truth{{{est.e2e_bler, est.throughput}}};
  const std::array<std::array<double, 2>, 1> guess{{preds.front().y}};
  row.rmse = rmse(truth, guess);
  return row;
}

void write_bench_header(std::ostream& os) {
  os << "K,L,M,N,realizations,batch,sim_seconds,cnn_seconds,speedup,rmse\n";
}

void write_bench_row(std::ostream& os, const BenchRow& r) {
  const double speedup = r.cnn_seconds > 0.0 ? r.sim_seconds / r.cnn_seconds : HUGE_VAL;
  os << r.scenario.K << ',' << r.scenario.L << ',' << r.scenario.M << ',' << r.scenario.N << ','
     << r.realizations << ',' << r.batch << ',' << format_double(r.sim_seconds) << ','
     << format_double(r.cnn_seconds) << ',' << format_double(speedup) << ','
     << format_double(r.rmse) << '\n';
}

}  // namespace ehspc
