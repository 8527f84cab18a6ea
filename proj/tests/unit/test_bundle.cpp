#include <cmath>
#include <string>

#include "ehspc/bundle.hpp"
#include "ehspc/error.hpp"
#include "ehspc/surrogate.hpp"
#include "test_support.hpp"

using namespace ehspc;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

void check_error(const std::string& text, ErrorCode code, const std::string& mention) {
  try {
    parse_bundle(text);
    FAIL("expected bundle rejection");
  } catch (const Error& e) {
    CHECK(e.code() == code);
    INFO(std::string(e.what()));
    CHECK(std::string(e.what()).find(mention) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("round trip is byte-identical") {
  for (const auto& b : {random_cnn_bundle(3, CnnSpec{8, 2, 16, 3}), random_dnn_bundle(4, 2, 10)}) {
    const std::string first = write_bundle(b);
    const ModelBundle back = parse_bundle(first);
    CHECK(back == b);
    CHECK(write_bundle(back) == first);
  }
  const auto dir = test::tmp_dir("bundle_rt");
  const auto b = random_cnn_bundle(9, CnnSpec{4, 1, 8, 5});
  save_bundle(dir / "m.bundle", b);
  CHECK(load_bundle(dir / "m.bundle") == b);
  save_bundle(dir / "m2.bundle", load_bundle(dir / "m.bundle"));
  CHECK(test::slurp(dir / "m.bundle") == test::slurp(dir / "m2.bundle"));
  CHECK(test::slurp(dir / "m.bundle").find("version = 1\n") != std::string::npos);
}

TEST_CASE("truncation is a parse error") {
  const std::string text = write_bundle(random_dnn_bundle(1, 1, 4));
  check_error(text.substr(0, text.rfind("end_layer")), ErrorCode::kParse, "truncated");
  check_error(text.substr(0, text.find("layer = out")), ErrorCode::kParse, "truncated");
  check_error("", ErrorCode::kParse, "truncated");
}

TEST_CASE("version and format checks") {
  const std::string text = write_bundle(random_dnn_bundle(1, 1, 4));
  check_error(replace_once(text, "version = 1", "version = 2"), ErrorCode::kVersionMismatch, "version");
  check_error(replace_once(text, "format = ehspc-model-bundle", "format = other"), ErrorCode::kParse, "not a model bundle");
  check_error(replace_once(text, "kind = relu", "kind = tanh"), ErrorCode::kParse, "tanh");
  check_error(replace_once(text, "outputs = bler,throughput", "outputs = bler"), ErrorCode::kShapeMismatch, "outputs");
}

TEST_CASE("invariant violations name the layer") {
  ModelBundle b = random_cnn_bundle(5, CnnSpec{4, 1, 8, 3});
  for (auto& l : b.layers) {
    if (l.name == "chi1_map_bn2") l.running_var[2] = 0.0;
  }
  CHECK_THROWS_CODE(validate(b), ErrorCode::kInvariant);
  check_error(write_bundle(b), ErrorCode::kInvariant, "chi1_map_bn2");

  b = random_cnn_bundle(5, CnnSpec{4, 1, 8, 3});
  b.layers[0].weight[1] = std::nan("");
  check_error(write_bundle(b), ErrorCode::kNonFinite, "stem_conv");

  b = random_cnn_bundle(5, CnnSpec{4, 1, 8, 3});
  for (auto& l : b.layers) {
    if (l.name == "fc1") {
      l.in_channels -= 1;
      l.weight.resize(static_cast<std::size_t>(l.in_channels * l.out_channels));
    }
  }
  check_error(write_bundle(b), ErrorCode::kShapeMismatch, "fc1");

  b = random_dnn_bundle(5, 1, 4);
  b.layers.back().out_channels = 3;
  b.layers.back().weight.resize(12);
  b.layers.back().bias.resize(3);
  CHECK_THROWS_CODE(validate(b), ErrorCode::kShapeMismatch);

  b = random_dnn_bundle(5, 1, 4);
  b.layers[1].inputs = {"nowhere"};
  CHECK_THROWS_CODE(validate(b), ErrorCode::kShapeMismatch);
}

TEST_CASE("shapes of the full CNN") {
  const auto b = random_cnn_bundle(1);
  const auto shapes = validate(b);
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    const auto k = b.layers[i].kind;
    if (k == LayerKind::kConv1d || k == LayerKind::kBatchNorm || k == LayerKind::kBroadcastMul) {
      CHECK(shapes[i].is_map);
      CHECK(shapes[i].width == 15);
      CHECK(shapes[i].channels == 64);
    }
  }
  CHECK(shapes.back() == Shape{false, 0, 2});
}

TEST_CASE("layer kind names") {
  for (auto k : {LayerKind::kConv1d, LayerKind::kBatchNorm, LayerKind::kRelu, LayerKind::kGap,
                 LayerKind::kConv1x1, LayerKind::kSigmoidGateMul, LayerKind::kFullyConnected,
                 LayerKind::kFlatten, LayerKind::kBroadcastMul}) {
    CHECK(parse_layer_kind(to_string(k)) == k);
  }
  CHECK_THROWS_CODE(parse_layer_kind("softmax"), ErrorCode::kParse);
}

TEST_CASE("missing file") {
  CHECK_THROWS_CODE(load_bundle("/nonexistent/model.bundle"), ErrorCode::kIo);
}
