#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ehspc/channel.hpp"
#include "ehspc/error.hpp"
#include "ehspc/parallel.hpp"
#include "test_support.hpp"

using namespace ehspc;

TEST_CASE("path loss") {
  Constants c;
  CHECK(path_loss(1.0, c) == doctest::Approx(1e-3).epsilon(1e-15));
  Constants flat = c;
  flat.sigma_pl_db = 0.0;
  CHECK(path_loss(1.0, flat) == 1.0);
  // 1e-3 * 25^-2.6 to 17 digits
  CHECK(test::rel_diff(path_loss(25.0, c), 2.3192949237686257e-7) < 1e-14);
  CHECK_THROWS_CODE(path_loss(0.0, c), ErrorCode::kDomain);
  CHECK_THROWS_CODE(path_loss(-1.0, c), ErrorCode::kDomain);
}

TEST_CASE("exponential gains: moments and KS against the analytic CDF") {
  RngStream st(17);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += draw_exponential_gain(st, 1.0);
  CHECK(std::abs(sum / n - 1.0) < 0.01);

  const double G = 3.7e-5;
  sum = 0.0;
  std::vector<double> xs(20000);
  for (auto& x : xs) {
    x = draw_exponential_gain(st, G);
    sum += x;
  }
  CHECK(std::abs(sum / static_cast<double>(xs.size()) / G - 1.0) < 0.03);

  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = 1.0 - std::exp(-xs[i] / G);
    d = std::max({d, std::abs(F - static_cast<double>(i) / m),
                  std::abs(F - static_cast<double>(i + 1) / m)});
  }
  CHECK(d * std::sqrt(m) < 1.628);  // KS 1% critical value

  const auto below_median = std::count_if(xs.begin(), xs.end(),
                                          [&](double x) { return x < std::log(2.0) * G; });
  CHECK(std::abs(static_cast<double>(below_median) / m - 0.5) < 0.015);
  CHECK_THROWS_CODE(draw_exponential_gain(st, 0.0), ErrorCode::kDomain);
}

TEST_CASE("single-link draw shape") {
  Scenario s;
  s.K = s.L = s.M = s.N = 1;
  Constants c;
  const auto geo = build_geometry(s, c);
  const ChannelDraw d = draw_block(realization_stream(1, 0), s, geo, c);
  CHECK(d.hops() == 1);
  CHECK(d.g.cols() == 1);
  CHECK(d.v_tx.cols() == 1);
  CHECK(d.v_rx.cols() == 1);
  CHECK(d.f.cols() == 1);
  CHECK(d.g(0, 0) > 0.0);
  CHECK(d.v_tx(0, 0) > 0.0);
  CHECK(d.v_rx(0, 0) > 0.0);
  CHECK(d.h[0] > 0.0);
  CHECK(d.f(0, 0) > 0.0);
}

TEST_CASE("draws are a function of (seed, path)") {
  Scenario s;
  Constants c;
  const auto geo = build_geometry(s, c);
  CHECK(draw_block(realization_stream(5, 12), s, geo, c) ==
        draw_block(realization_stream(5, 12), s, geo, c));
  CHECK_FALSE(draw_block(realization_stream(5, 12), s, geo, c) ==
              draw_block(realization_stream(5, 13), s, geo, c));

  const int n = 2000;
  std::vector<ChannelDraw> serial(n);
  std::vector<ChannelDraw> threaded(n);
  parallel_for(n, 1, [&](std::size_t i) {
    serial[i] = draw_block(realization_stream(9, i), s, geo, c);
  });
  parallel_for(n, 8, [&](std::size_t i) {
    threaded[i] = draw_block(realization_stream(9, i), s, geo, c);
  });
  CHECK(serial == threaded);
}

TEST_CASE("PT gains are drawn once per node and reused") {
  Scenario s;
  s.K = 5;
  s.M = 3;
  Constants c;
  const auto geo = build_geometry(s, c);
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_block(realization_stream(3, i), s, geo, c);
    for (int k = 1; k < s.K; ++k) {
      for (int m = 0; m < s.M; ++m) CHECK(d.v_rx(k - 1, m) == d.v_tx(k, m));
    }
  }
}

TEST_CASE("empirical means match the path loss") {
  Scenario s;
  s.K = 4;
  s.L = 5;
  Constants c;
  const auto geo = build_geometry(s, c);
  const auto means = link_means(s, geo, c);
  const int n = 100000;
  std::vector<double> h(4, 0.0);
  std::vector<double> gsum(4, 0.0);
  ChannelDraw d;
  for (int i = 0; i < n; ++i) {
    draw_block_into(d, realization_stream(21, i), means);
    for (int k = 0; k < 4; ++k) {
      h[k] += d.h[k];
      gsum[k] += d.g.row_sum(k);
    }
  }
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(h[k] / n / path_loss(25.0 / 4.0, c) - 1.0) < 0.02);
    const double G = path_loss(distance(s.pb_pos, geo.node_pos[k]), c);
    CHECK(std::abs(gsum[k] / n / (5.0 * G) - 1.0) < 0.02);
  }
}

TEST_CASE("draw CSV dump") {
  Scenario s;
  s.K = 2;
  s.L = s.M = s.N = 1;
  Constants c;
  const auto d = draw_block(realization_stream(1, 0), s, build_geometry(s, c), c);
  std::ostringstream os;
  write_draw_csv(os, 7, d);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  CHECK(text.rfind("7,1,g,0,", 0) == 0);
}
