#include <cmath>
#include <limits>
#include <vector>

#include "ehspc/channel.hpp"
#include "ehspc/ehmodel.hpp"
#include "ehspc/error.hpp"
#include "test_support.hpp"

using namespace ehspc;

namespace {

ChannelDraw one_hop_draw(double g, double v_tx, double v_rx, double h, double f) {
  ChannelDraw d;
  d.g.resize(1, 1);
  d.v_tx.resize(1, 1);
  d.v_rx.resize(1, 1);
  d.f.resize(1, 1);
  d.g(0, 0) = g;
  d.v_tx(0, 0) = v_tx;
  d.v_rx(0, 0) = v_rx;
  d.h = {h};
  d.f(0, 0) = f;
  return d;
}

}  // namespace

TEST_CASE("kappa") {
  Scenario s;
  Constants c;
  CHECK(kappa(s, c) == doctest::Approx(1.6).epsilon(1e-15));
  s.K = 1;
  c.eta = 1.0;
  s.n_e = c.m / 2;
  CHECK(kappa(s, c) == 1.0);
  s.K = 2;
  c.eta = 0.5;
  s.n_e = 100;
  c.m = 1500;
  CHECK(kappa(s, c) == doctest::Approx(1.0 / 14.0).epsilon(1e-15));
  s.n_e = 1500;
  CHECK_THROWS_CODE(kappa(s, c), ErrorCode::kDomain);
}

TEST_CASE("harvested power per scheme") {
  const auto d = one_hop_draw(3.0, 2.0, 1.0, 1.0, 1.0);
  CHECK(harvested_power(EhScheme::kPT, 1, d, 1.0, 1.0, 1.0) == 2.0);
  CHECK(harvested_power(EhScheme::kMax, 1, d, 1.0, 1.0, 1.0) == 3.0);
  CHECK(harvested_power(EhScheme::kSum, 1, d, 1.0, 1.0, 1.0) == 5.0);
  for (auto sc : {EhScheme::kPT, EhScheme::kMax, EhScheme::kSum}) {
    CHECK(harvested_power(sc, 1, d, 0.0, 1.0, 1.0) == 2.0);
  }
  CHECK_THROWS_CODE(harvested_power(EhScheme::kPT, 2, d, 1.0, 1.0, 1.0),
                    ErrorCode::kInvalidArgument);
  CHECK_THROWS_CODE(harvested_power(EhScheme::kPT, 1, d, -1.0, 1.0, 1.0),
                    ErrorCode::kInvalidArgument);
}

TEST_CASE("scheme ordering on random draws, before and after the cap") {
  Scenario s;
  s.K = 3;
  s.L = 4;
  s.M = 2;
  s.N = 3;
  Constants c;
  const auto geo = build_geometry(s, c);
  const auto means = link_means(s, geo, c);
  const LinearPowers p = linear_powers(s);
  const double kap = kappa(s, c);
  ChannelDraw d;
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    draw_block_into(d, realization_stream(77, i), means);
    for (int k = 1; k <= s.K; ++k) {
      const auto pt = hop_power(EhScheme::kPT, k, d, p, kap);
      const auto mx = hop_power(EhScheme::kMax, k, d, p, kap);
      const auto sm = hop_power(EhScheme::kSum, k, d, p, kap);
      if (!(sm.uncapped >= mx.uncapped && mx.uncapped >= pt.uncapped)) ++violations;
      if (!(mx.uncapped >= kap * (p.p_pb * d.g.row_sum(k - 1)))) ++violations;
      if (!(sm.capped >= mx.capped && mx.capped >= pt.capped)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("interference cap") {
  const std::vector<double> f2{2.0};
  CHECK(cap_power(10.0, 4.0, f2) == 2.0);
  const std::vector<double> f1{1.0};
  CHECK(cap_power(1.0, 100.0, f1) == 1.0);
  const std::vector<double> f3{0.1, 0.5, 0.2};
  CHECK(cap_power(10.0, 1.0, f3) == 2.0);
  CHECK(cap_power(10.0, std::numeric_limits<double>::infinity(), f3) == 10.0);
  CHECK_THROWS_CODE(cap_power(1.0, 0.0, f1), ErrorCode::kInvalidArgument);

  RngStream st(4);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> f{st.exponential(), st.exponential(), st.exponential()};
    const double i_th = 1e-3 + 10.0 * st.uniform();
    const double worst = std::max({f[0], f[1], f[2]});
    const double p = cap_power(100.0 * st.uniform(), i_th, f);
    CHECK(p <= i_th / worst * (1.0 + 1e-12));
  }
}

TEST_CASE("hop SINR") {
  CHECK(hop_sinr(2.0, 3.0, 6.0, 1.0) == 1.0);
  CHECK(hop_sinr(2.0, 0.0, 6.0, 1.0) == 0.0);
  CHECK(hop_sinr(5.0, 1.0, 4.0, 2.0) == 0.625);
  CHECK_THROWS_CODE(hop_sinr(1.0, 1.0, 0.0, 1.0), ErrorCode::kUndefined);
  CHECK_THROWS_CODE(hop_sinr(1.0, 1.0, 1.0, 0.0), ErrorCode::kInvalidArgument);

  RngStream st(8);
  for (int i = 0; i < 1000; ++i) {
    const double p = 0.1 + st.uniform();
    const double h = 0.1 + st.uniform();
    const double v = 0.1 + st.uniform();
    const double base = hop_sinr(p, h, v, 1.0);
    CHECK(hop_sinr(p * 1.01, h, v, 1.0) > base);
    CHECK(hop_sinr(p, h * 1.01, v, 1.0) > base);
    CHECK(hop_sinr(p, h, v * 1.01, 1.0) < base);
  }
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("sum") == EhScheme::kSum);
  CHECK(parse_scheme("PT") == EhScheme::kPT);
  CHECK(parse_scheme("MAX") == EhScheme::kMax);
  CHECK(to_string(EhScheme::kMax) == "Max");
  CHECK_THROWS_CODE(parse_scheme("both"), ErrorCode::kParse);
}

TEST_CASE("linear powers") {
  Scenario s;
  const auto p = linear_powers(s);
  CHECK(p.p_pb == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(test::rel_diff(p.p_pt, 15.848931924611135) < 1e-15);
  CHECK(p.i_th == doctest::Approx(100.0).epsilon(1e-15));
}
