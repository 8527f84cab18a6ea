#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ehspc/error.hpp"
#include "ehspc/fblmetrics.hpp"
#include "test_support.hpp"

using namespace ehspc;

namespace {
constexpr double kLog2eSq = 2.0813689810056078;  // (log2 e)^2, 17 digits
}

TEST_CASE("capacity") {
  CHECK(shannon_c(1.0) == 1.0);
  CHECK(shannon_c(3.0) == 2.0);
  CHECK(shannon_c(0.0) == 0.0);
  CHECK_THROWS_CODE(shannon_c(-1.0), ErrorCode::kDomain);
}

TEST_CASE("dispersion") {
  CHECK(dispersion_v(0.0) == 0.0);
  CHECK(test::rel_diff(dispersion_v(1.0), 1.5610267357542058) < 1e-15);
  CHECK(std::abs(dispersion_v(1e12) - kLog2eSq) < 1e-9);
  CHECK(std::abs(dispersion_v(std::numeric_limits<double>::max()) - kLog2eSq) < 1e-9);
  // small-gamma expansion 2 gamma (log2 e)^2
  CHECK(test::rel_diff(dispersion_v(1e-12), 2e-12 * kLog2eSq) < 1e-11);
  for (double g = 1e-6; g < 1e7; g *= 1.37) {
    CHECK(dispersion_v(g) < kLog2eSq);
  }
  for (double g = 1e7; g < 1e300; g *= 1e3) CHECK(dispersion_v(g) <= kLog2eSq);
}

TEST_CASE("Q function against high-precision values") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(test::rel_diff(q_function(1.0), 0.15865525393145705) < 1e-15);
  CHECK(test::rel_diff(q_function(5.0), 2.8665157187919391e-7) < 1e-14);
  CHECK(test::rel_diff(q_function(10.0), 7.619853024160526e-24) < 1e-13);
  CHECK(test::rel_diff(q_function(20.0), 2.7536241186062337e-89) < 1e-13);
  CHECK(test::rel_diff(q_function(30.0), 4.9067139271481871e-198) < 1e-13);
  CHECK(test::rel_diff(q_function(-2.0), 0.97724986805182079) < 1e-15);
}

TEST_CASE("instantaneous BLER reference points") {
  // C(1) = r = 1 puts the argument at exactly zero
  CHECK(inst_bler(1.0, make_fbl_params(250.0, 1.0)) == 0.5);
  CHECK(inst_success(1.0, make_fbl_params(250.0, 1.0)) == 0.5);
  CHECK(inst_bler(0.0, make_fbl_params(250.0, 1.0)) == 1.0);
  CHECK(inst_success(0.0, make_fbl_params(250.0, 1.0)) == 0.0);
  // gamma = 3, r = 1, n_D = 250: argument 11.31904606013777
  CHECK(test::rel_diff(inst_bler(3.0, make_fbl_params(250.0, 1.0)), 5.2807451250521722e-30) < 1e-11);
  CHECK(test::rel_diff(inst_bler(2.0, make_fbl_params(1000.0, 0.256)), 6.5799294421683631e-210) < 1e-11);
  CHECK(test::rel_diff(inst_bler(1.2, make_fbl_params(250.0, 1.024)), 0.081271860067520222) < 1e-8);
  CHECK(test::rel_diff(inst_success(0.5, make_fbl_params(250.0, 1.024)), 5.391283757e-11) < 1e-8);
  CHECK_THROWS_CODE(inst_bler(-0.1, make_fbl_params(250.0, 1.0)), ErrorCode::kDomain);
  CHECK_THROWS_CODE(inst_bler(NAN, make_fbl_params(250.0, 1.0)), ErrorCode::kDomain);
  CHECK_THROWS_CODE(make_fbl_params(100.0, 1.0), ErrorCode::kDomain);
  CHECK_THROWS_CODE(make_fbl_params(250.0, 0.0), ErrorCode::kDomain);
}

TEST_CASE("fbl_params from a scenario") {
  Scenario s;
  Constants c;
  const auto p = fbl_params(s, c);
  CHECK(p.n_d == 250.0);
  CHECK(p.r == 1.024);
  s.K = 6;
  s.n_e = 600;
  CHECK(fbl_params(s, c).n_d == 150.0);
  s.n_e = 1000;
  CHECK_THROWS_CODE(fbl_params(s, c), ErrorCode::kDomain);
}

TEST_CASE("BLER is non-increasing in gamma") {
  long long violations = 0;
  long long success_violations = 0;
  for (double n_d : {101.0, 150.0, 250.0, 1000.0, 5900.0}) {
    for (double r : {0.05, 0.256, 1.024, 2.0, 8.0}) {
      const auto p = make_fbl_params(n_d, r);
      double prev = inst_bler(1e-3, p);
      double prev_s = inst_success(1e-3, p);
      for (int i = 1; i <= 60000; ++i) {
        const double g = 1e-3 * std::pow(10.0, 6.0 * i / 60000.0);
        const double e = inst_bler(g, p);
        const double s = inst_success(g, p);
        if (e > prev) ++violations;
        if (s < prev_s) ++success_violations;
        prev = e;
        prev_s = s;
      }
      // adjacent doubles as well
      RngStream st(static_cast<std::uint64_t>(n_d * 1000 + r * 10));
      for (int i = 0; i < 20000; ++i) {
        const double g = std::pow(10.0, -3.0 + 6.0 * st.uniform());
        const double g2 = std::nextafter(g, INFINITY);
        if (inst_bler(g2, p) > inst_bler(g, p)) ++violations;
        if (inst_success(g2, p) < inst_success(g, p)) ++success_violations;
      }
    }
  }
  CHECK(violations == 0);
  CHECK(success_violations == 0);
}

TEST_CASE("BLER and success are complementary") {
  const auto p = make_fbl_params(250.0, 1.024);
  for (double g = 0.01; g < 10.0; g *= 1.1) {
    CHECK(std::abs(inst_bler(g, p) + inst_success(g, p) - 1.0) < 1e-15);
  }
}

TEST_CASE("end-to-end BLER") {
  const std::vector<double> zeros{0, 0, 0};
  CHECK(e2e_bler(zeros) == 0.0);
  const std::vector<double> dead{0.1, 1.0, 0.3};
  CHECK(e2e_bler(dead) == 1.0);
  const std::vector<double> two{0.1, 0.2};
  CHECK(e2e_bler(two) == doctest::Approx(0.28).epsilon(1e-15));
  const std::vector<double> tiny{1e-30, 2e-30};
  CHECK(test::rel_diff(e2e_bler(tiny), 3e-30) < 1e-15);
  const std::vector<double> bad{0.1, 1.2};
  CHECK_THROWS_CODE(e2e_bler(bad), ErrorCode::kDomain);

  RngStream st(12);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> eps(1 + i % 6);
    double mx = 0.0;
    double sum = 0.0;
    for (auto& e : eps) {
      e = std::pow(st.uniform(), 4.0);
      mx = std::max(mx, e);
      sum += e;
    }
    const double e2e = e2e_bler(eps);
    CHECK(e2e >= mx);
    CHECK(e2e <= sum + 1e-15);
  }
}

TEST_CASE("throughput") {
  Scenario s;
  Constants c;
  CHECK(throughput(0.0, s, c) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(throughput(1.0, s, c) == 0.0);
  s.K = 1;
  s.r_th = 2.0;
  CHECK(throughput(0.5, s, c) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const double cap = s.r_th * (c.m - s.n_e) / (static_cast<double>(c.m) * s.K);
  for (double e = 1e-9; e < 1.0; e *= 3.0) CHECK(throughput(e, s, c) < cap);
  CHECK(throughput(0.0, s, c) == cap);
}

TEST_CASE("reliability and latency") {
  Scenario s;
  Constants c;
  auto rl = reliability_latency(0.0, s, c);
  CHECK(rl.reliability == 100.0);
  CHECK(rl.latency == doctest::Approx(3e-3).epsilon(1e-15));
  CHECK(reliability_latency(0.01, s, c).reliability == doctest::Approx(99.0).epsilon(1e-15));
  c.m = 5500;
  rl = reliability_latency(0.5, s, c);
  CHECK(rl.reliability == 50.0);
  CHECK(rl.latency == doctest::Approx(30e-3).epsilon(1e-15));
  CHECK_THROWS_CODE(reliability_latency(1.0, s, c), ErrorCode::kUndefined);
}

TEST_CASE("derived metrics are consistent") {
  Scenario s;
  s.K = 3;
  Constants c;
  RngStream st(2);
  for (int i = 0; i < 10000; ++i) {
    PerfEstimate est;
    est.per_hop_bler = {st.uniform(), std::pow(st.uniform(), 8.0), 1e-6 * st.uniform()};
    derive_metrics(est, s, c);
    const double e2e = 1.0 - (1.0 - est.per_hop_bler[0]) * (1.0 - est.per_hop_bler[1]) *
                                 (1.0 - est.per_hop_bler[2]);
    CHECK(std::abs(est.e2e_bler - e2e) <= 1e-12);
    CHECK(std::abs(est.reliability + 100.0 * est.e2e_bler - 100.0) <= 1e-12);
    REQUIRE(est.latency.has_value());
    CHECK(std::abs(*est.latency - (c.m - s.n_e) * c.big_t / (1.0 - e2e)) <= 1e-12 * *est.latency);
  }
  PerfEstimate dead;
  dead.per_hop_bler = {1.0, 0.0, 0.0};
  derive_metrics(dead, s, c);
  CHECK(dead.reliability == 0.0);
  CHECK_FALSE(dead.latency.has_value());
}
