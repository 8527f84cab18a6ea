#include "ehspc/fblmetrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "ehspc/error.hpp"

namespace ehspc {
namespace {

constexpr double kLog2E = std::numbers::log2e;

void require_gamma(double gamma, const char* who) {
  if (!(gamma >= 0.0)) {
    throw Error(ErrorCode::kDomain, std::string(who) + ": gamma must be >= 0");
  }
}

void require_probability(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomain,
                std::string(who) + ": probability outside [0, 1]");
  }
}

// gamma truncated to 32 significant bits
double kernel_grid(double gamma) {
  constexpr std::uint64_t kMask = ~((std::uint64_t{1} << 20) - 1);
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(gamma) & kMask);
}

double kernel_argument(double gamma, const FblParams& fbl) {
  const double g = kernel_grid(gamma);
  const double v = dispersion_v(g);
  if (v <= 0.0) return -HUGE_VAL;
  return (shannon_c(g) - fbl.r) * std::sqrt(fbl.n_d / v);
}

}  // namespace

FblParams make_fbl_params(double n_d, double r) {
  if (!(n_d > 100.0) || !std::isfinite(n_d)) {
    throw Error(ErrorCode::kDomain,
                "blocklength n_d = " + std::to_string(n_d) +
                    " must exceed 100 channel uses");
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::kDomain, "rate must be > 0");
  }
  return {n_d, r};
}

FblParams fbl_params(const Scenario& s, const Constants& c) {
  const double n_d = static_cast<double>(c.m - s.n_e) / s.K;
  return make_fbl_params(n_d, c.b / n_d);
}

double shannon_c(double gamma) {
  require_gamma(gamma, "shannon_c");
  return std::log1p(gamma) * kLog2E;
}

double dispersion_v(double gamma) {
  require_gamma(gamma, "dispersion_v");
  const double t = 1.0 / (1.0 + gamma);
  // gamma (2 + gamma) t^2 keeps full precision near zero.
  const double frac = gamma < 1.0 ? gamma * (2.0 + gamma) * t * t : 1.0 - t * t;
  return frac * kLog2E * kLog2E;
}

double q_function(double x) noexcept {
  return 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5);
}

double inst_bler(double gamma, const FblParams& fbl) {
  require_gamma(gamma, "inst_bler");
  return std::clamp(q_function(kernel_argument(gamma, fbl)), 0.0, 1.0);
}

double inst_success(double gamma, const FblParams& fbl) {
  require_gamma(gamma, "inst_success");
  return std::clamp(q_function(-kernel_argument(gamma, fbl)), 0.0, 1.0);
}

double e2e_bler(std::span<const double> per_hop) {
  double log_survive = 0.0;
  double largest = 0.0;
  double total = 0.0;
  for (double eps : per_hop) {
    require_probability(eps, "e2e_bler");
    log_survive += std::log1p(-eps);
    largest = std::max(largest, eps);
    total += eps;
  }
  // log-domain product, clamped to max_k eps_k <= e2e <= sum_k eps_k
  return std::clamp(-std::expm1(log_survive), largest, std::min(1.0, total));
}

double throughput(double e2e, const Scenario& s, const Constants& c) {
  require_probability(e2e, "throughput");
  return s.r_th * static_cast<double>(c.m - s.n_e) * (1.0 - e2e) /
         (static_cast<double>(c.m) * s.K);
}

ReliabilityLatency reliability_latency(double e2e, const Scenario& s,
                                       const Constants& c) {
  require_probability(e2e, "reliability_latency");
  if (e2e == 1.0) {
    throw Error(ErrorCode::kUndefined,
                "latency is undefined when every block is lost (BLER = 1)");
  }
  return {(1.0 - e2e) * 100.0,
          static_cast<double>(c.m - s.n_e) * c.big_t / (1.0 - e2e)};
}

void derive_metrics(PerfEstimate& est, const Scenario& s, const Constants& c) {
  est.e2e_bler = e2e_bler(est.per_hop_bler);
  est.throughput = throughput(est.e2e_bler, s, c);
  est.reliability = (1.0 - est.e2e_bler) * 100.0;
  if (est.e2e_bler < 1.0) {
    est.latency = reliability_latency(est.e2e_bler, s, c).latency;
  } else {
    est.latency.reset();
  }
}

}  // namespace ehspc
