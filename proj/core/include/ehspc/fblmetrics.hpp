#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ehspc/scenario.hpp"

namespace ehspc {

/// Blocklength and coding rate of one hop.
struct FblParams {
  double n_d = 0.0;  // channel uses per hop
  double r = 0.0;    // bits per channel use
};

/// Rejects n_d <= 100 (outside the normal approximation's regime) or r <= 0.
FblParams make_fbl_params(double n_d, double r);

/// n_d = (m - n_e) / K and r = b / n_d.
FblParams fbl_params(const Scenario& s, const Constants& c);

/// log2(1 + gamma).
double shannon_c(double gamma);

/// (1 - 1/(1+gamma)^2) (log2 e)^2.
double dispersion_v(double gamma);

/// Gaussian tail probability through std::erfc. glibc documents erfc to a
/// few ulp over its whole range, which keeps tails near 1e-300 meaningful.
double q_function(double x) noexcept;

/// Normal-approximation block error probability at SINR gamma.
/// gamma = 0 (and any gamma whose dispersion underflows) returns 1. The
/// kernel is evaluated at gamma rounded down to 32 significant bits
/// (relative shift below 2.4e-10), which makes the computed values exactly
/// non-increasing in gamma.
double inst_bler(double gamma, const FblParams& fbl);

/// 1 - inst_bler, evaluated as the upper Gaussian tail so that success
/// probabilities far below machine epsilon survive.
double inst_success(double gamma, const FblParams& fbl);

/// 1 - prod(1 - eps_k), evaluated in the log domain. Entries must lie in
/// [0, 1].
double e2e_bler(std::span<const double> per_hop);

/// Delay-limited throughput R_th (m - n_e)(1 - eps) / (m K), in BPCU.
double throughput(double e2e, const Scenario& s, const Constants& c);

struct ReliabilityLatency {
  double reliability = 0.0;  // percent
  double latency = 0.0;      // seconds
};

/// Reliability (1 - eps) * 100 and latency (m - n_e) T / (1 - eps).
/// eps = 1 throws Error(kUndefined).
ReliabilityLatency reliability_latency(double e2e, const Scenario& s,
                                       const Constants& c);

struct PerfEstimate {
  std::vector<double> per_hop_bler;
  double e2e_bler = 0.0;
  double throughput = 0.0;
  double reliability = 0.0;
  std::optional<double> latency;  // empty when e2e_bler == 1
  std::vector<double> ci_halfwidth;  // 95% half-width per hop
  long long n_realizations = 0;
};

/// Fills the end-to-end fields of `est` from its per-hop BLERs.
void derive_metrics(PerfEstimate& est, const Scenario& s, const Constants& c);

}  // namespace ehspc
