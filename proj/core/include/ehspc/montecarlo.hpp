#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehspc/ehmodel.hpp"
#include "ehspc/fblmetrics.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc {

struct McConfig {
  long long n_realizations = 10'000;
  std::uint64_t seed = 1;
  EhScheme scheme = EhScheme::kSum;
  bool crn = true;  // compared configurations share realization streams
};

/// Realizations per aggregation block. Block partial sums are combined in
/// block order, so results do not depend on how blocks map to threads.
inline constexpr long long kMcBlockSize = 4096;

/// Per-hop BLER averaged over channel realizations, then the end-to-end
/// metrics. Realization i uses realization_stream(mc.seed, i).
PerfEstimate estimate(const Scenario& s, const Constants& c, const McConfig& mc,
                      int workers = 1);

/// Options for the deterministic quadrature oracle.
struct OracleOptions {
  double rel_tolerance = 1e-9;  // per-level Gauss-Kronrod tolerance
  double tail_mass = 1e-13;     // probability cut from each end of every outer variable
  bool disable_cap = false;      // treat I_th as +inf
  /// Replace a gain class by its mean (no fading) instead of integrating it.
  struct {
    bool g = false;
    bool v_tx = false;
    bool h = false;
    bool v_rx = false;
    bool f = false;
  } point_mass;
};

struct OracleResult {
  double value = 0.0;
  double error_bound = 0.0;  // truncated mass plus quadrature error estimates
  int dimensions = 0;
  long long evaluations = 0;
};

/// E{inst_bler} for a single hop by nested Gauss-Kronrod quadrature.
///
/// Requires K = 1. Sums of i.i.d. exponentials enter through their Erlang
/// law and the worst PR gain through the law of the maximum. The receive
/// side only matters through Z = h / v_rx, whose CDF is closed form, and
///   E{Q(u(c Z))} = integral of phi(u) P(Z <= gamma(u) / c) du
/// with u(gamma) the (increasing) normal-approximation argument, so the
/// innermost level is a fixed Gauss-Kronrod table in u. The outer variables
/// (g, v_tx, f) are integrated in log space between their tail_mass and
/// 1 - tail_mass quantiles.
OracleResult single_hop_oracle(const Scenario& s, const Constants& c,
                               EhScheme scheme, const OracleOptions& opt = {});

struct SweepPoint {
  std::string axis_value;
  Scenario scenario;
  Constants constants;
  McConfig mc;
  PerfEstimate estimate;
  double wall_seconds = 0.0;
};

/// Names accepted as sweep axes: every config key plus "scheme".
bool is_sweep_axis(std::string_view axis);

/// One estimate per grid value. With mc.crn every point reuses mc.seed;
/// otherwise point i runs under a seed derived from (mc.seed, i).
std::vector<SweepPoint> sweep(std::string_view axis,
                              std::span<const std::string> grid,
                              const Scenario& base, const Constants& c,
                              const McConfig& mc, int workers = 1);

/// "start:stop:step" (stop included when reached within 1e-9 steps) or a
/// comma-separated list.
std::vector<std::string> parse_grid(std::string_view text);

/// CSV schema shared by simulate and sweep. Per-hop lists are `;`-joined and
/// an undefined latency is written as `nan`.
void write_estimate_header(std::ostream& out, std::string_view axis);
void write_estimate_row(std::ostream& out, std::string_view axis_value,
                        EhScheme scheme, const PerfEstimate& est);

}  // namespace ehspc
