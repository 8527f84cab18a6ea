#pragma once

#include <span>
#include <string_view>

#include "ehspc/channel.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc {

/// Where a transmitting node draws its energy from.
enum class EhScheme {
  kPT,   // primary transmitters only
  kMax,  // the larger of beacon and PT energy
  kSum,  // both combined
};

std::string_view to_string(EhScheme s) noexcept;
/// Accepts "PT", "Max", "Sum" (case-insensitive).
EhScheme parse_scheme(std::string_view text);

struct HopPower {
  double uncapped = 0.0;
  double capped = 0.0;
  double kappa = 0.0;
};

/// Linear-scale powers of one scenario.
struct LinearPowers {
  double p_pb = 0.0;
  double p_pt = 0.0;
  double i_th = 0.0;
};

LinearPowers linear_powers(const Scenario& s);

/// K * eta * n_e / (m - n_e): converts harvested energy to transmit power
/// over the per-hop information phase.
double kappa(const Scenario& s, const Constants& c);

/// Transmit power of R_{k-1} before the interference cap; k in 1..K.
/// The beacon uses maximal-ratio transmission, so its delivered power is
/// P_PB times the summed antenna gains.
double harvested_power(EhScheme scheme, int k, const ChannelDraw& draw,
                       double p_pb, double p_pt, double kappa);

/// min(uncapped, i_th / max_n f_n). An all-zero f_row leaves power uncapped;
/// i_th may be +inf.
double cap_power(double uncapped, double i_th, std::span<const double> f_row);

/// (P / sigma2) * h / interference, with interference = P_PT * sum v_rx.
double hop_sinr(double capped_power, double h_gain, double interference,
                double sigma2);

HopPower hop_power(EhScheme scheme, int k, const ChannelDraw& draw,
                   const LinearPowers& p, double kappa);

/// SINR of every hop of one draw, written to `out` (size K).
void hop_sinrs(EhScheme scheme, const ChannelDraw& draw, const LinearPowers& p,
               double kappa, double sigma2, std::span<double> out);

}  // namespace ehspc
