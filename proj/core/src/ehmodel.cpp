#include "ehspc/ehmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "ehspc/error.hpp"

namespace ehspc {

std::string_view to_string(EhScheme s) noexcept {
  switch (s) {
    case EhScheme::kPT: return "PT";
    case EhScheme::kMax: return "Max";
    case EhScheme::kSum: return "Sum";
  }
  return "?";
}

EhScheme parse_scheme(std::string_view text) {
  std::string lower;
  for (char ch : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "pt") return EhScheme::kPT;
  if (lower == "max") return EhScheme::kMax;
  if (lower == "sum") return EhScheme::kSum;
  throw Error(ErrorCode::kParse,
              "unknown EH scheme '" + std::string(text) + "' (PT, Max, Sum)");
}

LinearPowers linear_powers(const Scenario& s) {
  return {db_to_linear(s.p_pb_db), db_to_linear(s.p_pt_db),
          db_to_linear(s.i_th_db)};
}

double kappa(const Scenario& s, const Constants& c) {
  if (s.n_e >= c.m) {
    throw Error(ErrorCode::kDomain, "kappa: n_e must be < m");
  }
  return static_cast<double>(s.K) * c.eta * s.n_e /
         static_cast<double>(c.m - s.n_e);
}

double harvested_power(EhScheme scheme, int k, const ChannelDraw& draw,
                       double p_pb, double p_pt, double kappa) {
  if (k < 1 || k > draw.hops()) {
    throw Error(ErrorCode::kInvalidArgument, "harvested_power: hop index out of range");
  }
  if (p_pb < 0.0 || p_pt < 0.0 || kappa < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "harvested_power: negative power");
  }
  const double from_pt = p_pt * draw.v_tx.row_sum(k - 1);
  switch (scheme) {
    case EhScheme::kPT:
      return kappa * from_pt;
    case EhScheme::kMax:
      return kappa * std::max(p_pb * draw.g.row_sum(k - 1), from_pt);
    case EhScheme::kSum:
      return kappa * (p_pb * draw.g.row_sum(k - 1) + from_pt);
  }
  return 0.0;
}

double cap_power(double uncapped, double i_th, std::span<const double> f_row) {
  if (f_row.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cap_power: empty f_row");
  }
  if (!(i_th > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cap_power: i_th must be > 0");
  }
  const double worst = *std::max_element(f_row.begin(), f_row.end());
  if (worst <= 0.0 || std::isinf(i_th)) return uncapped;
  return std::min(uncapped, i_th / worst);
}

double hop_sinr(double capped_power, double h_gain, double interference,
                double sigma2) {
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "hop_sinr: sigma2 must be > 0");
  }
  if (interference <= 0.0) {
    if (h_gain == 0.0 || capped_power == 0.0) {
      throw Error(ErrorCode::kUndefined,
                  "hop_sinr: zero signal over zero interference is indeterminate");
    }
    throw Error(ErrorCode::kUndefined,
                "hop_sinr: zero interference; SINR undefined (need M >= 1)");
  }
  return (capped_power / sigma2) * h_gain / interference;
}

HopPower hop_power(EhScheme scheme, int k, const ChannelDraw& draw,
                   const LinearPowers& p, double kappa) {
  HopPower hp;
  hp.kappa = kappa;
  hp.uncapped = harvested_power(scheme, k, draw, p.p_pb, p.p_pt, kappa);
  hp.capped = cap_power(hp.uncapped, p.i_th,
                        std::span<const double>(draw.f.row(k - 1),
                                                static_cast<std::size_t>(draw.f.cols())));
  return hp;
}

void hop_sinrs(EhScheme scheme, const ChannelDraw& draw, const LinearPowers& p,
               double kappa, double sigma2, std::span<double> out) {
  const int K = draw.hops();
  if (out.size() != static_cast<std::size_t>(K)) {
    throw Error(ErrorCode::kShapeMismatch, "hop_sinrs: output size != K");
  }
  for (int k = 1; k <= K; ++k) {
    const HopPower hp = hop_power(scheme, k, draw, p, kappa);
    out[k - 1] = hop_sinr(hp.capped, draw.h[k - 1],
                          p.p_pt * draw.v_rx.row_sum(k - 1), sigma2);
  }
}

}  // namespace ehspc
