// Deterministic quadrature for the single-hop expected BLER.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ehspc/channel.hpp"
#include "ehspc/error.hpp"
#include "ehspc/montecarlo.hpp"

namespace ehspc {
namespace {

// Law of an aggregated gain: a sum of `count` i.i.d. exponentials (Erlang)
// or the maximum of `count` of them.
struct GainLaw {
  enum class Kind { kErlang, kMaxExp };
  Kind kind = Kind::kErlang;
  int count = 1;
  double mean = 1.0;  // per-element mean
  bool point_mass = false;

  double fixed_value() const { return kind == Kind::kErlang ? count * mean : mean; }

  double pdf(double x) const {
    const double z = x / mean;
    if (kind == Kind::kErlang) return boost::math::gamma_p_derivative(count, z) / mean;
    return count * std::pow(-std::expm1(-z), count - 1) * std::exp(-z) / mean;
  }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    const double z = x / mean;
    if (kind == Kind::kErlang) return boost::math::gamma_p(count, z);
    return std::pow(-std::expm1(-z), count);
  }

  double ccdf(double x) const {
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    const double z = x / mean;
    if (kind == Kind::kErlang) return boost::math::gamma_q(count, z);
    return -std::expm1(count * std::log1p(-std::exp(-z)));
  }

  double lower_quantile(double t) const {
    if (kind == Kind::kErlang) return mean * boost::math::gamma_p_inv(count, t);
    return -mean * std::log1p(-std::pow(t, 1.0 / count));
  }

  double upper_quantile(double t) const {
    if (kind == Kind::kErlang) return mean * boost::math::gamma_q_inv(count, t);
    return -mean * std::log(-std::expm1(std::log1p(-t) / count));
  }
};

enum Level { kLevelG, kLevelVtx, kLevelF, kLevelZ, kLevelCount };

// Nodes of a composite rule over u in [-kULimit, kULimit]; gamma(u) solved once.
struct UTable {
  std::vector<double> gamma;
  std::vector<double> weight;  // rule weight times phi(u)
};

constexpr double kULimit = 12.0;  // 2 Q(12) < 1e-32
constexpr int kUPanels = 4;

double fbl_argument(double gamma, const FblParams& fbl) {
  const double v = dispersion_v(gamma);
  if (!(v > 0.0)) return -HUGE_VAL;
  return (shannon_c(gamma) - fbl.r) * std::sqrt(fbl.n_d / v);
}

double solve_gamma(double u, const FblParams& fbl) {
  double lo = -700.0;
  double hi = 700.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (fbl_argument(std::exp(mid), fbl) < u ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

template <class Abscissa, class Weights>
UTable make_table(const Abscissa& x, const Weights& w, const FblParams& fbl) {
  UTable t;
  const double width = 2.0 * kULimit / kUPanels;
  for (int p = 0; p < kUPanels; ++p) {
    const double mid = -kULimit + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        if (x[i] == 0.0 && sign < 0.0) continue;
        const double u = mid + sign * half * x[i];
        const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
        t.gamma.push_back(solve_gamma(u, fbl));
        t.weight.push_back(half * w[i] * phi);
      }
    }
  }
  return t;
}

struct Context {
  const OracleOptions& opt;
  FblParams fbl;
  LinearPowers powers;
  double kap = 0.0;
  double sigma2 = 1.0;
  GainLaw g, v_tx, f, v_rx, h;
  UTable kronrod, gauss;
  double level_error[kLevelCount] = {};
  long long evaluations = 0;
};

// P(Z <= z) for Z = h / v_rx.
double z_cdf(double z, const Context& ctx) {
  if (z <= 0.0) return 0.0;
  if (!std::isfinite(z)) return 1.0;
  const GainLaw& h = ctx.h;
  const GainLaw& v = ctx.v_rx;
  if (h.point_mass && v.point_mass) return z >= h.fixed_value() / v.fixed_value() ? 1.0 : 0.0;
  if (h.point_mass) return v.ccdf(h.fixed_value() / z);
  if (v.point_mass) return -std::expm1(-z * v.fixed_value() / h.mean);
  // E over v of P(h <= z v) = 1 - E exp(-z v / mean_h) = 1 - (1 + z mean_v / mean_h)^-M.
  return -std::expm1(-v.count * std::log1p(z * v.mean / h.mean));
}

double table_sum(const UTable& t, double c, const Context& ctx) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.gamma.size(); ++i) acc += t.weight[i] * z_cdf(t.gamma[i] / c, ctx);
  return acc;
}

// E over (v_rx, h) of the BLER at a given transmit power.
double bler_given_power(double power, Context& ctx) {
  ++ctx.evaluations;
  if (!(power > 0.0)) return 1.0;
  const double c = power / (ctx.sigma2 * ctx.powers.p_pt);
  if (ctx.h.point_mass && ctx.v_rx.point_mass) {
    return inst_bler(c * ctx.h.fixed_value() / ctx.v_rx.fixed_value(), ctx.fbl);
  }
  const double k = table_sum(ctx.kronrod, c, ctx);
  const double gs = table_sum(ctx.gauss, c, ctx);
  ctx.level_error[kLevelZ] = std::max(ctx.level_error[kLevelZ], std::abs(k - gs));
  return k;
}

// Integrates phi(x) against `law` in log space over [x_lo, x_hi].
template <class Phi>
double integrate_law(const GainLaw& law, Phi&& phi, Context& ctx, Level level,
                     double x_lo, double x_hi) {
  if (law.point_mass) return phi(law.fixed_value());
  if (!(x_hi > x_lo)) return 0.0;
  auto integrand = [&](double s) {
    const double x = std::exp(s);
    return phi(x) * law.pdf(x) * x;
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, std::log(x_lo), std::log(x_hi), 15, ctx.opt.rel_tolerance, &err);
  ctx.level_error[level] = std::max(ctx.level_error[level], err);
  return value;
}

template <class Phi>
double integrate_law(const GainLaw& law, Phi&& phi, Context& ctx, Level level) {
  if (law.point_mass) return phi(law.fixed_value());
  const double t = ctx.opt.tail_mass;
  return integrate_law(law, phi, ctx, level, law.lower_quantile(t), law.upper_quantile(t));
}

// E over the worst PR gain. The cap is slack for f below i_th / uncapped, so
// that part collapses to CDF(f*) times one inner expectation.
double bler_given_uncapped(double uncapped, Context& ctx) {
  const double i_th = ctx.opt.disable_cap ? HUGE_VAL : ctx.powers.i_th;
  if (std::isinf(i_th) || uncapped <= 0.0) return bler_given_power(uncapped, ctx);
  if (ctx.f.point_mass) {
    return bler_given_power(std::min(uncapped, i_th / ctx.f.fixed_value()), ctx);
  }
  const double f_star = i_th / uncapped;
  const double f_hi = ctx.f.upper_quantile(ctx.opt.tail_mass);
  const double slack_mass = ctx.f.cdf(f_star);
  double value = slack_mass > 0.0 ? slack_mass * bler_given_power(uncapped, ctx) : 0.0;
  if (f_star < f_hi) {
    const double f_lo = std::max(f_star, ctx.f.lower_quantile(ctx.opt.tail_mass));
    value += integrate_law(ctx.f, [&](double f) {
      return bler_given_power(i_th / f, ctx);
    }, ctx, kLevelF, f_lo, f_hi);
  }
  return value;
}

}  // namespace

OracleResult single_hop_oracle(const Scenario& s, const Constants& c,
                               EhScheme scheme, const OracleOptions& opt) {
  validate(s, c);
  if (s.K != 1) {
    throw Error(ErrorCode::kInvalidArgument, "single_hop_oracle requires K = 1");
  }
  if (!(opt.tail_mass > 0.0 && opt.tail_mass < 1e-3) || !(opt.rel_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "single_hop_oracle: bad options");
  }

  const Geometry geo = build_geometry(s, c);
  const LinkMeans means = link_means(s, geo, c);
  const FblParams fbl = fbl_params(s, c);
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 61>;
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  Context ctx{opt, fbl, linear_powers(s), kappa(s, c), c.sigma2,
              {GainLaw::Kind::kErlang, s.L, means.g[0], opt.point_mass.g},
              {GainLaw::Kind::kErlang, s.M, means.v[0], opt.point_mass.v_tx},
              {GainLaw::Kind::kMaxExp, s.N, means.f[0], opt.point_mass.f},
              {GainLaw::Kind::kErlang, s.M, means.v[1], opt.point_mass.v_rx},
              {GainLaw::Kind::kErlang, 1, means.h[0], opt.point_mass.h},
              make_table(Kronrod::abscissa(), Kronrod::weights(), fbl),
              make_table(Gauss::abscissa(), Gauss::weights(), fbl)};

  const bool uses_beacon = scheme != EhScheme::kPT;
  int dims = 0;
  if (uses_beacon && !ctx.g.point_mass) ++dims;
  if (!ctx.v_tx.point_mass) ++dims;
  if (!opt.disable_cap && !ctx.f.point_mass) ++dims;
  if (!ctx.v_rx.point_mass) ++dims;
  if (!ctx.h.point_mass) ++dims;

  auto over_vtx = [&](double g_sum) {
    return integrate_law(ctx.v_tx, [&](double vtx) {
      const double from_pb = ctx.powers.p_pb * g_sum;
      const double from_pt = ctx.powers.p_pt * vtx;
      double uncapped = 0.0;
      switch (scheme) {
        case EhScheme::kPT: uncapped = from_pt; break;
        case EhScheme::kMax: uncapped = std::max(from_pb, from_pt); break;
        case EhScheme::kSum: uncapped = from_pb + from_pt; break;
      }
      return bler_given_uncapped(ctx.kap * uncapped, ctx);
    }, ctx, kLevelVtx);
  };

  OracleResult res;
  res.value = uses_beacon ? integrate_law(ctx.g, over_vtx, ctx, kLevelG) : over_vtx(0.0);
  res.value = std::clamp(res.value, 0.0, 1.0);
  res.dimensions = dims;
  res.evaluations = ctx.evaluations;
  double quad_error = 0.0;
  for (double e : ctx.level_error) quad_error += e;
  const int outer = (uses_beacon && !ctx.g.point_mass) + !ctx.v_tx.point_mass +
                    (!opt.disable_cap && !ctx.f.point_mass);
  res.error_bound = quad_error + 2.0 * opt.tail_mass * outer;
  return res;
}

}  // namespace ehspc
