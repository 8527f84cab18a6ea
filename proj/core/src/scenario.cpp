#include "ehspc/scenario.hpp"

#include <cmath>
#include <string>

#include "ehspc/error.hpp"

namespace ehspc {
namespace {

[[noreturn]] void reject(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) reject(std::string(name) + " must be finite");
}

void require_finite(Point p, const char* name) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    reject(std::string(name) + " must have finite coordinates");
  }
}

void require_range(Range r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    reject(std::string("bounds for ") + name + " are not well-ordered");
  }
}

void require_integer_range(Range r, const char* name, double min_lo) {
  require_range(r, name);
  if (r.lo != std::floor(r.lo) || r.hi != std::floor(r.hi) || r.lo < min_lo) {
    reject(std::string("bounds for ") + name + " must be integers >= " +
           std::to_string(static_cast<int>(min_lo)));
  }
}

double uniform_on(RngStream& s, Range r) {
  if (r.lo == r.hi) return r.lo;
  // Closed interval: a 53-bit grid that includes both endpoints.
  const double u = static_cast<double>(s() >> 11) / 0x1.fffffffffffffp52;
  return r.lo + (r.hi - r.lo) * u;
}

int uniform_int_on(RngStream& s, Range r) {
  return static_cast<int>(s.uniform_int(static_cast<std::int64_t>(r.lo),
                                        static_cast<std::int64_t>(r.hi)));
}

}  // namespace

double distance(Point a, Point b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double Geometry::hop_length(int k) const {
  if (k < 1 || k > hops()) reject("hop index out of range");
  return distance(node_pos[k - 1], node_pos[k]);
}

void validate(const Scenario& s) {
  if (s.L < 1) reject("L must be >= 1");
  if (s.K < 1) reject("K must be >= 1");
  if (s.M < 1) reject("M must be >= 1");
  if (s.N < 1) reject("N must be >= 1");
  require_finite(s.pt_pos, "pt_pos");
  require_finite(s.pr_pos, "pr_pos");
  require_finite(s.pb_pos, "pb_pos");
  require_finite(s.p_pb_db, "p_pb_db");
  require_finite(s.p_pt_db, "p_pt_db");
  require_finite(s.i_th_db, "i_th_db");
  if (s.n_e <= 0) reject("n_e must be > 0");
  if (!(s.r_th > 0.0) || !std::isfinite(s.r_th)) reject("r_th must be > 0");
}

void validate(const Constants& c) {
  if (!(c.eta > 0.0 && c.eta <= 1.0)) reject("eta must lie in (0, 1]");
  if (c.m < 2) reject("m must be >= 2");
  if (c.b < 1) reject("b must be >= 1");
  if (!(c.big_t > 0.0) || !std::isfinite(c.big_t)) reject("big_t must be > 0");
  if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2)) reject("sigma2 must be > 0");
  if (!(c.d0 > 0.0) || !std::isfinite(c.d0)) reject("d0 must be > 0");
  require_finite(c.pl_exp, "pl_exp");
  require_finite(c.sigma_pl_db, "sigma_pl_db");
}

void validate(const Scenario& s, const Constants& c) {
  validate(s);
  validate(c);
  if (s.n_e >= c.m) reject("n_e must be < m");
}

double db_to_linear(double x_db) {
  if (!std::isfinite(x_db)) {
    throw Error(ErrorCode::kDomain, "db_to_linear: input must be finite");
  }
  return std::pow(10.0, x_db / 10.0);
}

Geometry build_geometry(const Scenario& s, const Constants& /*c*/) {
  if (s.K < 1) reject("build_geometry: K must be >= 1");
  Geometry g;
  g.node_pos.reserve(static_cast<std::size_t>(s.K) + 1);
  for (int k = 0; k <= s.K; ++k) {
    g.node_pos.push_back({kChainLength * k / s.K, 0.0});
  }
  return g;
}

std::array<Range, 15> ScenarioBounds::feature_ranges() const {
  return {L, K, M, N, pt_x, pt_y, pr_x, pr_y, pb_x, pb_y,
          p_pb_db, i_th_db, p_pt_db, n_e, r_th};
}

ScenarioBounds table1_bounds() { return ScenarioBounds{}; }

void validate(const ScenarioBounds& b) {
  require_integer_range(b.L, "L", 1);
  require_integer_range(b.K, "K", 1);
  require_integer_range(b.M, "M", 1);
  require_integer_range(b.N, "N", 1);
  require_range(b.pt_x, "x_PT");
  require_range(b.pt_y, "y_PT");
  require_range(b.pr_x, "x_PR");
  require_range(b.pr_y, "y_PR");
  require_range(b.pb_x, "x_PB");
  require_range(b.pb_y, "y_PB");
  require_range(b.p_pb_db, "P_PB");
  require_range(b.i_th_db, "I_th");
  require_range(b.p_pt_db, "P_PT");
  require_range(b.r_th, "R_th");
  if (b.r_th.lo <= 0.0) reject("bounds for R_th must be positive");
  if (b.n_e_step < 1) reject("n_e_step must be >= 1");
  require_integer_range(b.n_e, "n_E", 1);
  const auto step = static_cast<long>(b.n_e_step);
  if (static_cast<long>(b.n_e.lo) % step != 0 ||
      static_cast<long>(b.n_e.hi) % step != 0) {
    reject("bounds for n_E must be multiples of n_e_step");
  }
}

Scenario sample_scenario(RngStream& stream, const ScenarioBounds& bounds) {
  validate(bounds);
  Scenario s;
  s.L = uniform_int_on(stream, bounds.L);
  s.K = uniform_int_on(stream, bounds.K);
  s.M = uniform_int_on(stream, bounds.M);
  s.N = uniform_int_on(stream, bounds.N);
  s.pt_pos = {uniform_on(stream, bounds.pt_x), uniform_on(stream, bounds.pt_y)};
  s.pr_pos = {uniform_on(stream, bounds.pr_x), uniform_on(stream, bounds.pr_y)};
  s.pb_pos = {uniform_on(stream, bounds.pb_x), uniform_on(stream, bounds.pb_y)};
  s.p_pb_db = uniform_on(stream, bounds.p_pb_db);
  s.i_th_db = uniform_on(stream, bounds.i_th_db);
  s.p_pt_db = uniform_on(stream, bounds.p_pt_db);
  const Range units{bounds.n_e.lo / bounds.n_e_step,
                    bounds.n_e.hi / bounds.n_e_step};
  s.n_e = uniform_int_on(stream, units) * bounds.n_e_step;
  s.r_th = uniform_on(stream, bounds.r_th);
  return s;
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "L",    "K",    "M",    "N",    "x_PT", "y_PT", "x_PR", "y_PR",
      "x_PB", "y_PB", "P_PB", "I_th", "P_PT", "n_E",  "R_th"};
  return names;
}

FeatureVector to_features(const Scenario& s) {
  return {static_cast<double>(s.L), static_cast<double>(s.K),
          static_cast<double>(s.M), static_cast<double>(s.N),
          s.pt_pos.x, s.pt_pos.y, s.pr_pos.x, s.pr_pos.y,
          s.pb_pos.x, s.pb_pos.y, s.p_pb_db, s.i_th_db,
          s.p_pt_db, static_cast<double>(s.n_e), s.r_th};
}

Scenario from_features(std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature vector must have 15 entries, got " +
                    std::to_string(x.size()));
  }
  auto as_int = [&](std::size_t i) {
    if (!std::isfinite(x[i]) || x[i] != std::round(x[i])) {
      reject("feature " + std::string(feature_names()[i]) +
             " must be an integer");
    }
    return static_cast<int>(x[i]);
  };
  Scenario s;
  s.L = as_int(0);
  s.K = as_int(1);
  s.M = as_int(2);
  s.N = as_int(3);
  s.pt_pos = {x[4], x[5]};
  s.pr_pos = {x[6], x[7]};
  s.pb_pos = {x[8], x[9]};
  s.p_pb_db = x[10];
  s.i_th_db = x[11];
  s.p_pt_db = x[12];
  s.n_e = as_int(13);
  s.r_th = x[14];
  return s;
}

}  // namespace ehspc
