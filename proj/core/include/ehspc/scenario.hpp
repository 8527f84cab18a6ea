#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehspc/rng.hpp"

namespace ehspc {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

/// One network configuration: the 15 inputs of the surrogate plus node
/// counts. Powers are in dB relative to unit noise power.
struct Scenario {
  int L = 4;  // power-beacon antennas
  int K = 4;  // hops
  int M = 4;  // primary transmitters (co-located at pt_pos)
  int N = 3;  // primary receivers (co-located at pr_pos)
  Point pt_pos{19.0, 29.0};
  Point pr_pos{19.0, 19.0};
  Point pb_pos{10.0, 10.0};
  double p_pb_db = 10.0;
  double p_pt_db = 12.0;
  double i_th_db = 20.0;
  int n_e = 500;       // channel uses spent harvesting
  double r_th = 1.0;   // target rate for throughput, bits per channel use

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// System constants shared by every scenario.
struct Constants {
  double eta = 0.8;           // energy conversion efficiency
  int m = 1500;               // channel uses per block
  int b = 256;                // message size in bits
  double big_t = 3e-6;        // channel-use duration, seconds
  double sigma2 = 1.0;        // noise power, linear
  double pl_exp = 2.6;        // path-loss exponent
  double sigma_pl_db = -30.0; // attenuation at the reference distance
  double d0 = 1.0;            // reference distance, meters

  friend bool operator==(const Constants&, const Constants&) = default;
};

/// Relay chain R_0..R_K on the x-axis.
struct Geometry {
  std::vector<Point> node_pos;

  int hops() const noexcept { return static_cast<int>(node_pos.size()) - 1; }
  double hop_length(int k) const;  // k in 1..K
};

/// Throws Error(kInvalidArgument) naming the first violated invariant.
void validate(const Scenario& s);
void validate(const Constants& c);
void validate(const Scenario& s, const Constants& c);

/// 10^(x/10). Rejects non-finite input.
double db_to_linear(double x_db);

/// Length of the source-destination line; destination sits at (kChainLength, 0).
inline constexpr double kChainLength = 25.0;

/// Equally spaced chain: R_k = (25 k / K, 0).
Geometry build_geometry(const Scenario& s, const Constants& c);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Sampling box for the scenario generator. n_e is expressed in channel uses
/// and drawn on a grid of `n_e_step`.
struct ScenarioBounds {
  Range L{1, 6};
  Range K{1, 6};
  Range M{1, 6};
  Range N{1, 6};
  Range pt_x{18, 20};
  Range pt_y{28, 30};
  Range pr_x{18, 20};
  Range pr_y{18, 20};
  Range pb_x{8, 10};
  Range pb_y{8, 10};
  Range p_pb_db{0, 30};
  Range i_th_db{0, 30};
  Range p_pt_db{0, 40};
  Range n_e{100, 600};
  Range r_th{1, 2};
  int n_e_step = 100;

  /// Per-feature ranges in surrogate input order.
  std::array<Range, 15> feature_ranges() const;
  friend bool operator==(const ScenarioBounds&, const ScenarioBounds&) = default;
};

ScenarioBounds table1_bounds();
void validate(const ScenarioBounds& b);

/// Draws one scenario. Integer fields are uniform on their inclusive range,
/// continuous fields uniform on the closed interval.
Scenario sample_scenario(RngStream& stream, const ScenarioBounds& bounds);

inline constexpr std::size_t kFeatureCount = 15;
using FeatureVector = std::array<double, kFeatureCount>;

/// Column names in surrogate input order.
const std::array<std::string_view, kFeatureCount>& feature_names();

FeatureVector to_features(const Scenario& s);

/// Inverse of to_features. Integer features must be integral.
Scenario from_features(std::span<const double> x);

}  // namespace ehspc
