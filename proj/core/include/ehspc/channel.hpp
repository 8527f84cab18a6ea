#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ehspc/rng.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc {

/// Dense row-major matrix of linear channel power gains.
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
  double operator()(int r, int c) const noexcept { return data_[index(r, c)]; }

  const double* row(int r) const noexcept { return data_.data() + index(r, 0); }
  double row_sum(int r) const noexcept;
  double row_max(int r) const noexcept;

  const std::vector<double>& data() const noexcept { return data_; }
  void resize(int rows, int cols);

  friend bool operator==(const GainMatrix&, const GainMatrix&) = default;

 private:
  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// One coherence-block realization. Row k-1 belongs to hop k (R_{k-1} -> R_k).
struct ChannelDraw {
  GainMatrix g;           // K x L, beacon antenna l -> R_{k-1}
  GainMatrix v_tx;        // K x M, PT m -> R_{k-1} (harvesting)
  GainMatrix v_rx;        // K x M, PT m -> R_k (interference)
  std::vector<double> h;  // K, R_{k-1} -> R_k
  GainMatrix f;           // K x N, R_{k-1} -> PR n

  int hops() const noexcept { return static_cast<int>(h.size()); }

  friend bool operator==(const ChannelDraw&, const ChannelDraw&) = default;
};

/// Sub-stream indices below a realization stream.
enum class ChannelClass : std::uint64_t { kBeacon = 0, kPrimaryTx = 1, kHop = 2, kPrimaryRx = 3 };

/// sigma_PL * (d / d0)^-PL. Rejects d <= 0.
double path_loss(double d, const Constants& c);

/// Exponential variate with the given mean. Rejects mean <= 0.
double draw_exponential_gain(RngStream& stream, double mean);

/// Mean gain of every link class for one scenario.
struct LinkMeans {
  std::vector<double> g;     // per hop: beacon -> R_{k-1}
  std::vector<double> v;     // per node R_0..R_K: PT -> R_j
  std::vector<double> h;     // per hop
  std::vector<double> f;     // per hop: R_{k-1} -> PR
  int L = 0;
  int M = 0;
  int N = 0;

  int hops() const noexcept { return static_cast<int>(h.size()); }
};

LinkMeans link_means(const Scenario& s, const Geometry& geo, const Constants& c);

/// Fills `out` from `stream` (one realization). The PT -> R_j gains are drawn
/// once per node and appear as v_rx row j-1 and v_tx row j.
void draw_block_into(ChannelDraw& out, const RngStream& stream,
                     const LinkMeans& means);

ChannelDraw draw_block(const RngStream& stream, const Scenario& s,
                       const Geometry& geo, const Constants& c);

/// Realization stream for Monte-Carlo sample `index` under `seed`.
inline RngStream realization_stream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(seed).child(index);
}

/// CSV rows `sample,hop,class,index,gain` for debugging dumps.
void write_draw_csv(std::ostream& out, std::uint64_t sample,
                    const ChannelDraw& draw);

}  // namespace ehspc
