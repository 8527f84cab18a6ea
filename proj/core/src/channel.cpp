#include "ehspc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"

namespace ehspc {
namespace {

RngStream class_stream(const RngStream& s, ChannelClass cls, int index) {
  return s.child(static_cast<std::uint64_t>(cls))
      .child(static_cast<std::uint64_t>(index));
}

void fill_row(GainMatrix& m, int row, RngStream stream, double mean) {
  for (int c = 0; c < m.cols(); ++c) m(row, c) = mean * stream.exponential();
}

}  // namespace

double GainMatrix::row_sum(int r) const noexcept {
  double acc = 0.0;
  const double* p = row(r);
  for (int c = 0; c < cols_; ++c) acc += p[c];
  return acc;
}

double GainMatrix::row_max(int r) const noexcept {
  const double* p = row(r);
  return *std::max_element(p, p + cols_);
}

void GainMatrix::resize(int rows, int cols) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
               0.0);
}

double path_loss(double d, const Constants& c) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::kDomain, "path_loss: distance must be > 0");
  }
  return db_to_linear(c.sigma_pl_db) * std::pow(d / c.d0, -c.pl_exp);
}

double draw_exponential_gain(RngStream& stream, double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorCode::kDomain, "draw_exponential_gain: mean must be > 0");
  }
  return mean * stream.exponential();
}

LinkMeans link_means(const Scenario& s, const Geometry& geo, const Constants& c) {
  if (geo.hops() != s.K) {
    throw Error(ErrorCode::kShapeMismatch,
                "geometry has " + std::to_string(geo.hops()) +
                    " hops, scenario has K=" + std::to_string(s.K));
  }
  if (s.L < 1 || s.M < 1 || s.N < 1) {
    throw Error(ErrorCode::kShapeMismatch, "L, M and N must be >= 1");
  }
  LinkMeans lm;
  lm.L = s.L;
  lm.M = s.M;
  lm.N = s.N;
  for (int k = 1; k <= s.K; ++k) {
    const Point tx = geo.node_pos[k - 1];
    lm.g.push_back(path_loss(distance(s.pb_pos, tx), c));
    lm.h.push_back(path_loss(geo.hop_length(k), c));
    lm.f.push_back(path_loss(distance(tx, s.pr_pos), c));
  }
  for (int j = 0; j <= s.K; ++j) {
    lm.v.push_back(path_loss(distance(s.pt_pos, geo.node_pos[j]), c));
  }
  return lm;
}

void draw_block_into(ChannelDraw& out, const RngStream& stream,
                     const LinkMeans& means) {
  const int K = means.hops();
  if (out.g.rows() != K || out.g.cols() != means.L) out.g.resize(K, means.L);
  if (out.v_tx.rows() != K || out.v_tx.cols() != means.M) out.v_tx.resize(K, means.M);
  if (out.v_rx.rows() != K || out.v_rx.cols() != means.M) out.v_rx.resize(K, means.M);
  if (out.f.rows() != K || out.f.cols() != means.N) out.f.resize(K, means.N);
  out.h.resize(static_cast<std::size_t>(K));

  for (int k = 0; k < K; ++k) {
    fill_row(out.g, k, class_stream(stream, ChannelClass::kBeacon, k), means.g[k]);
    RngStream hs = class_stream(stream, ChannelClass::kHop, k);
    out.h[k] = means.h[k] * hs.exponential();
    fill_row(out.f, k, class_stream(stream, ChannelClass::kPrimaryRx, k), means.f[k]);
  }
  // PT -> R_j: row j of the physical channel. R_j transmits on hop j+1 and
  // receives on hop j.
  for (int j = 0; j <= K; ++j) {
    RngStream vs = class_stream(stream, ChannelClass::kPrimaryTx, j);
    for (int m = 0; m < means.M; ++m) {
      const double gain = means.v[j] * vs.exponential();
      if (j < K) out.v_tx(j, m) = gain;
      if (j > 0) out.v_rx(j - 1, m) = gain;
    }
  }
}

ChannelDraw draw_block(const RngStream& stream, const Scenario& s,
                       const Geometry& geo, const Constants& c) {
  ChannelDraw d;
  draw_block_into(d, stream, link_means(s, geo, c));
  return d;
}

void write_draw_csv(std::ostream& out, std::uint64_t sample,
                    const ChannelDraw& draw) {
  auto emit = [&](int hop, const char* cls, int idx, double gain) {
    out << sample << ',' << hop << ',' << cls << ',' << idx << ','
        << format_double(gain) << '\n';
  };
  for (int k = 0; k < draw.hops(); ++k) {
    for (int l = 0; l < draw.g.cols(); ++l) emit(k + 1, "g", l, draw.g(k, l));
    for (int m = 0; m < draw.v_tx.cols(); ++m) emit(k + 1, "v_tx", m, draw.v_tx(k, m));
    for (int m = 0; m < draw.v_rx.cols(); ++m) emit(k + 1, "v_rx", m, draw.v_rx(k, m));
    emit(k + 1, "h", 0, draw.h[k]);
    for (int n = 0; n < draw.f.cols(); ++n) emit(k + 1, "f", n, draw.f(k, n));
  }
}

}  // namespace ehspc
