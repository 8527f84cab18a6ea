#include "ehspc/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "ehspc/channel.hpp"
#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"
#include "ehspc/parallel.hpp"

namespace ehspc {
namespace {

struct Welford {
  double mean = 0.0;
  double m2 = 0.0;
  long long n = 0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
};

struct HopAccumulator {
  double sum = 0.0;  // plain running sums, combined pairwise across blocks
  double success_sum = 0.0;
  Welford eps;  // for the confidence interval; the success copy keeps
  Welford success;  // precision when eps sits next to 1
};

struct BlockResult {
  std::vector<HopAccumulator> hops;
  long long undefined = 0;
};

double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

void merge_into(Welford& acc, const Welford& b) {
  if (b.n == 0) return;
  if (acc.n == 0) {
    acc = b;
    return;
  }
  const double n = static_cast<double>(acc.n + b.n);
  const double delta = b.mean - acc.mean;
  acc.mean += delta * static_cast<double>(b.n) / n;
  acc.m2 += b.m2 + delta * delta * static_cast<double>(acc.n) *
                       static_cast<double>(b.n) / n;
  acc.n += b.n;
}

}  // namespace

PerfEstimate estimate(const Scenario& s, const Constants& c, const McConfig& mc,
                      int workers) {
  validate(s, c);
  if (mc.n_realizations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_realizations must be >= 1");
  }
  const Geometry geo = build_geometry(s, c);
  const LinkMeans means = link_means(s, geo, c);
  const LinearPowers powers = linear_powers(s);
  const double kap = kappa(s, c);
  const FblParams fbl = fbl_params(s, c);
  const int K = s.K;

  const long long n = mc.n_realizations;
  const auto n_blocks = static_cast<std::size_t>((n + kMcBlockSize - 1) / kMcBlockSize);
  std::vector<BlockResult> blocks(n_blocks);

  parallel_for(n_blocks, workers, [&](std::size_t b) {
    BlockResult& out = blocks[b];
    out.hops.assign(static_cast<std::size_t>(K), HopAccumulator{});
    ChannelDraw draw;
    std::vector<double> gamma(static_cast<std::size_t>(K));
    const long long begin = static_cast<long long>(b) * kMcBlockSize;
    const long long end = std::min(n, begin + kMcBlockSize);
    for (long long i = begin; i < end; ++i) {
      draw_block_into(draw, realization_stream(mc.seed, static_cast<std::uint64_t>(i)),
                      means);
      try {
        hop_sinrs(mc.scheme, draw, powers, kap, c.sigma2, gamma);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefined) throw;
        ++out.undefined;
        continue;
      }
      for (int k = 0; k < K; ++k) {
        const double eps = inst_bler(gamma[k], fbl);
        HopAccumulator& h = out.hops[k];
        h.sum += eps;
        const double success = inst_success(gamma[k], fbl);
        h.success_sum += success;
        h.eps.add(eps);
        h.success.add(success);
      }
    }
  });

  long long undefined = 0;
  for (const auto& b : blocks) undefined += b.undefined;
  if (undefined > 0) {
    throw Error(ErrorCode::kUndefined,
                std::to_string(undefined) +
                    " realizations produced an undefined SINR");
  }

  PerfEstimate est;
  est.n_realizations = n;
  std::vector<double> partial(n_blocks);
  std::vector<double> partial_success(n_blocks);
  for (int k = 0; k < K; ++k) {
    Welford total_eps;
    Welford total_success;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      partial[b] = blocks[b].hops[k].sum;
      partial_success[b] = blocks[b].hops[k].success_sum;
      merge_into(total_eps, blocks[b].hops[k].eps);
      merge_into(total_success, blocks[b].hops[k].success);
    }
    // Report from whichever mean is the smaller probability: it carries
    // full relative precision.
    const double mean_eps = pairwise_sum(partial) / static_cast<double>(n);
    const double mean_success = pairwise_sum(partial_success) / static_cast<double>(n);
    const bool use_eps = mean_eps < 0.5;
    est.per_hop_bler.push_back(use_eps ? mean_eps : 1.0 - mean_success);
    const double m2 = use_eps ? total_eps.m2 : total_success.m2;
    const double sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    est.ci_halfwidth.push_back(1.96 * sd / std::sqrt(static_cast<double>(n)));
  }
  derive_metrics(est, s, c);
  return est;
}

bool is_sweep_axis(std::string_view axis) {
  return axis == "scheme" || is_config_key(axis);
}

std::vector<SweepPoint> sweep(std::string_view axis,
                              std::span<const std::string> grid,
                              const Scenario& base, const Constants& c,
                              const McConfig& mc, int workers) {
  if (!is_sweep_axis(axis)) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown sweep axis '" + std::string(axis) + "'");
  }
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep grid is empty");
  }
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepPoint p{grid[i], base, c, mc, {}, 0.0};
    if (axis == "scheme") {
      p.mc.scheme = parse_scheme(grid[i]);
    } else {
      set_config_field(p.scenario, p.constants, axis, grid[i]);
    }
    if (!mc.crn) p.mc.seed = mix64(mc.seed ^ mix64(i + 1));
    const auto t0 = std::chrono::steady_clock::now();
    p.estimate = estimate(p.scenario, p.constants, p.mc, workers);
    p.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<std::string> parse_grid(std::string_view text) {
  text = trim(text);
  std::vector<std::string> out;
  const auto parts = split(text, ':');
  if (parts.size() == 3) {
    const double start = parse_double(parts[0], "grid start");
    const double stop = parse_double(parts[1], "grid stop");
    const double step = parse_double(parts[2], "grid step");
    if (!(step > 0.0) || stop < start) {
      throw Error(ErrorCode::kParse, "grid needs step > 0 and stop >= start");
    }
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1'000'000) throw Error(ErrorCode::kParse, "grid too large");
    for (long long i = 0; i < count; ++i) {
      out.push_back(format_double(start + static_cast<double>(i) * step));
    }
    return out;
  }
  if (parts.size() != 1) throw Error(ErrorCode::kParse, "malformed grid '" + std::string(text) + "'");
  for (auto v : split(text, ',')) {
    if (v.empty()) throw Error(ErrorCode::kParse, "empty grid value");
    out.emplace_back(v);
  }
  return out;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

void write_estimate_header(std::ostream& out, std::string_view axis) {
  if (!axis.empty()) out << axis << ',';
  out << "scheme,e2e_bler,throughput,reliability,latency,per_hop_bler,"
         "ci_halfwidth,n_realizations\n";
}

void write_estimate_row(std::ostream& out, std::string_view axis_value,
                        EhScheme scheme, const PerfEstimate& est) {
  if (!axis_value.empty()) out << axis_value << ',';
  out << to_string(scheme) << ',' << format_double(est.e2e_bler) << ','
      << format_double(est.throughput) << ',' << format_double(est.reliability)
      << ',' << (est.latency ? format_double(*est.latency) : std::string("nan"))
      << ',' << join(est.per_hop_bler) << ',' << join(est.ci_halfwidth) << ','
      << est.n_realizations << '\n';
}

}  // namespace ehspc
