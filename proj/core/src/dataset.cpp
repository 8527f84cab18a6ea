#include "ehspc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"
#include "ehspc/parallel.hpp"

namespace ehspc {
namespace {

constexpr std::uint64_t kScenarioStreamSalt = 0x5ce7a410ULL;
constexpr std::uint64_t kLabelSeedSalt = 0x1abe1ULL;

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Delta-method half-width of 1 - prod(1 - eps_k), hops independent.
double e2e_halfwidth(const PerfEstimate& est) {
  double acc = 0.0;
  for (std::size_t k = 0; k < est.per_hop_bler.size(); ++k) {
    double w = 1.0;
    for (std::size_t j = 0; j < est.per_hop_bler.size(); ++j) {
      if (j != k) w *= 1.0 - est.per_hop_bler[j];
    }
    acc += (w * est.ci_halfwidth[k]) * (w * est.ci_halfwidth[k]);
  }
  return std::sqrt(acc);
}

std::string range_text(Range r) {
  return format_double(r.lo) + "," + format_double(r.hi);
}

Range parse_range(std::string_view text, std::string_view key) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) {
    throw Error(ErrorCode::kParse, "manifest: bad range for " + std::string(key));
  }
  return {parse_double(parts[0], key), parse_double(parts[1], key)};
}

Range* bound_field(ScenarioBounds& b, std::string_view name) {
  static const std::array<std::string_view, kFeatureCount> names = {
      "L", "K", "M", "N", "x_PT", "y_PT", "x_PR", "y_PR",
      "x_PB", "y_PB", "P_PB", "I_th", "P_PT", "n_E", "R_th"};
  Range* fields[kFeatureCount] = {&b.L, &b.K, &b.M, &b.N, &b.pt_x, &b.pt_y,
                                  &b.pr_x, &b.pr_y, &b.pb_x, &b.pb_y,
                                  &b.p_pb_db, &b.i_th_db, &b.p_pt_db, &b.n_e,
                                  &b.r_th};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (names[i] == name) return fields[i];
  }
  return nullptr;
}

std::vector<std::string_view> csv_fields(std::string_view line) {
  return split(line, ',');
}

}  // namespace

Sample generate_row(long long index, const DatasetManifest& manifest) {
  RngStream stream = RngStream(manifest.seed)
                         .child(kScenarioStreamSalt)
                         .child(static_cast<std::uint64_t>(index));
  const Scenario s = sample_scenario(stream, manifest.bounds);
  McConfig mc;
  mc.n_realizations = manifest.n_realizations;
  mc.scheme = manifest.scheme;
  mc.seed = mix64(manifest.seed ^ mix64(kLabelSeedSalt + static_cast<std::uint64_t>(index)));
  const PerfEstimate est = estimate(s, manifest.constants, mc, 1);
  Sample row;
  row.x = to_features(s);
  row.y = {est.e2e_bler, est.throughput};
  row.bler_ci = e2e_halfwidth(est);
  return row;
}

Dataset generate(long long n, const McConfig& mc, const ScenarioBounds& bounds,
                 const Constants& c, int workers) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "dataset size must be >= 1");
  validate(bounds);
  validate(c);
  Dataset data;
  data.manifest.n_samples = n;
  data.manifest.seed = mc.seed;
  data.manifest.scheme = mc.scheme;
  data.manifest.n_realizations = mc.n_realizations;
  data.manifest.constants = c;
  data.manifest.bounds = bounds;
  data.rows.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
    data.rows[i] = generate_row(static_cast<long long>(i), data.manifest);
  });
  return data;
}

std::vector<std::string> dataset_columns() {
  std::vector<std::string> cols(feature_names().begin(), feature_names().end());
  cols.emplace_back("bler");
  cols.emplace_back("throughput");
  return cols;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  return p.replace_extension(".manifest");
}

std::filesystem::path ci_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  return p.replace_extension(".ci.csv");
}

std::string write_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "# ehspc dataset manifest\n"
      << "schema_version = " << m.schema_version << '\n'
      << "n_samples = " << m.n_samples << '\n'
      << "seed = " << m.seed << '\n'
      << "scheme = " << to_string(m.scheme) << '\n'
      << "n_realizations = " << m.n_realizations << '\n'
      << "train_fraction = " << format_double(m.train_fraction) << '\n'
      << "test_fraction = " << format_double(m.test_fraction) << '\n';
  const Scenario unused;
  for (auto key : config_keys()) {
    if (key == "eta" || key == "m" || key == "b" || key == "big_t" ||
        key == "sigma2" || key == "pl_exp" || key == "sigma_pl_db" || key == "d0") {
      out << key << " = " << get_config_field(unused, m.constants, key) << '\n';
    }
  }
  const auto ranges = m.bounds.feature_ranges();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out << "bound." << feature_names()[i] << " = " << range_text(ranges[i]) << '\n';
  }
  out << "n_e_step = " << m.bounds.n_e_step << '\n';
  return out.str();
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  Scenario unused;
  bool saw_version = false;
  for (const auto& kv : parse_kv(text)) {
    const std::string_view key = kv.key;
    if (key == "schema_version") {
      m.schema_version = static_cast<int>(parse_int(kv.value, key));
      saw_version = true;
    } else if (key == "n_samples") m.n_samples = parse_int(kv.value, key);
    else if (key == "seed") m.seed = std::stoull(kv.value);
    else if (key == "scheme") m.scheme = parse_scheme(kv.value);
    else if (key == "n_realizations") m.n_realizations = parse_int(kv.value, key);
    else if (key == "train_fraction") m.train_fraction = parse_double(kv.value, key);
    else if (key == "test_fraction") m.test_fraction = parse_double(kv.value, key);
    else if (key == "n_e_step") m.bounds.n_e_step = static_cast<int>(parse_int(kv.value, key));
    else if (key.starts_with("bound.")) {
      Range* r = bound_field(m.bounds, key.substr(6));
      if (!r) throw Error(ErrorCode::kParse, "manifest: unknown bound " + kv.key);
      *r = parse_range(kv.value, key);
    } else if (!set_config_field(unused, m.constants, key, kv.value)) {
      throw Error(ErrorCode::kParse, "manifest: unknown key " + kv.key);
    }
  }
  if (!saw_version) throw Error(ErrorCode::kParse, "manifest: missing schema_version");
  if (m.schema_version != kDatasetSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "manifest schema_version " + std::to_string(m.schema_version) +
                    " is not supported");
  }
  return m;
}

void save_dataset(const std::filesystem::path& csv, const Dataset& data,
                  std::span<const std::string> meta) {
  {
    auto out = open_out(csv);
    for (const auto& line : meta) out << "# " << line << '\n';
    const auto cols = dataset_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& row : data.rows) {
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out << (i ? "," : "") << format_double(row.x[i]);
      }
      out << ',' << format_double(row.y[0]) << ',' << format_double(row.y[1]) << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + csv.string());
  }
  {
    auto out = open_out(manifest_path_for(csv));
    out << write_manifest(data.manifest);
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + manifest_path_for(csv).string());
  }
  {
    auto out = open_out(ci_path_for(csv));
    out << "row,bler_ci_halfwidth\n";
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      out << i << ',' << format_double(data.rows[i].bler_ci) << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + ci_path_for(csv).string());
  }
}

Dataset load_dataset(const std::filesystem::path& csv) {
  const std::string text = read_file(csv);
  Dataset data;
  const auto cols = dataset_columns();
  bool header_seen = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = csv_fields(t);
    if (!header_seen) {
      if (fields.size() != cols.size() ||
          !std::equal(fields.begin(), fields.end(), cols.begin())) {
        throw Error(ErrorCode::kParse, csv.string() + ": unexpected header");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != cols.size()) {
      throw Error(ErrorCode::kParse, csv.string() + ":" + std::to_string(line_no) +
                                         ": expected 17 fields");
    }
    Sample s;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s.x[i] = parse_double(fields[i], cols[i]);
    s.y = {parse_double(fields[15], "bler"), parse_double(fields[16], "throughput")};
    data.rows.push_back(s);
  }
  if (!header_seen) throw Error(ErrorCode::kParse, csv.string() + ": missing header");

  const auto mpath = manifest_path_for(csv);
  if (std::filesystem::exists(mpath)) data.manifest = parse_manifest(read_file(mpath));
  const auto cpath = ci_path_for(csv);
  if (std::filesystem::exists(cpath)) {
    std::istringstream ci(read_file(cpath));
    std::getline(ci, line);
    while (std::getline(ci, line)) {
      const auto f = csv_fields(trim(line));
      if (f.size() != 2) continue;
      const auto idx = static_cast<std::size_t>(parse_int(f[0], "row"));
      if (idx < data.rows.size()) data.rows[idx].bler_ci = parse_double(f[1], "ci");
    }
  }
  return data;
}

std::vector<FeatureVector> read_feature_csv(std::istream& in) {
  std::vector<FeatureVector> out;
  std::array<int, kFeatureCount> column{};
  column.fill(-1);
  bool header_seen = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = csv_fields(t);
    if (!header_seen) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
          if (fields[c] == feature_names()[i]) column[i] = static_cast<int>(c);
        }
      }
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (column[i] < 0) {
          throw Error(ErrorCode::kParse, "input CSV lacks column " +
                                             std::string(feature_names()[i]));
        }
      }
      header_seen = true;
      continue;
    }
    FeatureVector x{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto c = static_cast<std::size_t>(column[i]);
      if (c >= fields.size()) throw Error(ErrorCode::kParse, "short CSV row");
      x[i] = parse_double(fields[c], feature_names()[i]);
    }
    out.push_back(x);
  }
  if (!header_seen) throw Error(ErrorCode::kParse, "input CSV has no header");
  return out;
}

FeatureVector normalize(const FeatureVector& x, std::span<const Range, kFeatureCount> ranges) {
  FeatureVector u{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const Range r = ranges[i];
    if (!(x[i] >= r.lo && x[i] <= r.hi)) {
      throw Error(ErrorCode::kDomain,
                  "feature " + std::to_string(i) + " (" +
                      std::string(feature_names()[i]) + ") outside its bounds");
    }
    u[i] = r.hi > r.lo ? (x[i] - r.lo) / (r.hi - r.lo) : 0.0;
  }
  return u;
}

FeatureVector denormalize(const FeatureVector& u, std::span<const Range, kFeatureCount> ranges) {
  FeatureVector x{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    x[i] = ranges[i].lo + u[i] * (ranges[i].hi - ranges[i].lo);
  }
  return x;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split(
    std::span<const Sample> rows, double train_fraction, double test_fraction,
    std::uint64_t seed) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "split: empty dataset");
  if (!(train_fraction >= 0.0 && test_fraction >= 0.0) ||
      std::abs(train_fraction + test_fraction - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split: fractions must be >= 0 and sum to 1");
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(rows.size())));
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(rows[order[i]]);
  }
  return out;
}

}  // namespace ehspc
