#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "ehspc/channel.hpp"
#include "ehspc/dataset.hpp"
#include "ehspc/error.hpp"
#include "ehspc/kvconfig.hpp"
#include "ehspc/montecarlo.hpp"
#include "ehspc/parallel.hpp"
#include "ehspc/surrogate.hpp"

#ifndef EHSPC_VERSION
#define EHSPC_VERSION "dev"
#endif

namespace ehspc::cli {
namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<long long> realizations;
  std::optional<std::string> scheme;
  int workers = 1;
  std::string output;
  bool bytes = false;
};

struct Resolved {
  Scenario s;
  Constants c;
  McConfig mc;
};

// Keys accepted by --config and --set beyond the scenario/constant fields.
void apply_setting(Resolved& r, std::string_view key, std::string_view value) {
  if (key == "scheme") {
    r.mc.scheme = parse_scheme(value);
  } else if (key == "realizations") {
    r.mc.n_realizations = parse_int(value, key);
  } else if (key == "seed") {
    const long long v = parse_int(value, key);
    if (v < 0) throw Error(ErrorCode::kInvalidArgument, "seed must be >= 0");
    r.mc.seed = static_cast<std::uint64_t>(v);
  } else if (key == "crn") {
    const auto t = trim(value);
    if (t == "1" || t == "true" || t == "on") r.mc.crn = true;
    else if (t == "0" || t == "false" || t == "off") r.mc.crn = false;
    else throw Error(ErrorCode::kParse, "crn expects true/false");
  } else if (!set_config_field(r.s, r.c, key, value)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown setting '" + std::string(key) + "'");
  }
}

Resolved resolve(const CommonOptions& o, bool crn_flag) {
  Resolved r;
  r.mc.crn = crn_flag;
  if (!o.config_path.empty()) {
    for (const auto& kv : read_kv_file(o.config_path)) apply_setting(r, kv.key, kv.value);
  }
  for (const auto& set : o.sets) {
    const auto eq = set.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, "--set expects key=value, got '" + set + "'");
    }
    apply_setting(r, trim(std::string_view(set).substr(0, eq)),
                  trim(std::string_view(set).substr(eq + 1)));
  }
  if (o.seed) r.mc.seed = *o.seed;
  if (o.realizations) r.mc.n_realizations = *o.realizations;
  if (o.scheme) r.mc.scheme = parse_scheme(*o.scheme);
  if (o.bytes) r.c.b *= 8;
  if (r.mc.n_realizations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "realizations must be >= 1");
  }
  validate(r.s, r.c);
  return r;
}

std::string quote_arg(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"'\\$") == std::string::npos) return a;
  std::string q = "'";
  for (char ch : a) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return q + "'";
}

std::string invocation(const std::vector<std::string>& args) {
  std::string line = "ehspc";
  for (const auto& a : args) line += " " + quote_arg(a);
  return line;
}

std::vector<std::string> meta_lines(const std::vector<std::string>& args,
                                    std::string_view command, std::uint64_t seed) {
  return {"ehspc " EHSPC_VERSION " " + std::string(command),
          "invocation: " + invocation(args), "seed: " + std::to_string(seed)};
}

void write_meta(std::ostream& os, const std::vector<std::string>& lines) {
  for (const auto& l : lines) os << "# " << l << '\n';
}

void write_config_meta(std::ostream& os, const Resolved& r) {
  std::istringstream kv(write_kv(r.s, r.c));
  std::string line;
  while (std::getline(kv, line)) os << "# " << line << '\n';
  os << "# scheme = " << to_string(r.mc.scheme) << '\n'
     << "# realizations = " << r.mc.n_realizations << '\n'
     << "# crn = " << (r.mc.crn ? "true" : "false") << '\n';
}

// Writes to --output when given, otherwise to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::kIo, "cannot write " + path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }
  void finish(const std::string& path) {
    os_->flush();
    if (!*os_) throw Error(ErrorCode::kIo, "write failed: " + (path.empty() ? "stdout" : path));
  }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--set", o.sets, "override one setting, key=value (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd->add_option("--seed", o.seed, "master seed (default 1)");
  cmd->add_option("--realizations", o.realizations, "Monte-Carlo realizations per estimate");
  cmd->add_option("--scheme", o.scheme, "energy-harvesting scheme: PT, Max or Sum");
  cmd->add_option("--workers", o.workers, "worker threads (default: EHSPC_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-o,--output", o.output, "output file (default stdout)");
  cmd->add_flag("--bytes", o.bytes, "message size b is given in bytes");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
    case ErrorCode::kDomain:
      return kExitConfig;
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kNonFinite:
    case ErrorCode::kInvariant:
      return kExitModel;
    case ErrorCode::kUndefined:
      return kExitUndefined;
  }
  return kExitFailure;
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
    if (ch == '"') ch = '\'';
  }
  return s;
}

int report(std::ostream& err, std::string_view code, int exit, const std::string& message) {
  err << "error code=" << code << " exit=" << exit << " message=\"" << one_line(message)
      << "\"\n";
  return exit;
}

std::vector<std::string> scaled_grid(std::vector<std::string> grid, std::string_view axis,
                                     bool bytes) {
  if (axis != "b" || !bytes) return grid;
  for (auto& g : grid) g = std::to_string(parse_int(g, "b") * 8);
  return grid;
}

Network bundle_or_default(const std::string& path, std::uint64_t seed) {
  return Network(path.empty() ? random_cnn_bundle(seed) : load_bundle(path));
}

std::vector<Scenario> read_scenarios(const std::string& path, const Resolved& base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::string> cols;
  std::vector<Scenario> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (cols.empty()) {
      for (auto f : fields) cols.emplace_back(trim(f));
      for (const char* need : {"K", "L", "M", "N"}) {
        if (std::find(cols.begin(), cols.end(), need) == cols.end()) {
          throw Error(ErrorCode::kParse, path + ": missing column " + need);
        }
      }
      continue;
    }
    if (fields.size() != cols.size()) throw Error(ErrorCode::kParse, path + ": ragged row");
    Scenario s = base.s;
    Constants c = base.c;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (!set_config_field(s, c, cols[i], fields[i])) {
        throw Error(ErrorCode::kParse, path + ": unknown column " + cols[i]);
      }
    }
    validate(s, c);
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::kParse, path + ": no scenarios");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-harvesting short-packet multi-hop simulator and surrogate tools", "ehspc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EHSPC_VERSION);

  CommonOptions common;
  common.workers = default_workers();
  bool crn = false;
  std::string dump_draws;
  long long dump_count = 10;
  std::string axis, grid_text;
  long long samples = 0;
  double train_fraction = 0.8, test_fraction = 0.2;
  std::string bundle_path, input_path = "-", data_path, scenarios_path;
  int batch = 100;

  auto* simulate = app.add_subcommand("simulate", "one Monte-Carlo performance estimate");
  add_common(simulate, common);
  simulate->add_flag("--crn", crn, "common random numbers (accepted for symmetry)");
  simulate->add_option("--dump-draws", dump_draws, "write raw channel draws to this CSV");
  simulate->add_option("--dump-count", dump_count, "realizations to dump (default 10)")
      ->check(CLI::PositiveNumber);

  auto* sweep_cmd = app.add_subcommand("sweep", "estimates along one parameter axis");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--axis", axis, "config key or 'scheme'")->required();
  sweep_cmd->add_option("--grid", grid_text, "start:stop:step or comma list")->required();
  sweep_cmd->add_flag("--crn", crn, "reuse one seed at every grid point");

  auto* gen = app.add_subcommand("gen-dataset", "labelled dataset of random scenarios");
  add_common(gen, common);
  gen->add_option("-n,--samples", samples, "number of rows")->required()->check(CLI::PositiveNumber);
  gen->add_option("--train-fraction", train_fraction, "recorded split fraction");
  gen->add_option("--test-fraction", test_fraction, "recorded split fraction");

  auto* predict = app.add_subcommand("predict", "surrogate predictions for feature rows");
  add_common(predict, common);
  predict->add_option("--bundle", bundle_path, "model bundle")->required();
  predict->add_option("-i,--input", input_path, "feature CSV, '-' for stdin");

  auto* evaluate = app.add_subcommand("evaluate", "RMSE of a bundle on a labelled CSV");
  add_common(evaluate, common);
  evaluate->add_option("--bundle", bundle_path, "model bundle")->required();
  evaluate->add_option("--data", data_path, "labelled dataset CSV")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo vs surrogate timing table");
  add_common(bench_cmd, common);
  bench_cmd->add_option("--bundle", bundle_path, "model bundle (default: random-weight CNN)");
  bench_cmd->add_option("--scenarios", scenarios_path, "CSV with K,L,M,N columns")->required();
  bench_cmd->add_option("--batch", batch, "inputs per surrogate batch")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << EHSPC_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report(err, "usage", kExitUsage, e.what());
  }

  try {
    const Resolved r = resolve(common, crn);
    const int workers = common.workers;
    Sink sink(common.output, out);
    std::ostream& os = sink.stream();

    if (simulate->parsed()) {
      write_meta(os, meta_lines(args, "simulate", r.mc.seed));
      write_config_meta(os, r);
      const auto t0 = std::chrono::steady_clock::now();
      const PerfEstimate est = estimate(r.s, r.c, r.mc, workers);
      err << "timing wall_seconds="
          << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << '\n';
      write_estimate_header(os, "");
      write_estimate_row(os, "", r.mc.scheme, est);
      if (!dump_draws.empty()) {
        std::ofstream d(dump_draws, std::ios::binary | std::ios::trunc);
        if (!d) throw Error(ErrorCode::kIo, "cannot write " + dump_draws);
        write_meta(d, meta_lines(args, "simulate draws", r.mc.seed));
        d << "sample,hop,class,index,gain\n";
        const Geometry geo = build_geometry(r.s, r.c);
        const long long count = std::min(dump_count, r.mc.n_realizations);
        for (long long i = 0; i < count; ++i) {
          const auto id = static_cast<std::uint64_t>(i);
          write_draw_csv(d, id, draw_block(realization_stream(r.mc.seed, id), r.s, geo, r.c));
        }
        if (!d) throw Error(ErrorCode::kIo, "write failed: " + dump_draws);
      }
    } else if (sweep_cmd->parsed()) {
      if (!is_sweep_axis(axis)) {
        throw Error(ErrorCode::kInvalidArgument, "unknown sweep axis '" + axis + "'");
      }
      const auto grid = scaled_grid(parse_grid(grid_text), axis, common.bytes);
      write_meta(os, meta_lines(args, "sweep", r.mc.seed));
      write_config_meta(os, r);
      const auto points = sweep(axis, grid, r.s, r.c, r.mc, workers);
      write_estimate_header(os, axis);
      for (const auto& p : points) {
        write_estimate_row(os, p.axis_value, p.mc.scheme, p.estimate);
        err << "timing " << axis << '=' << p.axis_value << " wall_seconds=" << p.wall_seconds << '\n';
      }
    } else if (gen->parsed()) {
      if (common.output.empty() || common.output == "-") {
        throw Error(ErrorCode::kInvalidArgument, "gen-dataset needs --output <dataset.csv>");
      }
      Dataset data = generate(samples, r.mc, table1_bounds(), r.c, workers);
      data.manifest.train_fraction = train_fraction;
      data.manifest.test_fraction = test_fraction;
      if (!(train_fraction >= 0.0 && test_fraction >= 0.0) ||
          std::abs(train_fraction + test_fraction - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument, "split fractions must be >= 0 and sum to 1");
      }
      save_dataset(common.output, data, meta_lines(args, "gen-dataset", r.mc.seed));
      err << "wrote " << data.rows.size() << " rows to " << common.output << '\n';
      return kExitOk;
    } else if (predict->parsed()) {
      const Network net(load_bundle(bundle_path));
      std::vector<FeatureVector> xs;
      if (input_path == "-") {
        xs = read_feature_csv(std::cin);
      } else {
        std::ifstream in(input_path);
        if (!in) throw Error(ErrorCode::kIo, "cannot open " + input_path);
        xs = read_feature_csv(in);
      }
      const auto preds = net.forward_batch(xs, workers);
      write_meta(os, meta_lines(args, "predict", r.mc.seed));
      os << "row,bler,throughput,extrapolated\n";
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        os << i << ',' << format_double(p.y[0]) << ',' << format_double(p.y[1]) << ','
           << (p.extrapolated ? 1 : 0) << '\n';
        if (p.extrapolated) {
          err << "warning: row " << i << " outside bundle bounds:";
          for (int f : p.out_of_bounds) err << ' ' << feature_names()[static_cast<std::size_t>(f)];
          err << '\n';
        }
      }
    } else if (evaluate->parsed()) {
      const Network net(load_bundle(bundle_path));
      const Dataset data = load_dataset(data_path);
      if (data.rows.empty()) throw Error(ErrorCode::kInvalidArgument, data_path + ": no rows");
      std::vector<FeatureVector> xs;
      std::vector<std::array<double, 2>> y, y_hat;
      for (const auto& row : data.rows) {
        xs.push_back(row.x);
        y.push_back(row.y);
      }
      for (const auto& p : net.forward_batch(xs, workers)) y_hat.push_back(p.y);
      double se[2] = {0.0, 0.0};
      for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = 0; j < 2; ++j) se[j] += (y[i][j] - y_hat[i][j]) * (y[i][j] - y_hat[i][j]);
      }
      const auto n = static_cast<double>(y.size());
      write_meta(os, meta_lines(args, "evaluate", r.mc.seed));
      os << "rows,rmse,rmse_bler,rmse_throughput\n"
         << y.size() << ',' << format_double(rmse(y, y_hat)) << ','
         << format_double(std::sqrt(se[0] / n)) << ',' << format_double(std::sqrt(se[1] / n))
         << '\n';
    } else if (bench_cmd->parsed()) {
      const Network net = bundle_or_default(bundle_path, r.mc.seed);
      const auto scenarios = read_scenarios(scenarios_path, r);
      write_meta(os, meta_lines(args, "bench", r.mc.seed));
      if (bundle_path.empty()) os << "# bundle: random-weight CNN (timing only)\n";
      write_bench_header(os);
      for (const auto& s : scenarios) write_bench_row(os, bench(net, s, r.c, r.mc, batch, workers));
    }
    sink.finish(common.output);
  } catch (const Error& e) {
    return report(err, to_string(e.code()), exit_code_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return report(err, "internal", kExitFailure, e.what());
  }
  return kExitOk;
}

}  // namespace ehspc::cli
