#include "ehspc/kvconfig.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ehspc/error.hpp"

namespace ehspc {
namespace {

constexpr std::array<std::string_view, 20> kKeys = {
    "L",       "K",       "M",       "N",    "pt_pos", "pr_pos",
    "pb_pos",  "p_pb_db", "p_pt_db", "i_th_db", "n_e", "r_th",
    "eta",     "m",       "b",       "big_t", "sigma2", "pl_exp",
    "sigma_pl_db", "d0"};

[[noreturn]] void parse_error(std::string_view what, std::string_view text) {
  throw Error(ErrorCode::kParse, "cannot parse " + std::string(what) +
                                     " from '" + std::string(text) + "'");
}

int parse_int32(std::string_view text, std::string_view what) {
  const long long v = parse_int(text, what);
  if (v < INT32_MIN || v > INT32_MAX) parse_error(what, text);
  return static_cast<int>(v);
}

Point parse_point(std::string_view text, std::string_view what) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) parse_error(what, text);
  return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

std::string format_point(Point p) {
  return format_double(p.x) + "," + format_double(p.y);
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "nan") return std::nan("");
  if (text == "inf" || text == "+inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size()) {
    parse_error(what, text);
  }
  return v;
}

long long parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size()) {
    // Accept integral decimals such as "4.0" coming out of CSV tools.
    const double d = parse_double(text, what);
    if (d != std::round(d) || std::abs(d) > 9.0e15) parse_error(what, text);
    return static_cast<long long>(d);
  }
  return v;
}

std::vector<KeyValue> parse_kv(std::string_view text) {
  std::vector<KeyValue> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos
                                            ? std::string_view::npos
                                            : end - start);
    ++line_no;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                           ": expected 'key = value'");
      }
      KeyValue kv{std::string(trim(line.substr(0, eq))),
                  std::string(trim(line.substr(eq + 1))), line_no};
      if (kv.key.empty()) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": empty key");
      }
      out.push_back(std::move(kv));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<KeyValue> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str());
}

std::span<const std::string_view> config_keys() { return kKeys; }

bool is_config_key(std::string_view key) {
  for (auto k : kKeys) {
    if (k == key) return true;
  }
  return false;
}

bool set_config_field(Scenario& s, Constants& c, std::string_view key,
                      std::string_view value) {
  if (key == "L") s.L = parse_int32(value, key);
  else if (key == "K") s.K = parse_int32(value, key);
  else if (key == "M") s.M = parse_int32(value, key);
  else if (key == "N") s.N = parse_int32(value, key);
  else if (key == "pt_pos") s.pt_pos = parse_point(value, key);
  else if (key == "pr_pos") s.pr_pos = parse_point(value, key);
  else if (key == "pb_pos") s.pb_pos = parse_point(value, key);
  else if (key == "p_pb_db") s.p_pb_db = parse_double(value, key);
  else if (key == "p_pt_db") s.p_pt_db = parse_double(value, key);
  else if (key == "i_th_db") s.i_th_db = parse_double(value, key);
  else if (key == "n_e") s.n_e = parse_int32(value, key);
  else if (key == "r_th") s.r_th = parse_double(value, key);
  else if (key == "eta") c.eta = parse_double(value, key);
  else if (key == "m") c.m = parse_int32(value, key);
  else if (key == "b") c.b = parse_int32(value, key);
  else if (key == "big_t") c.big_t = parse_double(value, key);
  else if (key == "sigma2") c.sigma2 = parse_double(value, key);
  else if (key == "pl_exp") c.pl_exp = parse_double(value, key);
  else if (key == "sigma_pl_db") c.sigma_pl_db = parse_double(value, key);
  else if (key == "d0") c.d0 = parse_double(value, key);
  else return false;
  return true;
}

std::string get_config_field(const Scenario& s, const Constants& c,
                             std::string_view key) {
  if (key == "L") return std::to_string(s.L);
  if (key == "K") return std::to_string(s.K);
  if (key == "M") return std::to_string(s.M);
  if (key == "N") return std::to_string(s.N);
  if (key == "pt_pos") return format_point(s.pt_pos);
  if (key == "pr_pos") return format_point(s.pr_pos);
  if (key == "pb_pos") return format_point(s.pb_pos);
  if (key == "p_pb_db") return format_double(s.p_pb_db);
  if (key == "p_pt_db") return format_double(s.p_pt_db);
  if (key == "i_th_db") return format_double(s.i_th_db);
  if (key == "n_e") return std::to_string(s.n_e);
  if (key == "r_th") return format_double(s.r_th);
  if (key == "eta") return format_double(c.eta);
  if (key == "m") return std::to_string(c.m);
  if (key == "b") return std::to_string(c.b);
  if (key == "big_t") return format_double(c.big_t);
  if (key == "sigma2") return format_double(c.sigma2);
  if (key == "pl_exp") return format_double(c.pl_exp);
  if (key == "sigma_pl_db") return format_double(c.sigma_pl_db);
  if (key == "d0") return format_double(c.d0);
  throw Error(ErrorCode::kInvalidArgument,
              "unknown config key '" + std::string(key) + "'");
}

std::string write_kv(const Scenario& s, const Constants& c) {
  std::string out;
  for (auto key : kKeys) {
    out += std::string(key) + " = " + get_config_field(s, c, key) + "\n";
  }
  return out;
}

}  // namespace ehspc
