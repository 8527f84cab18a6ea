#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ehspc/dataset.hpp"
#include "ehspc/error.hpp"
#include "test_support.hpp"

using namespace ehspc;

namespace {

Dataset small_dataset(long long n, int workers = 1) {
  McConfig mc;
  mc.n_realizations = 200;
  mc.seed = 77;
  return generate(n, mc, table1_bounds(), Constants{}, workers);
}

}  // namespace

TEST_CASE("generation is deterministic down to the bytes") {
  const auto dir = test::tmp_dir("dataset_det");
  const auto a = small_dataset(10);
  const auto b = small_dataset(10, 4);
  save_dataset(dir / "a.csv", a, std::vector<std::string>{"run a"});
  save_dataset(dir / "b.csv", b, std::vector<std::string>{"run a"});
  CHECK(test::slurp(dir / "a.csv") == test::slurp(dir / "b.csv"));
  CHECK(test::slurp(dir / "a.manifest") == test::slurp(dir / "b.manifest"));
  CHECK(test::slurp(dir / "a.ci.csv") == test::slurp(dir / "b.ci.csv"));
  for (const auto& row : a.rows) {
    CHECK(row.y[0] >= 0.0);
    CHECK(row.y[0] <= 1.0);
    CHECK(row.y[1] >= 0.0);
    CHECK(row.bler_ci >= 0.0);
  }
}

TEST_CASE("CSV layout") {
  const auto dir = test::tmp_dir("dataset_layout");
  save_dataset(dir / "d.csv", small_dataset(3));
  const std::string text = test::slurp(dir / "d.csv");
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "L,K,M,N,x_PT,y_PT,x_PR,y_PR,x_PB,y_PB,P_PB,I_th,P_PT,n_E,R_th,bler,throughput");
  const auto cols = dataset_columns();
  CHECK(cols.size() == 17);
  CHECK(test::slurp(dir / "d.ci.csv").rfind("row,bler_ci_halfwidth\n", 0) == 0);
}

TEST_CASE("write then read is bit-exact") {
  const auto dir = test::tmp_dir("dataset_rt");
  const auto a = small_dataset(25);
  save_dataset(dir / "d.csv", a, std::vector<std::string>{"meta line"});
  const auto b = load_dataset(dir / "d.csv");
  CHECK(b.manifest == a.manifest);
  REQUIRE(b.rows.size() == a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(b.rows[i] == a.rows[i]);
}

TEST_CASE("any row can be regenerated from the manifest") {
  const auto a = small_dataset(12);
  for (long long i : {0LL, 5LL, 11LL}) {
    CHECK(generate_row(i, a.manifest) == a.rows[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("integer features are uniform (chi-square, 1%)") {
  McConfig mc;
  mc.n_realizations = 1;
  mc.seed = 3;
  const auto d = generate(10000, mc, table1_bounds(), Constants{}, 1);
  // chi-square 0.99 quantile with 5 degrees of freedom
  for (int f : {0, 1, 2, 3, 13}) {
    std::vector<int> counts(6, 0);
    for (const auto& r : d.rows) {
      const double v = f == 13 ? r.x[f] / 100.0 : r.x[f];
      ++counts[static_cast<std::size_t>(v) - 1];
    }
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 10000.0 / 6) * (c - 10000.0 / 6) / (10000.0 / 6);
    INFO("feature ", f, " chi2 ", chi2);
    CHECK(chi2 < 15.086);
  }
}

TEST_CASE("manifest text") {
  DatasetManifest m;
  m.n_samples = 12;
  m.seed = 18446744073709551615ULL;
  m.scheme = EhScheme::kMax;
  m.n_realizations = 500000;
  m.constants.b = 2048;
  m.bounds.K = {2, 2};
  const auto back = parse_manifest(write_manifest(m));
  CHECK(back == m);

  std::string text = write_manifest(m);
  const auto pos = text.find("schema_version = 1");
  REQUIRE(pos != std::string::npos);
  std::string v2 = text;
  v2.replace(pos, 18, "schema_version = 2");
  CHECK_THROWS_CODE(parse_manifest(v2), ErrorCode::kVersionMismatch);
  std::string none = text;
  none.erase(pos, 19);
  CHECK_THROWS_CODE(parse_manifest(none), ErrorCode::kParse);
  CHECK_THROWS_CODE(parse_manifest(text + "mystery = 1\n"), ErrorCode::kParse);
}

TEST_CASE("normalization") {
  const auto r = table1_bounds().feature_ranges();
  FeatureVector lo{};
  FeatureVector hi{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    lo[i] = r[i].lo;
    hi[i] = r[i].hi;
  }
  for (double u : normalize(lo, r)) CHECK(u == 0.0);
  for (double u : normalize(hi, r)) CHECK(u == 1.0);
  FeatureVector x = lo;
  x[0] = 4;
  CHECK(normalize(x, r)[0] == doctest::Approx(0.6).epsilon(1e-15));
  const auto back = denormalize(normalize(x, r), r);
  for (std::size_t i = 0; i < kFeatureCount; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-15));
  x[12] = 41.0;
  try {
    normalize(x, r);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
    CHECK(std::string(e.what()).find("12") != std::string::npos);
  }
  auto pinned = r;
  pinned[1] = {3, 3};
  x = lo;
  x[1] = 3;
  CHECK(normalize(x, pinned)[1] == 0.0);
}

TEST_CASE("train/test split") {
  std::vector<Sample> rows(100);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].y[0] = static_cast<double>(i);
  const auto [train, test] = split(rows, 0.8, 0.2, 5);
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  std::set<double> seen;
  for (const auto& s : train) seen.insert(s.y[0]);
  for (const auto& s : test) seen.insert(s.y[0]);
  CHECK(seen.size() == 100);
  const auto again = split(rows, 0.8, 0.2, 5);
  CHECK(again.first == train);
  CHECK(again.second == test);
  CHECK(split(rows, 0.8, 0.2, 6).first != train);
  const auto all = split(rows, 1.0, 0.0, 5);
  CHECK(all.first.size() == 100);
  CHECK(all.second.empty());
  CHECK_THROWS_CODE(split(rows, 0.7, 0.2, 5), ErrorCode::kInvalidArgument);
}

TEST_CASE("feature CSV input by column name") {
  std::istringstream in(
      "# comment\n"
      "extra,R_th,n_E,P_PT,I_th,P_PB,y_PB,x_PB,y_PR,x_PR,y_PT,x_PT,N,M,K,L\n"
      "9,1.5,500,12,20,10,9,9,19,19,29,19,3,4,4,4\n");
  const auto xs = read_feature_csv(in);
  REQUIRE(xs.size() == 1);
  CHECK(xs[0][0] == 4.0);
  CHECK(xs[0][13] == 500.0);
  CHECK(xs[0][14] == 1.5);
  std::istringstream missing("L,K\n1,2\n");
  CHECK_THROWS_CODE(read_feature_csv(missing), ErrorCode::kParse);
}

TEST_CASE("load errors") {
  const auto dir = test::tmp_dir("dataset_err");
  CHECK_THROWS_CODE(load_dataset(dir / "absent.csv"), ErrorCode::kIo);
  test::spit(dir / "bad.csv", "a,b\n1,2\n");
  CHECK_THROWS_CODE(load_dataset(dir / "bad.csv"), ErrorCode::kParse);
}
