#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ehspc/montecarlo.hpp"
#include "ehspc/scenario.hpp"

namespace ehspc {

inline constexpr int kDatasetSchemaVersion = 1;

/// Labelled row: feature vector and [e2e BLER, throughput].
struct Sample {
  FeatureVector x{};
  std::array<double, 2> y{};
  double bler_ci = 0.0;  // 95% half-width of y[0] from the per-hop CIs

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetManifest {
  int schema_version = kDatasetSchemaVersion;
  long long n_samples = 0;
  std::uint64_t seed = 0;
  EhScheme scheme = EhScheme::kSum;
  long long n_realizations = 0;
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  Constants constants;
  ScenarioBounds bounds;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> rows;
};

/// Row `index` of the dataset described by `manifest`: scenario drawn from
/// its own stream, label from an estimate under a per-row seed.
Sample generate_row(long long index, const DatasetManifest& manifest);

/// n rows, computed in parallel across rows and stored by index.
Dataset generate(long long n, const McConfig& mc, const ScenarioBounds& bounds,
                 const Constants& c, int workers = 1);

/// Column header: the 15 feature names followed by bler,throughput.
std::vector<std::string> dataset_columns();

/// Writes `<csv>`, `<csv stem>.manifest` and `<csv stem>.ci.csv`.
/// `meta` lines are emitted as `# ...` comments above the header.
void save_dataset(const std::filesystem::path& csv, const Dataset& data,
                  std::span<const std::string> meta = {});

/// Reads a dataset CSV (and its manifest when present next to it).
Dataset load_dataset(const std::filesystem::path& csv);

std::filesystem::path manifest_path_for(const std::filesystem::path& csv);
std::filesystem::path ci_path_for(const std::filesystem::path& csv);

std::string write_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(std::string_view text);

/// Reads any CSV carrying the 15 feature columns (by name, any order, extra
/// columns ignored). Used for prediction inputs.
std::vector<FeatureVector> read_feature_csv(std::istream& in);

/// Min-max scaling onto [0, 1] with the given per-feature ranges. A feature
/// outside its range throws Error(kDomain) naming the feature index.
FeatureVector normalize(const FeatureVector& x, std::span<const Range, kFeatureCount> ranges);
FeatureVector denormalize(const FeatureVector& u, std::span<const Range, kFeatureCount> ranges);

/// Seeded shuffle, then the first round(train * n) rows go to the training
/// set. Fractions must be non-negative and sum to 1.
std::pair<std::vector<Sample>, std::vector<Sample>> split(
    std::span<const Sample> rows, double train_fraction, double test_fraction,
    std::uint64_t seed);

}  // namespace ehspc
