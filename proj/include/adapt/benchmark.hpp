#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adapt/model.hpp"
#include "adapt/types.hpp"

namespace adapt::benchmark {

struct DatasetSpec {
  enum class Kind { Covshift1d, RotatedMoons, SampleBias, Csv };
  Kind kind = Kind::Covshift1d;
  std::string name;  // report key; defaults to the kind name
  Index n_source = 100;
  Index n_target = 100;
  double angle_deg = 30.0;
  double noise = 0.1;
  double bias_strength = 2.0;
  std::string source_path;
  std::string target_path;
  std::string target_column = "y";
  Index n_labeled = -1;  // labeled target rows handed to SDA methods; eval
                         // uses target rows from n_labeled onward. -1 keeps
                         // every labeled row and evaluates on all of them.
};

struct MethodSpec {
  AdapterSpec adapter;
  std::string display_name;
};

struct RunConfig {
  std::vector<MethodSpec> methods;
  std::vector<DatasetSpec> datasets;
  std::vector<std::uint64_t> seeds;
  MetricKind metric = MetricKind::Mse;
};

/// Parses and validates the fit-config schema (single method, single seed).
/// Unknown keys anywhere raise InvalidConfig naming the key.
RunConfig parse_fit_config(const nlohmann::json& j);

/// Parses and validates the benchmark-config schema (method/dataset/seed
/// lists). The source-only baseline is appended automatically.
RunConfig parse_benchmark_config(const nlohmann::json& j);

struct RunRecord {
  std::string method;
  std::string dataset;
  std::uint64_t seed = 0;
  bool failed = false;
  double value = 0.0;
  double time_ms = 0.0;
  std::vector<std::string> warnings;
  std::string error;
};

struct Report {
  std::vector<RunRecord> records;
  nlohmann::json to_json(MetricKind metric) const;
};

/// Builds the dataset with the given seed and splits out the evaluation
/// slice (target rows from n_labeled onward).
struct PreparedDataset {
  AdaptInput input;
  Matrix X_eval;
  Vector y_eval;
};
PreparedDataset prepare_dataset(const DatasetSpec& ds, std::uint64_t seed);

/// Runs the full (method x dataset x seed) grid; per-run failures become
/// failed records rather than aborts. Records come back sorted by
/// (method, dataset, seed).
Report run_benchmark(const RunConfig& config);

}  // namespace adapt::benchmark
