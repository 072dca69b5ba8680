#include "adapt/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "adapt/data.hpp"

namespace adapt::benchmark {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw AdaptError(ErrorCode::InvalidConfig,
                       "unknown key \"" + key + "\" in " + where);
    }
    (void)value;
  }
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw AdaptError(ErrorCode::InvalidConfig, where + " requires \"" + key + "\"");
  }
  return j[key];
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) {
    throw AdaptError(ErrorCode::InvalidConfig, where + "/" + key + " must be a string");
  }
  return v.get<std::string>();
}

double number_or(const json& j, const std::string& key, double fallback,
                 const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw AdaptError(ErrorCode::InvalidConfig, where + "/" + key + " must be a number");
  }
  return j[key].get<double>();
}

Index index_or(const json& j, const std::string& key, Index fallback,
               const std::string& where) {
  const double v = number_or(j, key, static_cast<double>(fallback), where);
  if (v < 0 || v != std::floor(v)) {
    throw AdaptError(ErrorCode::InvalidConfig,
                     where + "/" + key + " must be a nonnegative integer");
  }
  return static_cast<Index>(v);
}

MethodSpec parse_method(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"name", "hyperparams", "base_estimator", "task"}, where);
  MethodSpec spec;
  spec.display_name = require_string(j, "name", where);
  spec.adapter.method = method_from_name(spec.display_name);
  if (j.contains("hyperparams")) {
    if (!j["hyperparams"].is_object()) {
      throw AdaptError(ErrorCode::InvalidConfig, where + "/hyperparams must be an object");
    }
    spec.adapter.hyperparams = j["hyperparams"];
  }
  validate_hyperparams(spec.adapter.method, spec.adapter.hyperparams);
  if (j.contains("base_estimator")) {
    const json& be = j["base_estimator"];
    const std::string bw = where + "/base_estimator";
    reject_unknown_keys(be, {"name", "hyperparams"}, bw);
    spec.adapter.base.kind = estimators::estimator_from_name(require_string(be, "name", bw));
    if (be.contains("hyperparams")) {
      reject_unknown_keys(be["hyperparams"], {"lambda"}, bw + "/hyperparams");
      spec.adapter.base.lambda = number_or(be["hyperparams"], "lambda", 1e-3, bw);
    }
    spec.adapter.base_given = true;
  }
  if (j.contains("task")) {
    spec.adapter.task = task_from_name(require_string(j, "task", where));
  }
  return spec;
}

DatasetSpec parse_dataset(const json& j, const std::string& where, std::size_t ordinal) {
  reject_unknown_keys(j,
                      {"kind", "name", "n", "n_source", "n_target", "angle_deg", "noise",
                       "bias_strength", "source", "target", "target_column", "n_labeled"},
                      where);
  DatasetSpec ds;
  const std::string kind = require_string(j, "kind", where);
  if (kind == "covshift1d") ds.kind = DatasetSpec::Kind::Covshift1d;
  else if (kind == "rotated_moons") ds.kind = DatasetSpec::Kind::RotatedMoons;
  else if (kind == "sample_bias") ds.kind = DatasetSpec::Kind::SampleBias;
  else if (kind == "csv") ds.kind = DatasetSpec::Kind::Csv;
  else {
    throw AdaptError(ErrorCode::InvalidConfig, where + " has unknown kind \"" + kind + "\"");
  }

  const Index n_both = index_or(j, "n", 100, where);
  ds.n_source = index_or(j, "n_source", n_both, where);
  ds.n_target = index_or(j, "n_target", n_both, where);
  ds.angle_deg = number_or(j, "angle_deg", 30.0, where);
  ds.noise = number_or(j, "noise", 0.1, where);
  ds.bias_strength = number_or(j, "bias_strength", 2.0, where);
  if (j.contains("n_labeled")) ds.n_labeled = index_or(j, "n_labeled", 0, where);
  else ds.n_labeled = -1;  // every labeled target row stays available

  if (ds.kind == DatasetSpec::Kind::Csv) {
    ds.source_path = require_string(j, "source", where);
    ds.target_path = require_string(j, "target", where);
    if (j.contains("target_column")) ds.target_column = require_string(j, "target_column", where);
  }
  ds.name = j.contains("name") ? require_string(j, "name", where)
                               : kind + "#" + std::to_string(ordinal);
  return ds;
}

std::vector<std::uint64_t> parse_seeds(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw AdaptError(ErrorCode::InvalidConfig, where + " must be a nonempty array");
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : j) {
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw AdaptError(ErrorCode::InvalidConfig, where + " entries must be nonnegative integers");
    }
    seeds.push_back(s.get<std::uint64_t>());
  }
  return seeds;
}

}  // namespace

RunConfig parse_fit_config(const json& j) {
  if (!j.is_object()) {
    throw AdaptError(ErrorCode::InvalidConfig, "config must be a JSON object");
  }
  reject_unknown_keys(
      j, {"method", "hyperparams", "base_estimator", "task", "dataset", "seed", "metric"},
      "config");
  RunConfig config;
  json method_obj = json::object();
  method_obj["name"] = require_string(j, "method", "config");
  if (j.contains("hyperparams")) method_obj["hyperparams"] = j["hyperparams"];
  if (j.contains("base_estimator")) method_obj["base_estimator"] = j["base_estimator"];
  if (j.contains("task")) method_obj["task"] = j["task"];
  config.methods.push_back(parse_method(method_obj, "config"));

  config.datasets.push_back(parse_dataset(require(j, "dataset", "config"), "config/dataset", 0));

  const json& seed = require(j, "seed", "config");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw AdaptError(ErrorCode::InvalidConfig, "config/seed must be a nonnegative integer");
  }
  config.seeds.push_back(seed.get<std::uint64_t>());
  config.methods[0].adapter.seed = config.seeds[0];

  if (j.contains("metric")) {
    config.metric = metric_from_name(require_string(j, "metric", "config"));
  }
  return config;
}

RunConfig parse_benchmark_config(const json& j) {
  if (!j.is_object()) {
    throw AdaptError(ErrorCode::InvalidConfig, "config must be a JSON object");
  }
  reject_unknown_keys(j, {"methods", "datasets", "seeds", "metric"}, "config");
  RunConfig config;

  const json& methods = require(j, "methods", "config");
  if (!methods.is_array() || methods.empty()) {
    throw AdaptError(ErrorCode::InvalidConfig, "config/methods must be a nonempty array");
  }
  for (std::size_t i = 0; i < methods.size(); ++i)
    config.methods.push_back(
        parse_method(methods[i], "config/methods[" + std::to_string(i) + "]"));

  const json& datasets = require(j, "datasets", "config");
  if (!datasets.is_array() || datasets.empty()) {
    throw AdaptError(ErrorCode::InvalidConfig, "config/datasets must be a nonempty array");
  }
  for (std::size_t i = 0; i < datasets.size(); ++i)
    config.datasets.push_back(
        parse_dataset(datasets[i], "config/datasets[" + std::to_string(i) + "]", i));

  config.seeds = parse_seeds(require(j, "seeds", "config"), "config/seeds");
  if (j.contains("metric")) {
    config.metric = metric_from_name(require_string(j, "metric", "config"));
  }

  // The no-adaptation baseline always runs, sharing the first method's base.
  bool has_baseline = false;
  for (const auto& m : config.methods)
    if (m.adapter.method == Method::SourceOnly) has_baseline = true;
  if (!has_baseline) {
    MethodSpec baseline;
    baseline.display_name = "source_only";
    baseline.adapter.method = Method::SourceOnly;
    baseline.adapter.base = config.methods[0].adapter.base;
    baseline.adapter.base_given = config.methods[0].adapter.base_given;
    baseline.adapter.task = config.methods[0].adapter.task;
    config.methods.push_back(std::move(baseline));
  }
  return config;
}

PreparedDataset prepare_dataset(const DatasetSpec& ds, std::uint64_t seed) {
  PreparedDataset prep;
  switch (ds.kind) {
    case DatasetSpec::Kind::Covshift1d:
      prep.input = data::gen_covshift_1d(ds.n_source, ds.n_target, seed);
      break;
    case DatasetSpec::Kind::RotatedMoons:
      prep.input = data::gen_rotated_moons(ds.n_target, ds.angle_deg, ds.noise, seed);
      break;
    case DatasetSpec::Kind::SampleBias:
      prep.input = data::gen_sample_bias(ds.n_source, ds.n_target, ds.bias_strength, seed);
      break;
    case DatasetSpec::Kind::Csv: {
      const auto src = data::load_csv(ds.source_path, ds.target_column, true);
      const auto tgt = data::load_csv(ds.target_path, ds.target_column, false);
      prep.input.Xs = src.X;
      prep.input.ys = *src.y;
      prep.input.Xt = tgt.X;
      prep.input.yt = tgt.y;
      break;
    }
  }
  if (ds.n_labeled >= 0) {
    if (!prep.input.yt) {
      throw AdaptError(ErrorCode::MissingTargetLabels,
                       "n_labeled given but the target data is unlabeled");
    }
    prep.input.labeled_target_count = std::min<Index>(ds.n_labeled, prep.input.Xt.rows());
  }
  const Index eval_start = ds.n_labeled >= 0 ? std::min<Index>(ds.n_labeled, prep.input.Xt.rows()) : 0;
  if (prep.input.yt && eval_start < prep.input.Xt.rows()) {
    prep.X_eval = prep.input.Xt.bottomRows(prep.input.Xt.rows() - eval_start);
    prep.y_eval = prep.input.yt->tail(prep.input.Xt.rows() - eval_start);
  }
  return prep;
}

json Report::to_json(MetricKind metric) const {
  json out;
  out["format_version"] = 1;
  out["metric"] = std::string(metric_name(metric));
  json recs = json::array();
  for (const auto& r : records) {
    json rec{{"method", r.method}, {"dataset", r.dataset}, {"seed", r.seed},
             {"failed", r.failed}, {"time_ms", r.time_ms}, {"warnings", r.warnings}};
    if (r.failed) rec["error"] = r.error;
    else rec["value"] = r.value;
    recs.push_back(std::move(rec));
  }
  out["records"] = std::move(recs);

  json aggs = json::array();
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : records) {
    const auto key = std::pair{r.method, r.dataset};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [method, dataset] : keys) {
    double sum = 0.0, sum2 = 0.0;
    long n_ok = 0, n_fail = 0;
    for (const auto& r : records) {
      if (r.method != method || r.dataset != dataset) continue;
      if (r.failed) { ++n_fail; continue; }
      sum += r.value;
      sum2 += r.value * r.value;
      ++n_ok;
    }
    json agg{{"method", method}, {"dataset", dataset}, {"n_runs", n_ok + n_fail},
             {"n_failed", n_fail}};
    if (n_ok > 0) {
      const double mean = sum / static_cast<double>(n_ok);
      const double var = std::max(0.0, sum2 / static_cast<double>(n_ok) - mean * mean);
      agg["mean"] = mean;
      agg["stddev"] = std::sqrt(var);
    }
    aggs.push_back(std::move(agg));
  }
  out["aggregates"] = std::move(aggs);
  return out;
}

Report run_benchmark(const RunConfig& config) {
  Report report;
  for (const auto& method : config.methods) {
    for (const auto& ds : config.datasets) {
      for (const auto seed : config.seeds) {
        RunRecord rec;
        rec.method = method.display_name;
        rec.dataset = ds.name;
        rec.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        try {
          const PreparedDataset prep = prepare_dataset(ds, seed);
          if (prep.y_eval.size() == 0) {
            throw AdaptError(ErrorCode::MissingTargetLabels,
                             "no labeled target rows left for evaluation");
          }
          AdapterSpec spec = method.adapter;
          spec.seed = seed;
          const FittedModel model = fit(spec, prep.input);
          const Vector pred = predict(model, prep.X_eval);
          rec.value = evaluate(pred, prep.y_eval, config.metric, model.task);
          rec.warnings = model.warnings;
        } catch (const AdaptError& e) {
          rec.failed = true;
          rec.error = e.what();
        } catch (const std::exception& e) {
          rec.failed = true;
          rec.error = e.what();
        }
        rec.time_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        report.records.push_back(std::move(rec));
      }
    }
  }
  std::sort(report.records.begin(), report.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return std::tie(a.method, a.dataset, a.seed) <
                     std::tie(b.method, b.dataset, b.seed);
            });
  return report;
}

}  // namespace adapt::benchmark
