#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adapt/benchmark.hpp"
#include "adapt/data.hpp"
#include "adapt/model.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitFit = 4;
constexpr int kExitAllFailed = 5;

int exit_code_for(adapt::ErrorCode code) {
  using adapt::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::IncompatibleMetric:
      return kExitConfig;
    case ErrorCode::IoError:
    case ErrorCode::EmptyFile:
    case ErrorCode::MissingColumn:
    case ErrorCode::UnparseableCell:
    case ErrorCode::CorruptModelFile:
      return kExitData;
    default:
      return kExitFit;
  }
}

void print_diagnostic(const std::string& code, const std::string& message,
                      const std::string& context) {
  json diag{{"code", code}, {"message", message}, {"context", context}};
  std::cerr << diag.dump() << "\n";
}

int fail(const adapt::AdaptError& e, const std::string& context) {
  print_diagnostic(std::string(adapt::error_code_name(e.code())), e.detail(), context);
  return exit_code_for(e.code());
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw adapt::AdaptError(adapt::ErrorCode::IoError, "cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw adapt::AdaptError(adapt::ErrorCode::InvalidConfig,
                            path + " is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw adapt::AdaptError(adapt::ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  out << text;
  if (!out) {
    throw adapt::AdaptError(adapt::ErrorCode::IoError, "failed writing " + path);
  }
}

int cmd_fit(const std::string& config_path, const std::string& out_path) {
  adapt::benchmark::RunConfig config;
  try {
    config = adapt::benchmark::parse_fit_config(load_json_file(config_path));
  } catch (const adapt::AdaptError& e) {
    return fail(e, "fit: config validation");
  }
  try {
    const auto prep = adapt::benchmark::prepare_dataset(config.datasets[0], config.seeds[0]);
    const auto start = std::chrono::steady_clock::now();
    adapt::FittedModel model;
    try {
      model = adapt::fit(config.methods[0].adapter, prep.input);
    } catch (const adapt::AdaptError& e) {
      return fail(e, "fit");
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    adapt::save_model(model, out_path);
    json summary{{"method", std::string(adapt::method_name(model.method))},
                 {"train_time_ms", ms},
                 {"warnings", model.warnings}};
    std::cout << summary.dump() << "\n";
    return kExitOk;
  } catch (const adapt::AdaptError& e) {
    return fail(e, "fit: data");
  }
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& metric_name_str, const std::string& target_column) {
  adapt::MetricKind metric;
  try {
    metric = adapt::metric_from_name(metric_name_str);
  } catch (const adapt::AdaptError& e) {
    return fail(e, "eval: config validation");
  }
  adapt::FittedModel model;
  adapt::data::CsvData csv;
  try {
    model = adapt::load_model(model_path);
    csv = adapt::data::load_csv(data_path, target_column, true);
  } catch (const adapt::AdaptError& e) {
    return fail(e, "eval: data");
  }
  try {
    const bool wants_cls = metric == adapt::MetricKind::Accuracy;
    if (wants_cls != (model.task == adapt::TaskKind::Classification)) {
      throw adapt::AdaptError(adapt::ErrorCode::IncompatibleMetric,
                              std::string(adapt::metric_name(metric)) +
                                  " is incompatible with a " +
                                  std::string(adapt::task_name(model.task)) + " model");
    }
    const adapt::Vector pred = adapt::predict(model, csv.X);
    const double value = adapt::evaluate(pred, *csv.y, metric, model.task);
    json out{{"metric", std::string(adapt::metric_name(metric))},
             {"value", value},
             {"n", csv.X.rows()}};
    std::cout << out.dump() << "\n";
    return kExitOk;
  } catch (const adapt::AdaptError& e) {
    return fail(e, "eval");
  }
}

int cmd_benchmark(const std::string& config_path, const std::string& out_path) {
  adapt::benchmark::RunConfig config;
  try {
    config = adapt::benchmark::parse_benchmark_config(load_json_file(config_path));
  } catch (const adapt::AdaptError& e) {
    return fail(e, "benchmark: config validation");
  }
  try {
    const auto report = adapt::benchmark::run_benchmark(config);
    write_text_file(out_path, report.to_json(config.metric).dump(2) + "\n");
    long ok = 0;
    for (const auto& r : report.records)
      if (!r.failed) ++ok;
    std::cout << json{{"records", report.records.size()}, {"succeeded", ok}}.dump() << "\n";
    return ok > 0 ? kExitOk : kExitAllFailed;
  } catch (const adapt::AdaptError& e) {
    return fail(e, "benchmark");
  }
}

int cmd_gendata(const std::string& kind, long n, long n_source, long n_target,
                double angle, double noise, double bias, std::uint64_t seed,
                bool unlabeled_target, const std::string& out_dir) {
  try {
    const adapt::Index ns = n_source > 0 ? n_source : n;
    const adapt::Index nt = n_target > 0 ? n_target : n;
    adapt::AdaptInput input;
    if (kind == "covshift1d") {
      input = adapt::data::gen_covshift_1d(ns, nt, seed);
    } else if (kind == "rotated_moons") {
      if (!(angle >= 0.0 && angle < 180.0)) {
        throw adapt::AdaptError(adapt::ErrorCode::InvalidConfig,
                                "angle must lie in [0, 180)");
      }
      input = adapt::data::gen_rotated_moons(nt, angle, noise, seed);
    } else if (kind == "sample_bias") {
      input = adapt::data::gen_sample_bias(ns, nt, bias, seed);
    } else {
      throw adapt::AdaptError(adapt::ErrorCode::InvalidConfig,
                              "unknown dataset kind \"" + kind + "\"");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      throw adapt::AdaptError(adapt::ErrorCode::IoError,
                              "cannot create directory " + out_dir);
    }
    const auto src_path = (std::filesystem::path(out_dir) / "source.csv").string();
    const auto tgt_path = (std::filesystem::path(out_dir) / "target.csv").string();
    adapt::data::save_csv(src_path, input.Xs, &input.ys);
    adapt::data::save_csv(tgt_path, input.Xt,
                          unlabeled_target ? nullptr : &*input.yt);
    std::cout << json{{"source", src_path}, {"target", tgt_path}}.dump() << "\n";
    return kExitOk;
  } catch (const adapt::AdaptError& e) {
    return fail(e, "gen-data");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain adaptation toolkit: fit, evaluate and benchmark adapters"};
  app.require_subcommand(1);

  std::string config_path, out_path, model_path, data_path;
  std::string metric = "mse", target_column = "y";

  auto* fit_cmd = app.add_subcommand("fit", "Fit an adapter from a JSON config");
  fit_cmd->add_option("--config", config_path, "JSON run config")->required();
  fit_cmd->add_option("--out", out_path, "output model file")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on labeled CSV data");
  eval_cmd->add_option("--model", model_path, "model file")->required();
  eval_cmd->add_option("--data", data_path, "labeled CSV")->required();
  eval_cmd->add_option("--metric", metric, "mse | mae | accuracy");
  eval_cmd->add_option("--target-column", target_column, "label column name");

  auto* bench_cmd = app.add_subcommand("benchmark", "Run a (method x dataset x seed) grid");
  bench_cmd->add_option("--config", config_path, "JSON benchmark config")->required();
  bench_cmd->add_option("--out", out_path, "output report file")->required();

  std::string kind = "covshift1d", out_dir = ".";
  long n = 100, n_source = 0, n_target = 0;
  double angle = 30.0, noise = 0.1, bias = 2.0;
  std::uint64_t seed = 0;
  bool unlabeled_target = false;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write synthetic source/target CSV files");
  gen_cmd->add_option("--kind", kind, "covshift1d | rotated_moons | sample_bias")->required();
  gen_cmd->add_option("--n", n, "rows per domain");
  gen_cmd->add_option("--n-source", n_source, "source rows (overrides --n)");
  gen_cmd->add_option("--n-target", n_target, "target rows (overrides --n)");
  gen_cmd->add_option("--angle", angle, "rotation angle in degrees");
  gen_cmd->add_option("--noise", noise, "noise standard deviation");
  gen_cmd->add_option("--bias", bias, "bias strength");
  gen_cmd->add_option("--seed", seed, "generator seed");
  gen_cmd->add_flag("--unlabeled-target", unlabeled_target, "omit labels from target.csv");
  gen_cmd->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_diagnostic("InvalidConfig", e.what(), "argument parsing");
    return kExitConfig;
  }

  try {
    if (*fit_cmd) return cmd_fit(config_path, out_path);
    if (*eval_cmd) return cmd_eval(model_path, data_path, metric, target_column);
    if (*bench_cmd) return cmd_benchmark(config_path, out_path);
    if (*gen_cmd)
      return cmd_gendata(kind, n, n_source, n_target, angle, noise, bias, seed,
                         unlabeled_target, out_dir);
  } catch (const adapt::AdaptError& e) {
    return fail(e, "unexpected");
  } catch (const std::exception& e) {
    print_diagnostic("InternalError", e.what(), "unexpected");
    return kExitFit;
  }
  return kExitConfig;
}
