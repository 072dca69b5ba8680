#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adapt/data.hpp"
#include "adapt/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("adapt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

CliResult run_cli(const Scratch& scratch, const std::string& args) {
  CliResult result;
  const std::string err_path = scratch.file("stderr.txt");
  const std::string cmd = std::string(ADAPT_CLI_PATH) + " " + args + " 2>" + err_path;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) result.out.append(buf, got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream err(err_path);
  std::ostringstream es;
  es << err.rdbuf();
  result.err = es.str();
  return result;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

long count_lines(const std::string& text) {
  long n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream(path) << j.dump(2);
}

}  // namespace

TEST_CASE("gen-data") {
  Scratch scratch;

  SUBCASE("covshift writes header plus n rows, byte-identical on rerun") {
    const std::string out = scratch.file("d1");
    const auto r1 = run_cli(scratch, "gen-data --kind covshift1d --n 100 --seed 1 --out " + out);
    CHECK(r1.exit_code == 0);
    const std::string src1 = read_file(out + "/source.csv");
    const std::string tgt1 = read_file(out + "/target.csv");
    CHECK(count_lines(src1) == 101);
    CHECK(count_lines(tgt1) == 101);

    const auto r2 = run_cli(scratch, "gen-data --kind covshift1d --n 100 --seed 1 --out " + out);
    CHECK(r2.exit_code == 0);
    CHECK(read_file(out + "/source.csv") == src1);
    CHECK(read_file(out + "/target.csv") == tgt1);
  }

  SUBCASE("angle outside the valid range exits 2") {
    const auto r = run_cli(scratch, "gen-data --kind rotated_moons --angle 270 --out " +
                                        scratch.file("d2"));
    CHECK(r.exit_code == 2);
  }

  SUBCASE("unlabeled target omits the label column") {
    const std::string out = scratch.file("d3");
    const auto r = run_cli(scratch,
                           "gen-data --kind sample_bias --n 50 --seed 3 --unlabeled-target "
                           "--out " + out);
    CHECK(r.exit_code == 0);
    const std::string header = read_file(out + "/target.csv").substr(0, 20);
    CHECK(header.find("y") == std::string::npos);
  }
}

TEST_CASE("fit") {
  Scratch scratch;

  SUBCASE("valid kmm config fits and the model round-trips") {
    const std::string config = scratch.file("kmm.json");
    write_json(config, json{{"method", "kmm"},
                            {"dataset", {{"kind", "covshift1d"}, {"n", 60}}},
                            {"seed", 1}});
    const std::string model_path = scratch.file("kmm_model.json");
    const auto r = run_cli(scratch, "fit --config " + config + " --out " + model_path);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(model_path));
    const json summary = json::parse(r.out);
    CHECK(summary["method"] == "kmm");
    CHECK(summary.contains("train_time_ms"));

    const auto model = adapt::load_model(model_path);
    const auto reloaded = adapt::deserialize_model(adapt::serialize_model(model));
    adapt::Matrix probe(3, 1);
    probe << -0.2, 0.0, 0.4;
    CHECK((adapt::predict(model, probe) - adapt::predict(reloaded, probe))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("unknown hyperparameter key exits 2 and is named") {
    const std::string config = scratch.file("bad.json");
    write_json(config, json{{"method", "kmm"},
                            {"hyperparams", {{"gama", 0.5}}},
                            {"dataset", {{"kind", "covshift1d"}, {"n", 40}}},
                            {"seed", 1}});
    const auto r = run_cli(scratch, "fit --config " + config + " --out " +
                                        scratch.file("m.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("gama") != std::string::npos);
    const json diag = json::parse(r.err);
    CHECK(diag.contains("code"));
    CHECK(diag.contains("message"));
    CHECK(diag.contains("context"));
  }

  SUBCASE("supervised method on an unlabeled target exits 4") {
    const std::string data_dir = scratch.file("unlabeled");
    REQUIRE(run_cli(scratch,
                    "gen-data --kind sample_bias --n 60 --seed 5 --unlabeled-target --out " +
                        data_dir)
                .exit_code == 0);
    const std::string config = scratch.file("trada.json");
    write_json(config,
               json{{"method", "tradaboost"},
                    {"dataset",
                     {{"kind", "csv"},
                      {"source", data_dir + "/source.csv"},
                      {"target", data_dir + "/target.csv"}}},
                    {"seed", 1}});
    const auto r = run_cli(scratch, "fit --config " + config + " --out " +
                                        scratch.file("m2.json"));
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("MissingTargetLabels") != std::string::npos);
  }
}

TEST_CASE("eval") {
  Scratch scratch;

  // A hand-built linear model predicting exactly y = 2 x0.
  adapt::FittedModel model;
  model.method = adapt::Method::SourceOnly;
  model.task = adapt::TaskKind::Regression;
  model.n_features = 1;
  adapt::estimators::LinearModel lm;
  lm.beta = adapt::Vector::Constant(1, 2.0);
  lm.intercept = 0.0;
  lm.task = adapt::TaskKind::Regression;
  model.estimator = lm;
  model.state = adapt::SourceOnlyState{};
  const std::string model_path = scratch.file("exact.json");
  adapt::save_model(model, model_path);

  adapt::Matrix X(4, 1);
  X << -1.0, 0.5, 2.0, 3.25;
  const adapt::Vector y = 2.0 * X.col(0);
  adapt::data::save_csv(scratch.file("exact.csv"), X, &y);

  SUBCASE("perfect predictions give zero mse") {
    const auto r = run_cli(scratch, "eval --model " + model_path + " --data " +
                                        scratch.file("exact.csv") + " --metric mse");
    CHECK(r.exit_code == 0);
    const json out = json::parse(r.out);
    CHECK(out["value"] == 0.0);
    CHECK(out["n"] == 4);
  }

  SUBCASE("column mismatch exits 4") {
    adapt::Matrix W(2, 3);
    W << 1, 2, 3, 4, 5, 6;
    const adapt::Vector wy = W.col(0);
    adapt::data::save_csv(scratch.file("wide.csv"), W, &wy);
    const auto r = run_cli(scratch, "eval --model " + model_path + " --data " +
                                        scratch.file("wide.csv") + " --metric mse");
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("DimensionMismatch") != std::string::npos);
  }

  SUBCASE("accuracy against a regression model exits 2") {
    const auto r = run_cli(scratch, "eval --model " + model_path + " --data " +
                                        scratch.file("exact.csv") + " --metric accuracy");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("IncompatibleMetric") != std::string::npos);
  }
}

TEST_CASE("benchmark") {
  Scratch scratch;

  SUBCASE("grid arithmetic includes the baseline") {
    const std::string config = scratch.file("bench.json");
    write_json(config, json{{"methods", json::array({json{{"name", "kmm"}},
                                                     json{{"name", "coral"}}})},
                            {"datasets", json::array({json{{"kind", "covshift1d"},
                                                           {"n", 50}}})},
                            {"seeds", {1, 2, 3}},
                            {"metric", "mse"}});
    const std::string report_path = scratch.file("report.json");
    const auto r = run_cli(scratch, "benchmark --config " + config + " --out " + report_path);
    CHECK(r.exit_code == 0);
    const json report = json::parse(read_file(report_path));
    CHECK(report["records"].size() == 9);  // (2 methods + baseline) x 3 seeds
    bool has_baseline = false;
    for (const auto& rec : report["records"])
      if (rec["method"] == "source_only") has_baseline = true;
    CHECK(has_baseline);
  }

  SUBCASE("one failing method is recorded, not fatal") {
    const std::string config = scratch.file("bench2.json");
    // tradaboost needs binary labels; covshift labels are continuous.
    write_json(config, json{{"methods", json::array({json{{"name", "kmm"}},
                                                     json{{"name", "tradaboost"}}})},
                            {"datasets", json::array({json{{"kind", "covshift1d"},
                                                           {"n", 40}}})},
                            {"seeds", {1}},
                            {"metric", "mse"}});
    const std::string report_path = scratch.file("report2.json");
    const auto r = run_cli(scratch, "benchmark --config " + config + " --out " + report_path);
    CHECK(r.exit_code == 0);
    const json report = json::parse(read_file(report_path));
    long failed = 0;
    for (const auto& rec : report["records"])
      if (rec["failed"].get<bool>()) ++failed;
    CHECK(failed == 1);
  }

  SUBCASE("all runs failing exits 5") {
    const std::string config = scratch.file("bench3.json");
    write_json(config,
               json{{"methods", json::array({json{{"name", "kmm"}}})},
                    {"datasets", json::array({json{{"kind", "csv"},
                                                   {"source", scratch.file("nope.csv")},
                                                   {"target", scratch.file("nope.csv")}}})},
                    {"seeds", {1}},
                    {"metric", "mse"}});
    const auto r = run_cli(scratch, "benchmark --config " + config + " --out " +
                                        scratch.file("report3.json"));
    CHECK(r.exit_code == 5);
  }

  SUBCASE("unknown top-level key exits 2") {
    const std::string config = scratch.file("bench4.json");
    write_json(config, json{{"methods", json::array({json{{"name", "kmm"}}})},
                            {"datasets", json::array({json{{"kind", "covshift1d"}}})},
                            {"seeds", {1}},
                            {"metrics", "mse"}});
    const auto r = run_cli(scratch, "benchmark --config " + config + " --out " +
                                        scratch.file("report4.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("metrics") != std::string::npos);
  }
}
