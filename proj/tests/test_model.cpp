#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "adapt/data.hpp"
#include "adapt/model.hpp"
#include "oracles.hpp"

using namespace adapt;

namespace {

Matrix gaussian(Rng& rng, Index n, Index d, double mean = 0.0, double sd = 1.0) {
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = rng.normal(mean, sd);
  return X;
}

AdaptInput classification_input(std::uint64_t seed, Index ns = 30, Index nt = 20) {
  return data::gen_sample_bias(ns, nt, 1.0, seed);
}

}  // namespace

TEST_CASE("fit dispatch and contracts") {
  SUBCASE("kmm on identical domains gives near-uniform weights") {
    Rng rng(2);
    const Matrix X = gaussian(rng, 20, 2);
    AdaptInput input;
    input.Xs = X;
    input.ys = X.col(0);
    input.Xt = X;
    AdapterSpec spec;
    spec.method = Method::Kmm;
    const auto model = fit(spec, input);
    const auto& state = std::get<WeightState>(model.state);
    CHECK((state.weights.array() - 1.0).abs().maxCoeff() <= 0.05);
  }

  SUBCASE("supervised methods require target labels") {
    const auto labeled = classification_input(5);
    AdaptInput input = labeled;
    input.yt.reset();
    AdapterSpec spec;
    spec.method = Method::TrAdaBoost;
    CHECK_THROWS_AS(fit(spec, input), AdaptError);
    try {
      fit(spec, input);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::MissingTargetLabels);
    }
  }

  SUBCASE("fe trains on source plus labeled targets in 3d columns") {
    Rng rng(6);
    AdaptInput input;
    input.Xs = gaussian(rng, 10, 3);
    input.ys = input.Xs.col(0);
    input.Xt = gaussian(rng, 5, 3);
    Vector yt = input.Xt.col(0);
    input.yt = yt;
    input.labeled_target_count = 2;

    AdapterSpec spec;
    spec.method = Method::Fe;
    const auto model = fit(spec, input);
    const auto& lm = std::get<estimators::LinearModel>(*model.estimator);
    CHECK(lm.beta.size() == 9);

    // Rows beyond the labeled count must not influence the fit at all.
    AdaptInput perturbed = input;
    (*perturbed.yt)(3) += 100.0;
    (*perturbed.yt)(4) -= 7.0;
    perturbed.Xt.row(2).setConstant(42.0);
    perturbed.Xt.row(4).setConstant(-9.0);
    const auto model2 = fit(spec, perturbed);
    const auto& lm2 = std::get<estimators::LinearModel>(*model2.estimator);
    CHECK((lm.stacked() - lm2.stacked()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("column mismatch between domains") {
    Rng rng(7);
    AdaptInput input;
    input.Xs = gaussian(rng, 5, 2);
    input.ys = Vector::Zero(5);
    input.Xt = gaussian(rng, 5, 3);
    AdapterSpec spec;
    spec.method = Method::Kmm;
    CHECK_THROWS_AS(fit(spec, input), AdaptError);
  }

  SUBCASE("non-finite input is rejected") {
    Rng rng(8);
    AdaptInput input;
    input.Xs = gaussian(rng, 5, 2);
    input.Xs(2, 1) = std::numeric_limits<double>::quiet_NaN();
    input.ys = Vector::Zero(5);
    input.Xt = gaussian(rng, 5, 2);
    AdapterSpec spec;
    spec.method = Method::Coral;
    CHECK_THROWS_AS(fit(spec, input), AdaptError);
  }

  SUBCASE("unknown hyperparameter keys are named in the error") {
    const auto input = classification_input(9);
    AdapterSpec spec;
    spec.method = Method::Kmm;
    spec.hyperparams["gama"] = 0.5;
    try {
      fit(spec, input);
      CHECK(false);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
      CHECK(std::string(e.what()).find("gama") != std::string::npos);
    }
  }
}

TEST_CASE("predict semantics") {
  SUBCASE("coral predicts the target in its native space") {
    Rng rng(11);
    AdaptInput input;
    input.Xs = gaussian(rng, 60, 2, 1.0, 2.0);
    input.ys = input.Xs.col(0) + input.Xs.col(1);
    input.Xt = gaussian(rng, 40, 2);
    AdapterSpec spec;
    spec.method = Method::Coral;
    const auto model = fit(spec, input);
    const Vector via_predict = predict(model, input.Xt);
    const Vector direct = estimators::predict_base(*model.estimator, input.Xt);
    CHECK((via_predict - direct).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("empty input is rejected") {
    Rng rng(12);
    AdaptInput input;
    input.Xs = gaussian(rng, 10, 2);
    input.ys = input.Xs.col(0);
    input.Xt = gaussian(rng, 10, 2);
    AdapterSpec spec;
    spec.method = Method::SourceOnly;
    const auto model = fit(spec, input);
    const Matrix empty(0, 2);
    CHECK_THROWS_AS(predict(model, empty), AdaptError);
  }

  SUBCASE("prediction is row-decomposable") {
    const auto input = classification_input(13, 40, 30);
    AdapterSpec spec;
    spec.method = Method::TrAdaBoost;
    const auto model = fit(spec, input);
    Rng rng(14);
    const Matrix A = gaussian(rng, 6, 2);
    const Matrix B = gaussian(rng, 9, 2);
    Matrix AB(15, 2);
    AB.topRows(6) = A;
    AB.bottomRows(9) = B;
    const Vector joint = predict(model, AB);
    const Vector a = predict(model, A);
    const Vector b = predict(model, B);
    CHECK((joint.head(6) - a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((joint.tail(9) - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("evaluate") {
  Vector a(2), b(2);
  a << 1.0, 2.0;
  b << 1.0, 2.0;
  CHECK(evaluate(a, b, MetricKind::Mse, TaskKind::Regression) == 0.0);

  Vector p(4), t(4);
  p << 0.0, 1.0, 1.0, 0.0;
  t << 0.0, 1.0, 0.0, 0.0;
  CHECK(evaluate(p, t, MetricKind::Accuracy, TaskKind::Classification) == 0.75);

  Vector x(1), y(1);
  x << 3.0;
  y << 1.0;
  CHECK(evaluate(x, y, MetricKind::Mae, TaskKind::Regression) == 2.0);

  CHECK_THROWS_AS(evaluate(a, p, MetricKind::Mse, TaskKind::Regression), AdaptError);
  CHECK_THROWS_AS(evaluate(a, b, MetricKind::Accuracy, TaskKind::Regression), AdaptError);
  CHECK_THROWS_AS(evaluate(p, t, MetricKind::Mse, TaskKind::Classification), AdaptError);
}

TEST_CASE("fit is deterministic given input and seed") {
  const auto input = data::gen_covshift_1d(40, 30, 17);
  Rng rng(18);
  const Matrix grid = gaussian(rng, 25, 1);
  for (const Method m : {Method::Kmm, Method::Kliep, Method::TrAdaBoostR2,
                         Method::RegularTransferLr, Method::Msda}) {
    AdapterSpec spec;
    spec.method = m;
    spec.seed = 5;
    const Vector p1 = predict(fit(spec, input), grid);
    const Vector p2 = predict(fit(spec, input), grid);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("unsupervised adaptation never reads source labels") {
  const auto input = data::gen_covshift_1d(30, 25, 19);
  AdaptInput perturbed = input;
  perturbed.ys = input.ys.array() + 3.5;

  SUBCASE("kmm and kliep weights are label-free") {
    for (const Method m : {Method::Kmm, Method::Kliep}) {
      AdapterSpec spec;
      spec.method = m;
      spec.seed = 3;
      const auto w1 = std::get<WeightState>(fit(spec, input).state).weights;
      const auto w2 = std::get<WeightState>(fit(spec, perturbed).state).weights;
      CHECK((w1 - w2).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("coral transform and msda layers are label-free") {
    AdapterSpec coral;
    coral.method = Method::Coral;
    const auto t1 = std::get<CoralState>(fit(coral, input).state).transform;
    const auto t2 = std::get<CoralState>(fit(coral, perturbed).state).transform;
    CHECK((t1.M - t2.M).cwiseAbs().maxCoeff() == 0.0);

    AdapterSpec msda;
    msda.method = Method::Msda;
    const auto m1 = std::get<MsdaState>(fit(msda, input).state).model;
    const auto m2 = std::get<MsdaState>(fit(msda, perturbed).state).model;
    for (std::size_t k = 0; k < m1.layers.size(); ++k)
      CHECK((m1.layers[k] - m2.layers[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("regular transfer accepts a pre-fitted prior from a model file") {
  const auto source = data::gen_covshift_1d(60, 30, 31);
  AdapterSpec src_spec;
  src_spec.method = Method::SourceOnly;
  const auto src_model = fit(src_spec, source);
  const std::string path =
      (std::filesystem::temp_directory_path() / "adapt_prior_model_test.json").string();
  save_model(src_model, path);

  AdapterSpec rt;
  rt.method = Method::RegularTransferLr;
  rt.hyperparams["prior_model"] = path;
  rt.hyperparams["lambda"] = 1e8;
  const auto transferred = fit(rt, source);
  std::filesystem::remove(path);

  // With a huge penalty the transferred coefficients sit on the file's prior.
  const auto& src_lm = std::get<estimators::LinearModel>(*src_model.estimator);
  const auto& out_lm = std::get<estimators::LinearModel>(*transferred.estimator);
  CHECK((out_lm.stacked() - src_lm.stacked()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("serialization") {
  SUBCASE("ridge model round-trips coefficients exactly") {
    const auto input = data::gen_covshift_1d(30, 20, 21);
    AdapterSpec spec;
    spec.method = Method::RegularTransferLr;
    const auto model = fit(spec, input);
    const auto reloaded = deserialize_model(serialize_model(model));
    const auto& a = std::get<estimators::LinearModel>(*model.estimator);
    const auto& b = std::get<estimators::LinearModel>(*reloaded.estimator);
    CHECK((a.stacked() - b.stacked()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("boost ensemble round-trips predictions bit-identically") {
    const auto input = classification_input(23, 50, 30);
    AdapterSpec spec;
    spec.method = Method::TrAdaBoost;
    spec.hyperparams["n_iters"] = 10;
    const auto model = fit(spec, input);
    const auto reloaded = deserialize_model(serialize_model(model));
    Rng rng(24);
    const Matrix probe = gaussian(rng, 50, 2);
    const Vector p1 = predict(model, probe);
    const Vector p2 = predict(reloaded, probe);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("truncated bytes are a corrupt model file") {
    const auto input = data::gen_covshift_1d(20, 15, 25);
    AdapterSpec spec;
    spec.method = Method::Kmm;
    const std::string bytes = serialize_model(fit(spec, input));
    const std::string truncated = bytes.substr(0, bytes.size() / 2);
    try {
      deserialize_model(truncated);
      CHECK(false);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::CorruptModelFile);
    }
  }

  SUBCASE("a malformed field reports its location") {
    const auto input = data::gen_covshift_1d(20, 15, 26);
    AdapterSpec spec;
    spec.method = Method::Coral;
    auto j = nlohmann::json::parse(serialize_model(fit(spec, input)));
    j["state"]["M"] = "oops";
    try {
      deserialize_model(j.dump());
      CHECK(false);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::CorruptModelFile);
      CHECK(std::string(e.what()).find("/state/M") != std::string::npos);
    }
  }
}
