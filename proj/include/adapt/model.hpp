#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "adapt/estimators.hpp"
#include "adapt/feature.hpp"
#include "adapt/instance.hpp"
#include "adapt/parameter.hpp"
#include "adapt/types.hpp"

namespace adapt {

enum class Method {
  Fe,
  Msda,
  Coral,
  Kmm,
  Kliep,
  TrAdaBoost,
  TrAdaBoostR2,
  TwoStageTrAdaBoostR2,
  RegularTransferLr,
  RegularTransferLc,
  SourceOnly,  // no-adaptation baseline
};

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

/// Supervised methods require yt at fit.
bool method_is_supervised(Method m);

/// Rejects any hyperparameter key the method does not define.
void validate_hyperparams(Method m, const nlohmann::json& hp);

/// Two-stage methods compute the adaptation artifact before the estimator;
/// the artifact never reads source labels.
bool method_is_two_stage(Method m);

struct AdapterSpec {
  Method method = Method::SourceOnly;
  nlohmann::json hyperparams = nlohmann::json::object();
  estimators::EstimatorSpec base;
  bool base_given = false;            // explicit base_estimator in config
  std::optional<TaskKind> task;       // override for stump bases
  std::uint64_t seed = 0;
};

// Method-specific fitted state.
struct WeightState {            // kmm / kliep
  Vector weights;
  double gamma = 0.0;
  std::optional<instance::KliepSelection> selection;
};
struct FeState {};
struct CoralState {
  feature::CoralTransform transform;
};
struct MsdaState {
  feature::MsdaModel model;
};
struct BoostState {
  instance::BoostEnsemble ensemble;
};
struct TransferState {
  Vector prior;  // source coefficients, intercept last
  double lambda = 1.0;
};
struct SourceOnlyState {};

using ModelState = std::variant<WeightState, FeState, CoralState, MsdaState,
                                BoostState, TransferState, SourceOnlyState>;

struct FittedModel {
  Method method = Method::SourceOnly;
  TaskKind task = TaskKind::Regression;
  Index n_features = 0;  // feature count before any augmentation/transform
  nlohmann::json hyperparams = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
  ModelState state;
  std::optional<estimators::BaseModel> estimator;
};

/// Fits the adaptation artifact (two-stage methods first) and the base
/// estimator per the adapter contract. Throws MissingTargetLabels,
/// DimensionMismatch, NonFiniteInput and method-specific errors.
FittedModel fit(const AdapterSpec& spec, const AdaptInput& input);

/// Applies the method's transform or ensemble rule, then the estimator.
/// X must have the feature count seen at fit (pre-transform).
Vector predict(const FittedModel& model, const Matrix& X);

double evaluate(const Vector& pred, const Vector& truth, MetricKind metric, TaskKind task);

/// Model file: single JSON document, format_version 1; matrices stored as
/// row-major arrays of arrays. Doubles round-trip exactly, so a reloaded
/// model predicts bit-identically.
std::string serialize_model(const FittedModel& model);
FittedModel deserialize_model(const std::string& bytes);

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

}  // namespace adapt
