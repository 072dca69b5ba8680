#include "adapt/model.hpp"

#include <fstream>
#include <sstream>

#include "adapt/numerics.hpp"

namespace adapt {

using nlohmann::json;

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Fe: return "fe";
    case Method::Msda: return "msda";
    case Method::Coral: return "coral";
    case Method::Kmm: return "kmm";
    case Method::Kliep: return "kliep";
    case Method::TrAdaBoost: return "tradaboost";
    case Method::TrAdaBoostR2: return "tradaboostr2";
    case Method::TwoStageTrAdaBoostR2: return "two_stage_tradaboostr2";
    case Method::RegularTransferLr: return "regular_transfer_lr";
    case Method::RegularTransferLc: return "regular_transfer_lc";
    case Method::SourceOnly: return "source_only";
  }
  return "source_only";
}

Method method_from_name(std::string_view name) {
  static const std::pair<std::string_view, Method> table[] = {
      {"fe", Method::Fe},
      {"msda", Method::Msda},
      {"coral", Method::Coral},
      {"kmm", Method::Kmm},
      {"kliep", Method::Kliep},
      {"tradaboost", Method::TrAdaBoost},
      {"tradaboostr2", Method::TrAdaBoostR2},
      {"two_stage_tradaboostr2", Method::TwoStageTrAdaBoostR2},
      {"regular_transfer_lr", Method::RegularTransferLr},
      {"regular_transfer_lc", Method::RegularTransferLc},
      {"source_only", Method::SourceOnly},
  };
  for (const auto& [n, m] : table)
    if (n == name) return m;
  throw AdaptError(ErrorCode::InvalidConfig, "unknown method: " + std::string(name));
}

bool method_is_supervised(Method m) {
  switch (m) {
    case Method::Fe:
    case Method::TrAdaBoost:
    case Method::TrAdaBoostR2:
    case Method::TwoStageTrAdaBoostR2:
    case Method::RegularTransferLr:
    case Method::RegularTransferLc:
      return true;
    default:
      return false;
  }
}

bool method_is_two_stage(Method m) {
  switch (m) {
    case Method::Fe:
    case Method::Msda:
    case Method::Coral:
    case Method::Kmm:
    case Method::Kliep:
      return true;
    default:
      return false;
  }
}

namespace {

const std::vector<std::string>& allowed_hyperparams(Method m) {
  static const std::vector<std::string> kmm = {"gamma", "B", "eps"};
  static const std::vector<std::string> kliep = {"n_centers", "cv_folds"};
  static const std::vector<std::string> coral = {"lambda"};
  static const std::vector<std::string> msda = {"p", "n_layers"};
  static const std::vector<std::string> boost = {"n_iters"};
  static const std::vector<std::string> two_stage = {"n_steps", "cv_folds", "n_iters"};
  static const std::vector<std::string> transfer = {"lambda", "source_lambda", "prior_model"};
  static const std::vector<std::string> none = {};
  switch (m) {
    case Method::Kmm: return kmm;
    case Method::Kliep: return kliep;
    case Method::Coral: return coral;
    case Method::Msda: return msda;
    case Method::TrAdaBoost:
    case Method::TrAdaBoostR2: return boost;
    case Method::TwoStageTrAdaBoostR2: return two_stage;
    case Method::RegularTransferLr:
    case Method::RegularTransferLc: return transfer;
    default: return none;
  }
}

double hp_number(const json& hp, const std::string& key, double fallback) {
  if (!hp.contains(key)) return fallback;
  if (!hp[key].is_number()) {
    throw AdaptError(ErrorCode::InvalidConfig, "hyperparameter \"" + key + "\" must be a number");
  }
  return hp[key].get<double>();
}

int hp_int(const json& hp, const std::string& key, int fallback) {
  const double v = hp_number(hp, key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw AdaptError(ErrorCode::InvalidConfig, "hyperparameter \"" + key + "\" must be an integer");
  }
  return i;
}

struct Resolved {
  TaskKind task;
  estimators::EstimatorSpec base;
};

TaskKind base_default_task(estimators::EstimatorKind kind) {
  switch (kind) {
    case estimators::EstimatorKind::Ridge: return TaskKind::Regression;
    case estimators::EstimatorKind::Logistic: return TaskKind::Classification;
    case estimators::EstimatorKind::Stump: return TaskKind::Classification;
  }
  return TaskKind::Regression;
}

void check_base_task(const estimators::EstimatorSpec& base, TaskKind task) {
  using estimators::EstimatorKind;
  if (base.kind == EstimatorKind::Ridge && task != TaskKind::Regression) {
    throw AdaptError(ErrorCode::InvalidConfig, "ridge base requires a regression task");
  }
  if (base.kind == EstimatorKind::Logistic && task != TaskKind::Classification) {
    throw AdaptError(ErrorCode::InvalidConfig, "logistic base requires a classification task");
  }
}

Resolved resolve_task_and_base(const AdapterSpec& spec) {
  using estimators::EstimatorKind;
  Resolved r;
  switch (spec.method) {
    case Method::TrAdaBoost:
      r.task = TaskKind::Classification;
      r.base = spec.base_given ? spec.base
                               : estimators::EstimatorSpec{EstimatorKind::Stump, 0.0};
      break;
    case Method::TrAdaBoostR2:
    case Method::TwoStageTrAdaBoostR2:
      r.task = TaskKind::Regression;
      r.base = spec.base_given ? spec.base
                               : estimators::EstimatorSpec{EstimatorKind::Ridge, 1e-3};
      break;
    case Method::RegularTransferLr:
      r.task = TaskKind::Regression;
      r.base = {EstimatorKind::Ridge, 0.0};
      if (spec.base_given) {
        throw AdaptError(ErrorCode::InvalidConfig,
                         "regular_transfer_lr does not take a base estimator");
      }
      break;
    case Method::RegularTransferLc:
      r.task = TaskKind::Classification;
      r.base = {EstimatorKind::Logistic, 0.0};
      if (spec.base_given) {
        throw AdaptError(ErrorCode::InvalidConfig,
                         "regular_transfer_lc does not take a base estimator");
      }
      break;
    default: {
      if (spec.base_given) {
        r.base = spec.base;
        r.task = spec.task ? *spec.task : base_default_task(spec.base.kind);
      } else if (spec.task) {
        r.task = *spec.task;
        r.base = r.task == TaskKind::Regression
                     ? estimators::EstimatorSpec{EstimatorKind::Ridge, 1e-3}
                     : estimators::EstimatorSpec{EstimatorKind::Logistic, 1e-3};
      } else {
        r.task = TaskKind::Regression;
        r.base = {EstimatorKind::Ridge, 1e-3};
      }
      break;
    }
  }
  if (spec.task && *spec.task != r.task) {
    throw AdaptError(ErrorCode::InvalidConfig,
                     "requested task conflicts with the method/base estimator");
  }
  check_base_task(r.base, r.task);
  return r;
}

}  // namespace

void validate_hyperparams(Method m, const json& hp) {
  if (hp.is_null()) return;
  if (!hp.is_object()) {
    throw AdaptError(ErrorCode::InvalidConfig, "hyperparams must be an object");
  }
  const auto& allowed = allowed_hyperparams(m);
  for (const auto& [key, value] : hp.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw AdaptError(ErrorCode::InvalidConfig,
                       "unknown hyperparameter \"" + key + "\" for method " +
                           std::string(method_name(m)));
    }
    (void)value;
  }
}

namespace {

parameter::SourcePrior make_source_prior(const AdapterSpec& spec, const Matrix& Xs,
                                         const Vector& ys, TaskKind task) {
  parameter::SourcePrior prior;
  prior.task = task;
  if (spec.hyperparams.contains("prior_model")) {
    const auto& pm = spec.hyperparams["prior_model"];
    if (!pm.is_string()) {
      throw AdaptError(ErrorCode::InvalidConfig, "prior_model must be a file path string");
    }
    const FittedModel loaded = load_model(pm.get<std::string>());
    if (!loaded.estimator || !std::holds_alternative<estimators::LinearModel>(*loaded.estimator)) {
      throw AdaptError(ErrorCode::InvalidConfig,
                       "prior_model must contain a linear estimator");
    }
    const auto& lm = std::get<estimators::LinearModel>(*loaded.estimator);
    if (lm.task != task) {
      throw AdaptError(ErrorCode::InvalidConfig, "prior_model task does not match");
    }
    prior.beta_src = lm.stacked();
    return prior;
  }
  const double source_lambda = hp_number(spec.hyperparams, "source_lambda", 1e-6);
  const estimators::LinearModel src =
      task == TaskKind::Regression
          ? estimators::ridge_fit(Xs, ys, source_lambda)
          : estimators::logistic_fit(Xs, ys, source_lambda);
  prior.beta_src = src.stacked();
  return prior;
}

}  // namespace

FittedModel fit(const AdapterSpec& spec, const AdaptInput& input) {
  input.validate();
  validate_hyperparams(spec.method, spec.hyperparams);
  const Resolved resolved = resolve_task_and_base(spec);
  const json& hp = spec.hyperparams;

  const Index k = input.labeled_targets();
  if (method_is_supervised(spec.method) && k == 0) {
    throw AdaptError(ErrorCode::MissingTargetLabels,
                     std::string(method_name(spec.method)) + " requires labeled target data");
  }
  const Matrix Xt_lab = input.Xt.topRows(k);
  const Vector yt_lab = input.yt ? input.yt->head(k) : Vector();

  if (resolved.task == TaskKind::Classification) {
    Vector combined(input.ys.size() + k);
    combined.head(input.ys.size()) = input.ys;
    if (k > 0) combined.tail(k) = yt_lab;
    check_labels(combined, "labels");
  }

  FittedModel model;
  model.method = spec.method;
  model.task = resolved.task;
  model.n_features = input.Xs.cols();
  model.seed = spec.seed;
  model.hyperparams = hp.is_object() ? hp : json::object();
  if (spec.method != Method::RegularTransferLr && spec.method != Method::RegularTransferLc) {
    model.hyperparams["base_estimator"] =
        std::string(estimators::estimator_name(resolved.base.kind));
    if (resolved.base.kind != estimators::EstimatorKind::Stump) {
      model.hyperparams["base_lambda"] = resolved.base.lambda;
    }
  }

  switch (spec.method) {
    case Method::SourceOnly: {
      model.estimator = estimators::fit_base(resolved.base, input.Xs, input.ys, resolved.task);
      model.state = SourceOnlyState{};
      break;
    }
    case Method::Kmm: {
      instance::KmmOptions opts;
      if (hp.contains("gamma")) opts.gamma = hp_number(hp, "gamma", 0.0);
      opts.B = hp_number(hp, "B", 1000.0);
      if (hp.contains("eps")) opts.eps = hp_number(hp, "eps", 0.0);
      opts.seed = spec.seed;
      const auto res = instance::kmm_fit(input.Xs, input.Xt, opts);
      if (!res.converged) model.warnings.push_back("kmm: NonConvergence");
      model.hyperparams["gamma"] = res.gamma;
      model.estimator = estimators::fit_base(resolved.base, input.Xs, input.ys,
                                             resolved.task, &res.weights.w);
      model.state = WeightState{res.weights.w, res.gamma, std::nullopt};
      break;
    }
    case Method::Kliep: {
      instance::KliepOptions opts;
      opts.n_centers = hp_int(hp, "n_centers", 100);
      opts.cv_folds = hp_int(hp, "cv_folds", 5);
      opts.seed = spec.seed;
      const auto res = instance::kliep_fit(input.Xs, input.Xt, opts);
      if (!res.converged) model.warnings.push_back("kliep: NonConvergence");
      model.hyperparams["gamma"] = res.selection.chosen_gamma;
      model.estimator = estimators::fit_base(resolved.base, input.Xs, input.ys,
                                             resolved.task, &res.weights.w);
      model.state = WeightState{res.weights.w, res.selection.chosen_gamma, res.selection};
      break;
    }
    case Method::Fe: {
      const Matrix Xs_aug = feature::fe_augment(input.Xs, feature::DomainRole::Source);
      const Matrix Xt_aug = feature::fe_augment(Xt_lab, feature::DomainRole::Target);
      Matrix X_all(Xs_aug.rows() + Xt_aug.rows(), Xs_aug.cols());
      X_all.topRows(Xs_aug.rows()) = Xs_aug;
      X_all.bottomRows(Xt_aug.rows()) = Xt_aug;
      Vector y_all(input.ys.size() + k);
      y_all.head(input.ys.size()) = input.ys;
      y_all.tail(k) = yt_lab;
      model.estimator = estimators::fit_base(resolved.base, X_all, y_all, resolved.task);
      model.state = FeState{};
      break;
    }
    case Method::Coral: {
      const double lambda = hp_number(hp, "lambda", 1.0);
      model.hyperparams["lambda"] = lambda;
      const auto t = feature::coral_fit(input.Xs, input.Xt, lambda);
      model.estimator = estimators::fit_base(
          resolved.base, feature::coral_transform(t, input.Xs), input.ys, resolved.task);
      model.state = CoralState{t};
      break;
    }
    case Method::Msda: {
      const double p = hp_number(hp, "p", 0.5);
      const int n_layers = hp_int(hp, "n_layers", 3);
      model.hyperparams["p"] = p;
      model.hyperparams["n_layers"] = n_layers;
      const auto m = feature::msda_fit(input.Xs, input.Xt, p, n_layers);
      model.estimator = estimators::fit_base(
          resolved.base, feature::msda_transform(m, input.Xs), input.ys, resolved.task);
      model.state = MsdaState{m};
      break;
    }
    case Method::TrAdaBoost: {
      instance::BoostOptions opts{hp_int(hp, "n_iters", 20), resolved.base};
      model.hyperparams["n_iters"] = opts.n_iters;
      auto ens = instance::tradaboost_fit(input.Xs, input.ys, Xt_lab, yt_lab, opts);
      if (ens.early_stop) model.warnings.push_back("tradaboost: EarlyStop");
      model.state = BoostState{std::move(ens)};
      break;
    }
    case Method::TrAdaBoostR2: {
      instance::BoostOptions opts{hp_int(hp, "n_iters", 20), resolved.base};
      model.hyperparams["n_iters"] = opts.n_iters;
      auto ens = instance::tradaboostr2_fit(input.Xs, input.ys, Xt_lab, yt_lab, opts);
      if (ens.early_stop) model.warnings.push_back("tradaboostr2: EarlyStop");
      model.state = BoostState{std::move(ens)};
      break;
    }
    case Method::TwoStageTrAdaBoostR2: {
      instance::TwoStageOptions opts;
      opts.n_steps = hp_int(hp, "n_steps", 10);
      opts.cv_folds = hp_int(hp, "cv_folds", 5);
      opts.n_iters = hp_int(hp, "n_iters", 20);
      opts.base = resolved.base;
      opts.seed = spec.seed;
      model.hyperparams["n_steps"] = opts.n_steps;
      model.hyperparams["cv_folds"] = opts.cv_folds;
      model.hyperparams["n_iters"] = opts.n_iters;
      auto res = instance::two_stage_tradaboostr2_fit(input.Xs, input.ys, Xt_lab, yt_lab, opts);
      model.state = BoostState{std::move(res.ensemble)};
      break;
    }
    case Method::RegularTransferLr: {
      const double lambda = hp_number(hp, "lambda", 1.0);
      model.hyperparams["lambda"] = lambda;
      const auto prior = make_source_prior(spec, input.Xs, input.ys, TaskKind::Regression);
      model.estimator = parameter::regular_transfer_lr(Xt_lab, yt_lab, prior, lambda);
      model.state = TransferState{prior.beta_src, lambda};
      break;
    }
    case Method::RegularTransferLc: {
      const double lambda = hp_number(hp, "lambda", 1.0);
      model.hyperparams["lambda"] = lambda;
      const auto prior = make_source_prior(spec, input.Xs, input.ys, TaskKind::Classification);
      model.estimator = parameter::regular_transfer_lc(Xt_lab, yt_lab, prior, lambda);
      model.state = TransferState{prior.beta_src, lambda};
      break;
    }
  }
  return model;
}

Vector predict(const FittedModel& model, const Matrix& X) {
  if (X.rows() < 1) {
    throw AdaptError(ErrorCode::DimensionMismatch, "prediction input has no rows");
  }
  if (X.cols() != model.n_features) {
    std::ostringstream os;
    os << "model was fit on " << model.n_features << " features, input has " << X.cols();
    throw AdaptError(ErrorCode::DimensionMismatch, os.str());
  }
  check_matrix(X, "prediction input");

  return std::visit(
      [&](const auto& state) -> Vector {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, BoostState>) {
          return state.ensemble.kind == instance::BoostEnsemble::Kind::ClassificationVote
                     ? instance::tradaboost_predict(state.ensemble, X)
                     : instance::weighted_median_predict(state.ensemble, X);
        } else if constexpr (std::is_same_v<T, FeState>) {
          return estimators::predict_base(*model.estimator,
                                          feature::fe_augment(X, feature::DomainRole::Target));
        } else if constexpr (std::is_same_v<T, MsdaState>) {
          return estimators::predict_base(*model.estimator,
                                          feature::msda_transform(state.model, X));
        } else {
          return estimators::predict_base(*model.estimator, X);
        }
      },
      model.state);
}

double evaluate(const Vector& pred, const Vector& truth, MetricKind metric, TaskKind task) {
  return evaluate_metric(pred, truth, metric, task);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json vec_to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void corrupt(const std::string& where, const std::string& why) {
  throw AdaptError(ErrorCode::CorruptModelFile, "at " + where + ": " + why);
}

const json& field(const json& j, const std::string& where, const std::string& key) {
  if (!j.is_object()) corrupt(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) corrupt(where + "/" + key, "missing field");
  return *it;
}

double num_field(const json& j, const std::string& where, const std::string& key) {
  const json& v = field(j, where, key);
  if (!v.is_number()) corrupt(where + "/" + key, "expected a number");
  return v.get<double>();
}

std::string str_field(const json& j, const std::string& where, const std::string& key) {
  const json& v = field(j, where, key);
  if (!v.is_string()) corrupt(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

Vector json_to_vec(const json& v, const std::string& where) {
  if (!v.is_array()) corrupt(where, "expected an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) corrupt(where + "[" + std::to_string(i) + "]", "expected a number");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix json_to_mat(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) corrupt(where, "expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) corrupt(where + "[0]", "expected a nonempty row array");
  Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      corrupt(where + "[" + std::to_string(i) + "]", "row length mismatch");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number())
        corrupt(where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                "expected a number");
      out(static_cast<Index>(i), static_cast<Index>(j)) = v[i][j].get<double>();
    }
  }
  return out;
}

json base_to_json(const estimators::BaseModel& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, estimators::LinearModel>) {
          return json{{"type", "linear"},
                      {"task", std::string(task_name(v.task))},
                      {"beta", vec_to_json(v.beta)},
                      {"intercept", v.intercept}};
        } else {
          return json{{"type", "stump"},
                      {"task", std::string(task_name(v.task))},
                      {"feature_index", v.feature_index},
                      {"threshold", v.threshold},
                      {"left", v.left_value},
                      {"right", v.right_value}};
        }
      },
      m);
}

estimators::BaseModel base_from_json(const json& j, const std::string& where) {
  const std::string type = str_field(j, where, "type");
  if (type == "linear") {
    estimators::LinearModel m;
    m.task = task_from_name(str_field(j, where, "task"));
    m.beta = json_to_vec(field(j, where, "beta"), where + "/beta");
    m.intercept = num_field(j, where, "intercept");
    return m;
  }
  if (type == "stump") {
    estimators::Stump s;
    s.task = task_from_name(str_field(j, where, "task"));
    const double fi = num_field(j, where, "feature_index");
    if (fi < 0 || fi != std::floor(fi)) corrupt(where + "/feature_index", "expected an index");
    s.feature_index = static_cast<Index>(fi);
    s.threshold = num_field(j, where, "threshold");
    s.left_value = num_field(j, where, "left");
    s.right_value = num_field(j, where, "right");
    return s;
  }
  corrupt(where + "/type", "unknown estimator type \"" + type + "\"");
}

json state_to_json(const FittedModel& model) {
  return std::visit(
      [&](const auto& state) -> json {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, WeightState>) {
          json j{{"weights", vec_to_json(state.weights)}, {"gamma", state.gamma}};
          if (state.selection) {
            j["selection"] = json{{"candidate_gammas", state.selection->candidate_gammas},
                                  {"chosen_gamma", state.selection->chosen_gamma},
                                  {"cv_scores", state.selection->cv_scores},
                                  {"n_centers", state.selection->n_centers}};
          }
          return j;
        } else if constexpr (std::is_same_v<T, CoralState>) {
          return json{{"M", mat_to_json(state.transform.M)},
                      {"lambda", state.transform.lambda},
                      {"source_mean", vec_to_json(state.transform.source_mean)},
                      {"target_mean", vec_to_json(state.transform.target_mean)}};
        } else if constexpr (std::is_same_v<T, MsdaState>) {
          json layers = json::array();
          for (const auto& W : state.model.layers) layers.push_back(mat_to_json(W));
          return json{{"p", state.model.p}, {"layers", std::move(layers)}};
        } else if constexpr (std::is_same_v<T, BoostState>) {
          json members = json::array();
          for (const auto& m : state.ensemble.members) members.push_back(base_to_json(m));
          return json{{"kind", state.ensemble.kind ==
                                       instance::BoostEnsemble::Kind::ClassificationVote
                                   ? "classification-vote"
                                   : "regression-weighted-median"},
                      {"n_iters", state.ensemble.n_iters},
                      {"early_stop", state.ensemble.early_stop},
                      {"betas", state.ensemble.member_betas},
                      {"members", std::move(members)}};
        } else if constexpr (std::is_same_v<T, TransferState>) {
          return json{{"prior", vec_to_json(state.prior)}, {"lambda", state.lambda}};
        } else {
          return json::object();
        }
      },
      model.state);
}

ModelState state_from_json(Method method, const json& j, const std::string& where) {
  switch (method) {
    case Method::Kmm:
    case Method::Kliep: {
      std::optional<instance::KliepSelection> selection;
      if (j.contains("selection")) {
        const json& sel = j["selection"];
        const std::string sw = where + "/selection";
        selection.emplace();
        selection->chosen_gamma = num_field(sel, sw, "chosen_gamma");
        const Vector cg = json_to_vec(field(sel, sw, "candidate_gammas"), sw + "/candidate_gammas");
        const Vector cs = json_to_vec(field(sel, sw, "cv_scores"), sw + "/cv_scores");
        selection->candidate_gammas.assign(cg.data(), cg.data() + cg.size());
        selection->cv_scores.assign(cs.data(), cs.data() + cs.size());
        selection->n_centers = static_cast<Index>(num_field(sel, sw, "n_centers"));
      }
      return WeightState{json_to_vec(field(j, where, "weights"), where + "/weights"),
                         num_field(j, where, "gamma"), std::move(selection)};
    }
    case Method::Fe:
      return FeState{};
    case Method::Coral: {
      CoralState s;
      s.transform.M = json_to_mat(field(j, where, "M"), where + "/M");
      s.transform.lambda = num_field(j, where, "lambda");
      s.transform.source_mean =
          json_to_vec(field(j, where, "source_mean"), where + "/source_mean");
      s.transform.target_mean =
          json_to_vec(field(j, where, "target_mean"), where + "/target_mean");
      return s;
    }
    case Method::Msda: {
      MsdaState s;
      s.model.p = num_field(j, where, "p");
      const json& layers = field(j, where, "layers");
      if (!layers.is_array() || layers.empty()) corrupt(where + "/layers", "expected layers");
      for (std::size_t i = 0; i < layers.size(); ++i)
        s.model.layers.push_back(
            json_to_mat(layers[i], where + "/layers[" + std::to_string(i) + "]"));
      return s;
    }
    case Method::TrAdaBoost:
    case Method::TrAdaBoostR2:
    case Method::TwoStageTrAdaBoostR2: {
      BoostState s;
      const std::string kind = str_field(j, where, "kind");
      if (kind == "classification-vote")
        s.ensemble.kind = instance::BoostEnsemble::Kind::ClassificationVote;
      else if (kind == "regression-weighted-median")
        s.ensemble.kind = instance::BoostEnsemble::Kind::RegressionWeightedMedian;
      else
        corrupt(where + "/kind", "unknown ensemble kind");
      s.ensemble.n_iters = static_cast<int>(num_field(j, where, "n_iters"));
      const json& es = field(j, where, "early_stop");
      if (!es.is_boolean()) corrupt(where + "/early_stop", "expected a boolean");
      s.ensemble.early_stop = es.get<bool>();
      const Vector betas = json_to_vec(field(j, where, "betas"), where + "/betas");
      s.ensemble.member_betas.assign(betas.data(), betas.data() + betas.size());
      const json& members = field(j, where, "members");
      if (!members.is_array()) corrupt(where + "/members", "expected an array");
      for (std::size_t i = 0; i < members.size(); ++i)
        s.ensemble.members.push_back(
            base_from_json(members[i], where + "/members[" + std::to_string(i) + "]"));
      if (s.ensemble.members.size() != s.ensemble.member_betas.size())
        corrupt(where + "/members", "member and beta counts differ");
      return s;
    }
    case Method::RegularTransferLr:
    case Method::RegularTransferLc: {
      TransferState s;
      s.prior = json_to_vec(field(j, where, "prior"), where + "/prior");
      s.lambda = num_field(j, where, "lambda");
      return s;
    }
    case Method::SourceOnly:
      return SourceOnlyState{};
  }
  corrupt(where, "unhandled method state");
}

}  // namespace

namespace {
FittedModel deserialize_model_checked(const json& j);
}  // namespace

std::string serialize_model(const FittedModel& model) {
  json j;
  j["format_version"] = 1;
  j["method"] = std::string(method_name(model.method));
  j["task"] = std::string(task_name(model.task));
  j["n_features"] = model.n_features;
  j["hyperparams"] = model.hyperparams;
  j["seed"] = model.seed;
  j["warnings"] = model.warnings;
  j["state"] = state_to_json(model);
  j["estimator"] = model.estimator ? base_to_json(*model.estimator) : json(nullptr);
  return j.dump();
}

FittedModel deserialize_model(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw AdaptError(ErrorCode::CorruptModelFile,
                     "parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return deserialize_model_checked(j);
  } catch (const json::exception& e) {
    throw AdaptError(ErrorCode::CorruptModelFile, e.what());
  }
}

namespace {

FittedModel deserialize_model_checked(const json& j) {
  if (!j.is_object()) corrupt("/", "expected a JSON object");
  const double version = num_field(j, "/", "format_version");
  if (version != 1) corrupt("/format_version", "unsupported version");

  FittedModel model;
  model.method = [&] {
    try {
      return method_from_name(str_field(j, "/", "method"));
    } catch (const AdaptError&) {
      corrupt("/method", "unknown method");
    }
  }();
  model.task = [&] {
    try {
      return task_from_name(str_field(j, "/", "task"));
    } catch (const AdaptError&) {
      corrupt("/task", "unknown task");
    }
  }();
  const double nf = num_field(j, "/", "n_features");
  if (nf < 1 || nf != std::floor(nf)) corrupt("/n_features", "expected a positive integer");
  model.n_features = static_cast<Index>(nf);
  const json& hp = field(j, "/", "hyperparams");
  if (!hp.is_object()) corrupt("/hyperparams", "expected an object");
  model.hyperparams = hp;
  const json& seed = field(j, "/", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    corrupt("/seed", "expected a nonnegative integer");
  model.seed = seed.get<std::uint64_t>();
  const json& warnings = field(j, "/", "warnings");
  if (!warnings.is_array()) corrupt("/warnings", "expected an array");
  for (const auto& w : warnings) {
    if (!w.is_string()) corrupt("/warnings", "expected strings");
    model.warnings.push_back(w.get<std::string>());
  }
  model.state = state_from_json(model.method, field(j, "/", "state"), "/state");
  const json& est = field(j, "/", "estimator");
  if (!est.is_null()) model.estimator = base_from_json(est, "/estimator");

  const bool needs_estimator = model.method != Method::TrAdaBoost &&
                               model.method != Method::TrAdaBoostR2 &&
                               model.method != Method::TwoStageTrAdaBoostR2;
  if (needs_estimator && !model.estimator) corrupt("/estimator", "estimator required");
  return model;
}

}  // namespace

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AdaptError(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << serialize_model(model);
  if (!out) throw AdaptError(ErrorCode::IoError, "failed writing " + path);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AdaptError(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace adapt
