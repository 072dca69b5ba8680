#include "adapt/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace adapt {

std::string_view task_name(TaskKind task) {
  return task == TaskKind::Regression ? "regression" : "classification";
}

TaskKind task_from_name(std::string_view name) {
  if (name == "regression") return TaskKind::Regression;
  if (name == "classification") return TaskKind::Classification;
  throw AdaptError(ErrorCode::InvalidArgument, "unknown task: " + std::string(name));
}

std::string_view metric_name(MetricKind metric) {
  switch (metric) {
    case MetricKind::Mse: return "mse";
    case MetricKind::Mae: return "mae";
    case MetricKind::Accuracy: return "accuracy";
  }
  return "mse";
}

MetricKind metric_from_name(std::string_view name) {
  if (name == "mse") return MetricKind::Mse;
  if (name == "mae") return MetricKind::Mae;
  if (name == "accuracy") return MetricKind::Accuracy;
  throw AdaptError(ErrorCode::InvalidArgument, "unknown metric: " + std::string(name));
}

void check_matrix(const Matrix& m, std::string_view what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     std::string(what) + " must have at least one row and one column");
  }
  if (!m.allFinite()) {
    throw AdaptError(ErrorCode::NonFiniteInput,
                     std::string(what) + " contains NaN or infinity");
  }
}

void check_vector(const Vector& v, std::string_view what) {
  if (!v.allFinite()) {
    throw AdaptError(ErrorCode::NonFiniteInput,
                     std::string(what) + " contains NaN or infinity");
  }
}

int check_labels(const Vector& y, std::string_view what) {
  std::set<long> seen;
  for (Index i = 0; i < y.size(); ++i) {
    const double v = y(i);
    if (!(std::floor(v) == v) || v < 0 || v > 1e9) {
      std::ostringstream os;
      os << what << " labels must be integers 0..K-1, got " << v << " at row " << i;
      throw AdaptError(ErrorCode::InvalidLabels, os.str());
    }
    seen.insert(static_cast<long>(v));
  }
  if (seen.empty()) throw AdaptError(ErrorCode::InvalidLabels, std::string(what) + " is empty");
  const long k = *seen.rbegin() + 1;
  if (static_cast<long>(seen.size()) != k) {
    throw AdaptError(ErrorCode::InvalidLabels,
                     std::string(what) + " labels must form a contiguous set starting at 0");
  }
  return static_cast<int>(k);
}

void AdaptInput::validate() const {
  check_matrix(Xs, "Xs");
  check_matrix(Xt, "Xt");
  check_vector(ys, "ys");
  if (Xs.cols() != Xt.cols()) {
    std::ostringstream os;
    os << "Xs has " << Xs.cols() << " columns but Xt has " << Xt.cols();
    throw AdaptError(ErrorCode::DimensionMismatch, os.str());
  }
  if (ys.size() != Xs.rows()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "ys length must equal Xs row count");
  }
  if (yt) {
    check_vector(*yt, "yt");
    if (yt->size() != Xt.rows()) {
      throw AdaptError(ErrorCode::DimensionMismatch, "yt length must equal Xt row count");
    }
  }
  if (labeled_target_count) {
    if (!yt) {
      throw AdaptError(ErrorCode::MissingTargetLabels,
                       "labeled_target_count set but yt is absent");
    }
    if (*labeled_target_count < 0 || *labeled_target_count > Xt.rows()) {
      throw AdaptError(ErrorCode::DimensionMismatch,
                       "labeled_target_count out of range");
    }
  }
}

void ImportanceWeights::validate(Index n_source) const {
  if (w.size() != n_source) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "importance weights length must equal source row count");
  }
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0) {
      throw AdaptError(ErrorCode::NonFiniteInput,
                       "importance weights must be finite and nonnegative");
    }
  }
}

double evaluate_metric(const Vector& pred, const Vector& truth, MetricKind metric,
                       TaskKind task) {
  if (pred.size() != truth.size()) {
    throw AdaptError(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  }
  if (pred.size() == 0) {
    throw AdaptError(ErrorCode::LengthMismatch, "empty vectors");
  }
  const bool classification_metric = metric == MetricKind::Accuracy;
  if (classification_metric != (task == TaskKind::Classification)) {
    throw AdaptError(ErrorCode::IncompatibleMetric,
                     std::string(metric_name(metric)) + " is incompatible with a " +
                         std::string(task_name(task)) + " task");
  }
  const Index n = pred.size();
  switch (metric) {
    case MetricKind::Mse:
      return (pred - truth).squaredNorm() / static_cast<double>(n);
    case MetricKind::Mae:
      return (pred - truth).cwiseAbs().sum() / static_cast<double>(n);
    case MetricKind::Accuracy: {
      Index hits = 0;
      for (Index i = 0; i < n; ++i)
        if (pred(i) == truth(i)) ++hits;
      return static_cast<double>(hits) / static_cast<double>(n);
    }
  }
  return 0.0;
}

}  // namespace adapt
