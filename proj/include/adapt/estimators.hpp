#pragma once

#include <optional>
#include <variant>

#include "adapt/types.hpp"

namespace adapt::estimators {

struct LinearModel {
  Vector beta;            // length d
  double intercept = 0.0;
  TaskKind task = TaskKind::Regression;
  int iterations = 0;     // Newton iterations (logistic only)
  bool converged = true;

  /// Coefficients with the intercept appended (the penalized layout).
  Vector stacked() const;
};

struct Stump {
  Index feature_index = 0;
  double threshold = 0.0;
  double left_value = 0.0;   // x[feature] <= threshold
  double right_value = 0.0;  // x[feature] >  threshold
  TaskKind task = TaskKind::Regression;
};

LinearModel ridge_fit(const Matrix& X, const Vector& y, double lambda,
                      const Vector* sample_weights = nullptr,
                      const Vector* prior = nullptr);
Vector ridge_predict(const LinearModel& m, const Matrix& X);

/// Penalized logistic regression by Newton/IRLS:
///   minimize  sum_i s_i NLL(y_i, sigmoid(x_i^T beta)) + lambda ||beta - prior||^2
/// Intercept appended and penalized, like ridge_fit. Returns once the
/// penalized gradient norm is <= 1e-8, or flags converged = false after 100
/// iterations. Throws SeparableWithoutPenalty when lambda = 0 and the
/// coefficients diverge.
LinearModel logistic_fit(const Matrix& X, const Vector& y, double lambda,
                         const Vector* sample_weights = nullptr,
                         const Vector* prior = nullptr);
Vector logistic_predict(const LinearModel& m, const Matrix& X);
Vector logistic_proba(const LinearModel& m, const Matrix& X);  // P(y = 1)

/// Weighted decision stump. Thresholds are midpoints of consecutive sorted
/// unique feature values; ties break toward the lowest feature index, then
/// the lowest threshold. Classification minimizes weighted 0/1 error with
/// per-side weighted majority labels; regression minimizes weighted squared
/// error with per-side weighted means.
Stump stump_fit(const Matrix& X, const Vector& y, const Vector& sample_weights,
                TaskKind task);
Vector stump_predict(const Stump& s, const Matrix& X);

/// Any base learner an adapter can wrap.
using BaseModel = std::variant<LinearModel, Stump>;

enum class EstimatorKind { Ridge, Logistic, Stump };

std::string_view estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(std::string_view name);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Ridge;
  double lambda = 1e-3;  // ridge / logistic regularization
};

/// The single weighted-fit entry point used by every adapter.
BaseModel fit_base(const EstimatorSpec& spec, const Matrix& X, const Vector& y,
                   TaskKind task, const Vector* sample_weights = nullptr);
Vector predict_base(const BaseModel& model, const Matrix& X);

}  // namespace adapt::estimators
