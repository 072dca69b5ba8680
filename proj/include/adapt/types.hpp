#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "adapt/errors.hpp"

namespace adapt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class TaskKind { Regression, Classification };

enum class MetricKind { Mse, Mae, Accuracy };

std::string_view task_name(TaskKind task);
TaskKind task_from_name(std::string_view name);
std::string_view metric_name(MetricKind metric);
MetricKind metric_from_name(std::string_view name);

/// Throws NonFiniteInput / DimensionMismatch if `m` is empty or has NaN/inf.
void check_matrix(const Matrix& m, std::string_view what);
void check_vector(const Vector& v, std::string_view what);

/// Classification labels must be integers forming a contiguous set {0..K-1}.
/// Returns K. Throws InvalidLabels otherwise.
int check_labels(const Vector& y, std::string_view what);

/// The (Xs, ys, Xt, yt) bundle every adapter consumes. yt is present for
/// supervised adaptation; when only the first k target rows carry usable
/// labels, labeled_target_count limits how many (yt still spans all rows so
/// the row pairing stays trivial). Adapters never read labels past that count.
struct AdaptInput {
  Matrix Xs;
  Vector ys;
  Matrix Xt;
  std::optional<Vector> yt;
  std::optional<Index> labeled_target_count;

  Index labeled_targets() const {
    if (!yt) return 0;
    return labeled_target_count ? *labeled_target_count : Xt.rows();
  }

  /// Validates all invariants; throws on violation.
  void validate() const;
};

/// Nonnegative per-source-instance weights from instance-based methods.
struct ImportanceWeights {
  Vector w;

  void validate(Index n_source) const;
};

double evaluate_metric(const Vector& pred, const Vector& truth, MetricKind metric,
                       TaskKind task);

}  // namespace adapt
