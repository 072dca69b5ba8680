#pragma once

#include <optional>
#include <vector>

#include "adapt/estimators.hpp"
#include "adapt/numerics.hpp"
#include "adapt/types.hpp"

namespace adapt::instance {

struct KmmOptions {
  std::optional<double> gamma;  // default: median heuristic on stacked Xs, Xt
  double B = 1000.0;
  std::optional<double> eps;    // default: (sqrt(n_s) - 1) / sqrt(n_s)
  std::uint64_t seed = 0;
};

struct KmmResult {
  ImportanceWeights weights;
  double gamma = 0.0;
  bool converged = true;
};

/// Kernel mean matching: K = rbf(Xs, Xs), kappa = (n_s/n_t) * row sums of
/// rbf(Xs, Xt), solved as the box/sum-slab QP.
KmmResult kmm_fit(const Matrix& Xs, const Matrix& Xt, const KmmOptions& opts = {});

struct KliepSelection {
  std::vector<double> candidate_gammas;
  double chosen_gamma = 0.0;
  std::vector<double> cv_scores;  // mean held-out log-likelihood per candidate
  Index n_centers = 0;
};

struct KliepOptions {
  Index n_centers = 100;  // capped at n_t
  int cv_folds = 5;
  std::uint64_t seed = 0;
};

struct KliepResultFit {
  ImportanceWeights weights;
  KliepSelection selection;
  bool converged = true;
};

/// Density-ratio weights w(x) = sum_l alpha_l k(x, c_l) with centers a seeded
/// subsample of Xt and gamma chosen by likelihood cross-validation over
/// {0.1, 1, 10} x median heuristic (ties -> smallest gamma). The source
/// normalization constraint makes the returned weights average to 1.
KliepResultFit kliep_fit(const Matrix& Xs, const Matrix& Xt, const KliepOptions& opts = {});

struct BoostEnsemble {
  enum class Kind { ClassificationVote, RegressionWeightedMedian };
  Kind kind = Kind::ClassificationVote;
  std::vector<estimators::BaseModel> members;
  std::vector<double> member_betas;  // each in (0, 1]
  int n_iters = 0;                   // requested iteration budget N
  bool early_stop = false;

  // Fit diagnostics, not serialized: weight vector after each iteration.
  std::vector<Vector> weight_trace;
};

struct BoostOptions {
  int n_iters = 20;
  // Defaults per method when unset: stump for classification boosting,
  // ridge(1e-3) for the regression variants.
  std::optional<estimators::EstimatorSpec> base;
};

/// TrAdaBoost for binary labels. Fixed source factor
/// beta = 1 / (1 + sqrt(2 ln n_s / N)); per iteration the weak learner is fit
/// on source+target rows, eps_t is the weighted error over labeled target
/// rows, beta_t = eps_t / (1 - eps_t), misclassified source rows scale by
/// beta and misclassified target rows by 1/beta_t, then weights renormalize
/// to sum 1. eps_t = 0 keeps the learner and stops; eps_t >= 1/2 discards the
/// iteration and stops (iteration 1 falls back to a uniform-weight refit).
BoostEnsemble tradaboost_fit(const Matrix& Xs, const Vector& ys, const Matrix& Xt,
                             const Vector& yt, const BoostOptions& opts = {});

/// Vote over the back half of the ensemble (members ceil(M/2)..M) with
/// weights ln(1/beta_t).
Vector tradaboost_predict(const BoostEnsemble& ens, const Matrix& X);

/// AdaBoost.R2-style linear loss: residuals on labeled target rows are
/// normalized by their max, eps_t is the weighted mean loss, target rows
/// scale by beta_t^{-loss} and source rows by beta^{loss}. A zero max
/// residual stops early with the perfect member kept.
BoostEnsemble tradaboostr2_fit(const Matrix& Xs, const Vector& ys, const Matrix& Xt,
                               const Vector& yt, const BoostOptions& opts = {});

/// Weighted median of member outputs over the back half, weights ln(1/beta_t).
Vector weighted_median_predict(const BoostEnsemble& ens, const Matrix& X);

struct TwoStageOptions {
  int n_steps = 10;  // outer steps S
  int cv_folds = 5;
  int n_iters = 20;  // inner AdaBoost.R2 budget
  estimators::EstimatorSpec base{estimators::EstimatorKind::Ridge, 1e-3};
  std::uint64_t seed = 0;
};

struct TwoStageResult {
  BoostEnsemble ensemble;  // inner ensemble of the selected step
  int selected_step = 0;
  std::vector<double> cv_errors;          // one per outer step
  std::vector<double> achieved_fractions; // target weight fraction per step
};

/// Two-stage variant: at outer step t the source weights are frozen and
/// uniformly rescaled (binary search, function tolerance 1e-10) so the target
/// weight fraction equals
///   n_t/(n_s+n_t) + (t/(S-1)) * (1 - n_t/(n_s+n_t)),
/// then an inner AdaBoost.R2 updates target weights only. The step with the
/// smallest cross-validated target error supplies the returned ensemble.
TwoStageResult two_stage_tradaboostr2_fit(const Matrix& Xs, const Vector& ys,
                                          const Matrix& Xt, const Vector& yt,
                                          const TwoStageOptions& opts = {});

/// Fixed source factor used by every TrAdaBoost variant.
double tradaboost_source_beta(Index n_source, int n_iters);

}  // namespace adapt::instance
