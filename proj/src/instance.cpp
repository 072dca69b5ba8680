#include "adapt/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adapt::instance {

namespace {

Matrix stack_rows(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() + B.rows(), A.cols());
  out.topRows(A.rows()) = A;
  out.bottomRows(B.rows()) = B;
  return out;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

constexpr double kEpsFloor = 1e-10;

}  // namespace

double tradaboost_source_beta(Index n_source, int n_iters) {
  return 1.0 / (1.0 + std::sqrt(2.0 * std::log(static_cast<double>(n_source)) /
                                static_cast<double>(n_iters)));
}

KmmResult kmm_fit(const Matrix& Xs, const Matrix& Xt, const KmmOptions& opts) {
  check_matrix(Xs, "kmm Xs");
  check_matrix(Xt, "kmm Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "kmm inputs must share column counts");
  }
  const Index ns = Xs.rows();
  const Index nt = Xt.rows();
  const double gamma =
      opts.gamma ? *opts.gamma : numerics::median_heuristic(stack_rows(Xs, Xt), opts.seed);
  if (!(gamma > 0.0)) {
    throw AdaptError(ErrorCode::NonPositiveGamma, "kmm gamma must be positive");
  }
  const double eps =
      opts.eps ? *opts.eps
               : (std::sqrt(static_cast<double>(ns)) - 1.0) / std::sqrt(static_cast<double>(ns));

  numerics::QpProblem qp;
  qp.K = numerics::rbf_kernel(Xs, Xs, gamma);
  qp.kappa = (static_cast<double>(ns) / static_cast<double>(nt)) *
             numerics::rbf_kernel(Xs, Xt, gamma).rowwise().sum();
  qp.B = opts.B;
  qp.eps = eps;

  const auto solved = numerics::solve_kmm_qp(qp, Rng(opts.seed).split(1));
  KmmResult result;
  result.weights.w = solved.w;
  result.weights.validate(ns);
  result.gamma = gamma;
  result.converged = solved.converged;
  return result;
}

KliepResultFit kliep_fit(const Matrix& Xs, const Matrix& Xt, const KliepOptions& opts) {
  check_matrix(Xs, "kliep Xs");
  check_matrix(Xt, "kliep Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "kliep inputs must share column counts");
  }
  const Index nt = Xt.rows();
  if (opts.cv_folds < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "kliep needs at least 2 folds");
  }
  if (nt < opts.cv_folds) {
    throw AdaptError(ErrorCode::TooFewTargets,
                     "target rows fewer than cross-validation folds");
  }

  Rng rng(opts.seed);
  const Index n_centers = std::min<Index>(opts.n_centers, nt);
  auto perm = rng.split(0).permutation(static_cast<std::size_t>(nt));
  std::vector<Index> center_rows(perm.begin(), perm.begin() + n_centers);
  std::sort(center_rows.begin(), center_rows.end());
  Matrix centers(n_centers, Xt.cols());
  for (Index i = 0; i < n_centers; ++i)
    centers.row(i) = Xt.row(static_cast<Index>(center_rows[static_cast<std::size_t>(i)]));

  const double g_med = numerics::median_heuristic(stack_rows(Xs, Xt), opts.seed);
  const std::vector<double> candidates = {0.1 * g_med, g_med, 10.0 * g_med};

  // Seeded fold assignment over target rows.
  auto fold_perm = rng.split(1).permutation(static_cast<std::size_t>(nt));
  std::vector<int> fold_of(static_cast<std::size_t>(nt));
  for (std::size_t pos = 0; pos < fold_perm.size(); ++pos)
    fold_of[fold_perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(opts.cv_folds));

  KliepSelection selection;
  selection.candidate_gammas = candidates;
  selection.n_centers = n_centers;

  double best_score = -std::numeric_limits<double>::infinity();
  double best_gamma = candidates.front();
  for (const double gamma : candidates) {
    const Vector k_sc_mean = numerics::rbf_kernel(Xs, centers, gamma).colwise().mean();
    double score_sum = 0.0;
    for (int f = 0; f < opts.cv_folds; ++f) {
      std::vector<Index> train_rows, held_rows;
      for (Index i = 0; i < nt; ++i) {
        (fold_of[static_cast<std::size_t>(i)] == f ? held_rows : train_rows).push_back(i);
      }
      Matrix Xt_train(static_cast<Index>(train_rows.size()), Xt.cols());
      for (std::size_t i = 0; i < train_rows.size(); ++i)
        Xt_train.row(static_cast<Index>(i)) = Xt.row(train_rows[i]);
      const auto opt = numerics::kliep_optimize(
          numerics::rbf_kernel(Xt_train, centers, gamma), k_sc_mean);

      Matrix Xt_held(static_cast<Index>(held_rows.size()), Xt.cols());
      for (std::size_t i = 0; i < held_rows.size(); ++i)
        Xt_held.row(static_cast<Index>(i)) = Xt.row(held_rows[i]);
      const Vector ratios = numerics::rbf_kernel(Xt_held, centers, gamma) * opt.alpha;
      double fold_score = 0.0;
      for (Index i = 0; i < ratios.size(); ++i)
        fold_score += std::log(std::max(ratios(i), 1e-300));
      score_sum += fold_score / static_cast<double>(held_rows.size());
    }
    const double score = score_sum / static_cast<double>(opts.cv_folds);
    selection.cv_scores.push_back(score);
    if (score > best_score) {
      best_score = score;
      best_gamma = gamma;
    }
  }
  selection.chosen_gamma = best_gamma;

  const Vector k_sc_mean = numerics::rbf_kernel(Xs, centers, best_gamma).colwise().mean();
  const auto opt =
      numerics::kliep_optimize(numerics::rbf_kernel(Xt, centers, best_gamma), k_sc_mean);

  KliepResultFit result;
  result.weights.w = numerics::rbf_kernel(Xs, centers, best_gamma) * opt.alpha;
  result.weights.validate(Xs.rows());
  result.selection = std::move(selection);
  result.converged = opt.converged;
  return result;
}

namespace {

struct BoostContext {
  const Matrix& X;        // source rows then target rows
  const Vector& y;
  Index n_source;
  Index n_target;
  const estimators::EstimatorSpec& base;
  TaskKind task;
};

double target_weighted_error_cls(const BoostContext& ctx, const Vector& w, const Vector& h) {
  double err = 0.0, mass = 0.0;
  for (Index i = ctx.n_source; i < ctx.X.rows(); ++i) {
    mass += w(i);
    if (h(i) != ctx.y(i)) err += w(i);
  }
  return mass > 0.0 ? err / mass : 0.0;
}

}  // namespace

BoostEnsemble tradaboost_fit(const Matrix& Xs, const Vector& ys, const Matrix& Xt,
                             const Vector& yt, const BoostOptions& opts) {
  check_matrix(Xs, "tradaboost Xs");
  check_matrix(Xt, "tradaboost Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "tradaboost inputs must share columns");
  }
  if (yt.size() < 1) {
    throw AdaptError(ErrorCode::MissingTargetLabels,
                     "tradaboost requires labeled target rows");
  }
  if (opts.n_iters < 1) {
    throw AdaptError(ErrorCode::InvalidArgument, "n_iters must be >= 1");
  }
  const Vector y_all = concat(ys, yt);
  const int k = check_labels(y_all, "tradaboost labels");
  if (k > 2) {
    throw AdaptError(ErrorCode::InvalidLabels, "tradaboost is binary only");
  }

  const Matrix X_all = stack_rows(Xs, Xt);
  const Index ns = Xs.rows();
  const Index n = X_all.rows();
  const int N = opts.n_iters;
  const double beta_src = tradaboost_source_beta(ns, N);
  const estimators::EstimatorSpec base =
      opts.base.value_or(estimators::EstimatorSpec{estimators::EstimatorKind::Stump, 0.0});
  BoostContext ctx{X_all, y_all, ns, Xt.rows(), base, TaskKind::Classification};

  BoostEnsemble ens;
  ens.kind = BoostEnsemble::Kind::ClassificationVote;
  ens.n_iters = N;

  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int t = 0; t < N; ++t) {
    auto member = estimators::fit_base(ctx.base, X_all, y_all, ctx.task, &w);
    Vector h = estimators::predict_base(member, X_all);
    double eps = target_weighted_error_cls(ctx, w, h);
    bool stop = false;

    if (eps >= 0.5) {
      if (!ens.members.empty()) {
        ens.early_stop = true;
        break;
      }
      // Iteration 1 failed: redistribute weight uniformly and refit once.
      w.setConstant(1.0 / static_cast<double>(n));
      member = estimators::fit_base(ctx.base, X_all, y_all, ctx.task, &w);
      h = estimators::predict_base(member, X_all);
      eps = std::min(target_weighted_error_cls(ctx, w, h), 0.5 - kEpsFloor);
      ens.early_stop = true;
      stop = true;
    }
    if (eps <= 0.0) {
      eps = kEpsFloor;
      ens.early_stop = true;
      stop = true;
    }
    eps = std::max(eps, kEpsFloor);
    const double beta_t = eps / (1.0 - eps);
    ens.members.push_back(std::move(member));
    ens.member_betas.push_back(beta_t);
    if (stop) break;

    for (Index i = 0; i < n; ++i) {
      if (h(i) == y_all(i)) continue;
      w(i) *= i < ns ? beta_src : 1.0 / beta_t;
    }
    w /= w.sum();
    ens.weight_trace.push_back(w);
  }
  return ens;
}

Vector tradaboost_predict(const BoostEnsemble& ens, const Matrix& X) {
  if (ens.members.empty()) {
    throw AdaptError(ErrorCode::EmptyEnsemble, "ensemble has no members");
  }
  const std::size_t m = ens.members.size();
  const std::size_t first = (m + 1) / 2 - 1;  // ceil(m/2), 1-indexed

  Vector score = Vector::Zero(X.rows());
  double total = 0.0;
  for (std::size_t t = first; t < m; ++t) {
    const double vote = std::log(1.0 / ens.member_betas[t]);
    total += vote;
    const Vector h = estimators::predict_base(ens.members[t], X);
    score += vote * h;
  }
  Vector out(X.rows());
  for (Index i = 0; i < X.rows(); ++i) out(i) = score(i) >= 0.5 * total ? 1.0 : 0.0;
  return out;
}

namespace {

struct R2Step {
  bool kept = false;
  bool stop = false;
  double beta_t = 0.0;
  Vector losses;  // per-row adjusted losses in [0, 1]
  estimators::BaseModel member;
};

// One AdaBoost.R2 round: fit, compute adjusted losses against the max target
// residual, derive beta_t. Weight updates stay with the caller since the
// plain and frozen-source variants differ there. With allow_clamp an
// eps >= 1/2 round is kept at the clamped error instead of discarded.
R2Step r2_round(const BoostContext& ctx, const Vector& w, bool allow_clamp) {
  R2Step step;
  step.member = estimators::fit_base(ctx.base, ctx.X, ctx.y, TaskKind::Regression, &w);
  const Vector pred = estimators::predict_base(step.member, ctx.X);
  const Vector resid = (pred - ctx.y).cwiseAbs();

  double d_max = 0.0;
  for (Index i = ctx.n_source; i < ctx.X.rows(); ++i) d_max = std::max(d_max, resid(i));
  if (d_max <= 0.0) {  // perfect on target: keep and stop
    step.kept = true;
    step.stop = true;
    step.beta_t = kEpsFloor / (1.0 - kEpsFloor);
    return step;
  }
  step.losses = (resid / d_max).cwiseMin(1.0);

  double eps = 0.0, mass = 0.0;
  for (Index i = ctx.n_source; i < ctx.X.rows(); ++i) {
    eps += w(i) * step.losses(i);
    mass += w(i);
  }
  eps = mass > 0.0 ? eps / mass : 0.0;

  if (eps >= 0.5) {
    if (!allow_clamp) {
      step.kept = false;
      step.stop = true;
      return step;
    }
    eps = 0.5 - kEpsFloor;
    step.stop = true;
  }
  if (eps <= 0.0) {
    eps = kEpsFloor;
    step.stop = true;
  }
  eps = std::max(eps, kEpsFloor);
  step.beta_t = eps / (1.0 - eps);
  step.kept = true;
  return step;
}

}  // namespace

BoostEnsemble tradaboostr2_fit(const Matrix& Xs, const Vector& ys, const Matrix& Xt,
                               const Vector& yt, const BoostOptions& opts) {
  check_matrix(Xs, "tradaboostr2 Xs");
  check_matrix(Xt, "tradaboostr2 Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "tradaboostr2 inputs must share columns");
  }
  if (yt.size() < 1) {
    throw AdaptError(ErrorCode::MissingTargetLabels,
                     "tradaboostr2 requires labeled target rows");
  }
  if (opts.n_iters < 1) {
    throw AdaptError(ErrorCode::InvalidArgument, "n_iters must be >= 1");
  }
  const Matrix X_all = stack_rows(Xs, Xt);
  const Vector y_all = concat(ys, yt);
  const Index ns = Xs.rows();
  const Index n = X_all.rows();
  const int N = opts.n_iters;
  const double beta_src = tradaboost_source_beta(ns, N);
  const estimators::EstimatorSpec base =
      opts.base.value_or(estimators::EstimatorSpec{estimators::EstimatorKind::Ridge, 1e-3});
  BoostContext ctx{X_all, y_all, ns, Xt.rows(), base, TaskKind::Regression};

  BoostEnsemble ens;
  ens.kind = BoostEnsemble::Kind::RegressionWeightedMedian;
  ens.n_iters = N;

  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int t = 0; t < N; ++t) {
    const bool first = ens.members.empty();
    R2Step step = r2_round(ctx, w, false);
    if (!step.kept && first) {
      // Iteration 1 failed on weighted data: refit once from uniform weights.
      w.setConstant(1.0 / static_cast<double>(n));
      step = r2_round(ctx, w, true);
    }
    if (step.kept) {
      ens.members.push_back(std::move(step.member));
      ens.member_betas.push_back(step.beta_t);
    }
    if (step.stop) {
      ens.early_stop = true;
      break;
    }
    for (Index i = 0; i < n; ++i) {
      w(i) *= i < ns ? std::pow(beta_src, step.losses(i))
                     : std::pow(step.beta_t, -step.losses(i));
    }
    w /= w.sum();
    ens.weight_trace.push_back(w);
  }
  return ens;
}

Vector weighted_median_predict(const BoostEnsemble& ens, const Matrix& X) {
  if (ens.members.empty()) {
    throw AdaptError(ErrorCode::EmptyEnsemble, "ensemble has no members");
  }
  const std::size_t m = ens.members.size();
  const std::size_t first = (m + 1) / 2 - 1;
  const std::size_t used = m - first;

  std::vector<Vector> outputs(used);
  std::vector<double> votes(used);
  double total = 0.0;
  for (std::size_t t = first; t < m; ++t) {
    outputs[t - first] = estimators::predict_base(ens.members[t], X);
    votes[t - first] = std::log(1.0 / ens.member_betas[t]);
    total += votes[t - first];
  }

  Vector out(X.rows());
  std::vector<std::size_t> idx(used);
  for (Index r = 0; r < X.rows(); ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return outputs[a](r) < outputs[b](r);
    });
    double cum = 0.0;
    double value = outputs[idx.back()](r);
    for (const std::size_t j : idx) {
      cum += votes[j];
      if (cum >= 0.5 * total) {
        value = outputs[j](r);
        break;
      }
    }
    out(r) = value;
  }
  return out;
}

namespace {

struct FrozenInnerResult {
  BoostEnsemble ensemble;
  Vector target_weights;  // final target-block weights, same total mass as input
};

// AdaBoost.R2 with the source weights frozen: only the target block updates,
// rescaled to keep its total mass (and therefore the source fraction) fixed.
FrozenInnerResult adaboost_r2_frozen(const Matrix& Xs, const Vector& ys,
                                     const Matrix& Xt, const Vector& yt,
                                     const Vector& ws, const Vector& wt, int n_iters,
                                     const estimators::EstimatorSpec& base) {
  const Matrix X_all = stack_rows(Xs, Xt);
  const Vector y_all = concat(ys, yt);
  const Index ns = Xs.rows();
  const Index nt = Xt.rows();
  BoostContext ctx{X_all, y_all, ns, nt, base, TaskKind::Regression};

  FrozenInnerResult result;
  result.ensemble.kind = BoostEnsemble::Kind::RegressionWeightedMedian;
  result.ensemble.n_iters = n_iters;

  Vector w(ns + nt);
  w.head(ns) = ws;
  w.tail(nt) = wt;
  const double target_mass = wt.sum();

  for (int t = 0; t < n_iters; ++t) {
    const bool first = result.ensemble.members.empty();
    R2Step step = r2_round(ctx, w, false);
    if (!step.kept && first) {
      if (target_mass > 0.0) {
        w.tail(nt).setConstant(target_mass / static_cast<double>(nt));
      }
      step = r2_round(ctx, w, true);
    }
    if (step.kept) {
      result.ensemble.members.push_back(std::move(step.member));
      result.ensemble.member_betas.push_back(step.beta_t);
    }
    if (step.stop) {
      result.ensemble.early_stop = true;
      break;
    }
    for (Index i = ns; i < ns + nt; ++i)
      w(i) *= std::pow(step.beta_t, -step.losses(i));
    const double new_mass = w.tail(nt).sum();
    if (new_mass > 0.0 && target_mass > 0.0) w.tail(nt) *= target_mass / new_mass;
  }
  result.target_weights = w.tail(nt);
  return result;
}

}  // namespace

TwoStageResult two_stage_tradaboostr2_fit(const Matrix& Xs, const Vector& ys,
                                          const Matrix& Xt, const Vector& yt,
                                          const TwoStageOptions& opts) {
  check_matrix(Xs, "two-stage Xs");
  check_matrix(Xt, "two-stage Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "two-stage inputs must share columns");
  }
  if (yt.size() < 1) {
    throw AdaptError(ErrorCode::MissingTargetLabels,
                     "two-stage boosting requires labeled target rows");
  }
  if (opts.n_steps < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "two-stage needs at least 2 outer steps");
  }
  if (Xt.rows() < opts.cv_folds) {
    throw AdaptError(ErrorCode::TooFewTargets,
                     "target rows fewer than cross-validation folds");
  }

  const Index ns = Xs.rows();
  const Index nt = Xt.rows();
  const double r = static_cast<double>(nt) / static_cast<double>(ns + nt);
  const int S = opts.n_steps;

  auto fold_perm = Rng(opts.seed).split(2).permutation(static_cast<std::size_t>(nt));
  std::vector<int> fold_of(static_cast<std::size_t>(nt));
  for (std::size_t pos = 0; pos < fold_perm.size(); ++pos)
    fold_of[fold_perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(opts.cv_folds));

  Vector ws = Vector::Constant(ns, 1.0 / static_cast<double>(ns + nt));
  Vector wt = Vector::Constant(nt, 1.0 / static_cast<double>(ns + nt));

  TwoStageResult result;
  std::vector<BoostEnsemble> step_ensembles;
  step_ensembles.reserve(static_cast<std::size_t>(S));

  for (int t = 0; t < S; ++t) {
    const double frac =
        r + (static_cast<double>(t) / static_cast<double>(S - 1)) * (1.0 - r);

    // Uniform source rescale by binary search; the fraction is strictly
    // decreasing in the scale, so bisection cannot fail.
    const double tmass = wt.sum();
    const double smass = ws.sum();
    const auto frac_at = [&](double c) { return tmass / (c * smass + tmass); };
    double lo = 0.0, hi = 1.0;
    while (frac_at(hi) > frac) hi *= 2.0;
    double c = hi;
    if (std::abs(frac_at(0.0) - frac) <= 1e-10) {
      c = 0.0;
    } else {
      for (int it = 0; it < 200; ++it) {
        c = 0.5 * (lo + hi);
        const double f = frac_at(c);
        if (std::abs(f - frac) <= 1e-10) break;
        if (f > frac) lo = c;
        else hi = c;
      }
    }
    ws *= c;
    result.achieved_fractions.push_back(wt.sum() / (ws.sum() + wt.sum()));
    const double total = ws.sum() + wt.sum();
    ws /= total;
    wt /= total;

    double cv_err_sum = 0.0;
    for (int f = 0; f < opts.cv_folds; ++f) {
      std::vector<Index> train_rows, held_rows;
      for (Index i = 0; i < nt; ++i)
        (fold_of[static_cast<std::size_t>(i)] == f ? held_rows : train_rows).push_back(i);
      Matrix Xt_train(static_cast<Index>(train_rows.size()), Xt.cols());
      Vector yt_train(static_cast<Index>(train_rows.size()));
      Vector wt_train(static_cast<Index>(train_rows.size()));
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        Xt_train.row(static_cast<Index>(i)) = Xt.row(train_rows[i]);
        yt_train(static_cast<Index>(i)) = yt(train_rows[i]);
        wt_train(static_cast<Index>(i)) = wt(train_rows[i]);
      }
      const auto inner = adaboost_r2_frozen(Xs, ys, Xt_train, yt_train, ws, wt_train,
                                            opts.n_iters, opts.base);
      Matrix Xt_held(static_cast<Index>(held_rows.size()), Xt.cols());
      Vector yt_held(static_cast<Index>(held_rows.size()));
      for (std::size_t i = 0; i < held_rows.size(); ++i) {
        Xt_held.row(static_cast<Index>(i)) = Xt.row(held_rows[i]);
        yt_held(static_cast<Index>(i)) = yt(held_rows[i]);
      }
      const Vector pred = weighted_median_predict(inner.ensemble, Xt_held);
      cv_err_sum += (pred - yt_held).squaredNorm() / static_cast<double>(yt_held.size());
    }
    result.cv_errors.push_back(cv_err_sum / static_cast<double>(opts.cv_folds));

    auto full = adaboost_r2_frozen(Xs, ys, Xt, yt, ws, wt, opts.n_iters, opts.base);
    wt = full.target_weights;
    step_ensembles.push_back(std::move(full.ensemble));
  }

  std::size_t best = 0;
  for (std::size_t t = 1; t < result.cv_errors.size(); ++t)
    if (result.cv_errors[t] < result.cv_errors[best]) best = t;
  result.selected_step = static_cast<int>(best);
  result.ensemble = std::move(step_ensembles[best]);
  return result;
}

}  // namespace adapt::instance
