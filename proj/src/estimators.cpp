#include "adapt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adapt/numerics.hpp"

namespace adapt::estimators {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) - y z, evaluated without overflow.
double nll_term(double z, double y) {
  const double softplus = z >= 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - y * z;
}

}  // namespace

Vector LinearModel::stacked() const {
  Vector out(beta.size() + 1);
  out.head(beta.size()) = beta;
  out(beta.size()) = intercept;
  return out;
}

LinearModel ridge_fit(const Matrix& X, const Vector& y, double lambda,
                      const Vector* sample_weights, const Vector* prior) {
  const Vector coef = numerics::ridge_normal_eq(X, y, lambda, prior, sample_weights);
  LinearModel m;
  m.beta = coef.head(coef.size() - 1);
  m.intercept = coef(coef.size() - 1);
  m.task = TaskKind::Regression;
  return m;
}

Vector ridge_predict(const LinearModel& m, const Matrix& X) {
  if (X.cols() != m.beta.size()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "feature count differs from fit");
  }
  return (X * m.beta).array() + m.intercept;
}

LinearModel logistic_fit(const Matrix& X, const Vector& y, double lambda,
                         const Vector* sample_weights, const Vector* prior) {
  check_matrix(X, "logistic X");
  check_vector(y, "logistic y");
  if (y.size() != X.rows()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "logistic y length must equal X rows");
  }
  if (lambda < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "logistic lambda must be nonnegative");
  }
  const int k = check_labels(y, "logistic y");
  if (k > 2) {
    throw AdaptError(ErrorCode::InvalidLabels, "logistic regression is binary only");
  }
  if (lambda == 0.0 && k < 2) {
    throw AdaptError(ErrorCode::SeparableWithoutPenalty,
                     "a single class is separable; lambda = 0 cannot converge");
  }

  const Index n = X.rows();
  const Index p = X.cols() + 1;
  if (prior && prior->size() != p) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "prior length must equal feature count + 1");
  }
  Matrix Xb(n, p);
  Xb.leftCols(X.cols()) = X;
  Xb.col(p - 1).setOnes();

  Vector s = Vector::Ones(n);
  if (sample_weights) s = numerics::normalize_sample_weights(*sample_weights);
  const Vector beta0 = prior ? *prior : Vector::Zero(p);

  const auto objective = [&](const Vector& beta) {
    const Vector z = Xb * beta;
    double f = 0.0;
    for (Index i = 0; i < n; ++i) f += s(i) * nll_term(z(i), y(i));
    return f + lambda * (beta - beta0).squaredNorm();
  };

  Vector beta = beta0;
  double f = objective(beta);
  constexpr int kMaxIters = 100;
  LinearModel m;
  m.task = TaskKind::Classification;
  m.converged = false;
  int iter = 0;
  for (; iter < kMaxIters; ++iter) {
    const Vector z = Xb * beta;
    Vector prob(n), wdiag(n);
    for (Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(z(i));
      wdiag(i) = s(i) * prob(i) * (1.0 - prob(i));
    }
    const Vector grad =
        Xb.transpose() * (s.cwiseProduct(prob - y)) + 2.0 * lambda * (beta - beta0);
    if (grad.norm() <= 1e-8) {
      m.converged = true;
      break;
    }
    Matrix H = Xb.transpose() * wdiag.asDiagonal() * Xb;
    H.diagonal().array() += 2.0 * lambda;
    const Vector delta = H.ldlt().solve(-grad);
    if (!delta.allFinite()) {
      throw AdaptError(ErrorCode::SingularSystem, "Newton step is not finite");
    }

    // Step halving on objective increase; equality is accepted so the final
    // Newton steps can still shrink the gradient once the objective is flat
    // at double precision.
    double t = 1.0;
    bool stepped = false;
    for (int halving = 0; halving < 50; ++halving) {
      const Vector cand = beta + t * delta;
      const double f_cand = objective(cand);
      if (f_cand <= f) {
        beta = cand;
        f = f_cand;
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    if (lambda == 0.0 && beta.cwiseAbs().maxCoeff() > 1e6) {
      throw AdaptError(ErrorCode::SeparableWithoutPenalty,
                       "coefficients diverged with lambda = 0");
    }
    if (!stepped) break;
  }
  if (lambda == 0.0) {
    // A strict separation of the training rows means the unpenalized optimum
    // sits at infinity; the gradient tolerance is met on the way there.
    const Vector z = Xb * beta;
    bool separated = true;
    for (Index i = 0; i < n; ++i) {
      if ((y(i) == 1.0 && z(i) <= 0.0) || (y(i) == 0.0 && z(i) >= 0.0)) {
        separated = false;
        break;
      }
    }
    if (separated) {
      throw AdaptError(ErrorCode::SeparableWithoutPenalty,
                       "training data is separable; lambda = 0 has no finite optimum");
    }
    if (!m.converged) {
      throw AdaptError(ErrorCode::SeparableWithoutPenalty,
                       "Newton failed to converge with lambda = 0");
    }
  }
  m.beta = beta.head(p - 1);
  m.intercept = beta(p - 1);
  m.iterations = iter;
  return m;
}

Vector logistic_proba(const LinearModel& m, const Matrix& X) {
  if (X.cols() != m.beta.size()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "feature count differs from fit");
  }
  Vector z = (X * m.beta).array() + m.intercept;
  for (Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

Vector logistic_predict(const LinearModel& m, const Matrix& X) {
  Vector p = logistic_proba(m, X);
  for (Index i = 0; i < p.size(); ++i) p(i) = p(i) >= 0.5 ? 1.0 : 0.0;
  return p;
}

Stump stump_fit(const Matrix& X, const Vector& y, const Vector& sample_weights,
                TaskKind task) {
  check_matrix(X, "stump X");
  check_vector(y, "stump y");
  if (y.size() != X.rows() || sample_weights.size() != X.rows()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "stump input sizes are inconsistent");
  }
  double wsum = 0.0;
  for (Index i = 0; i < sample_weights.size(); ++i) {
    if (!std::isfinite(sample_weights(i)) || sample_weights(i) < 0.0) {
      throw AdaptError(ErrorCode::InvalidArgument, "stump weights must be finite and >= 0");
    }
    wsum += sample_weights(i);
  }
  if (wsum <= 0.0) {
    throw AdaptError(ErrorCode::AllWeightsZero, "stump weights sum to zero");
  }
  if (task == TaskKind::Classification) {
    const int k = check_labels(y, "stump y");
    if (k > 2) {
      throw AdaptError(ErrorCode::InvalidLabels, "classification stumps are binary only");
    }
  }

  const Index n = X.rows();
  const Index d = X.cols();
  const Vector& w = sample_weights;

  // Weighted fallback prediction when a side (or the whole stump) is empty.
  double overall = 0.0;
  if (task == TaskKind::Classification) {
    double w1 = 0.0;
    for (Index i = 0; i < n; ++i)
      if (y(i) == 1.0) w1 += w(i);
    overall = w1 > wsum - w1 ? 1.0 : 0.0;
  } else {
    for (Index i = 0; i < n; ++i) overall += w(i) * y(i);
    overall /= wsum;
  }

  Stump best;
  best.task = task;
  double best_score = std::numeric_limits<double>::infinity();
  bool found = false;

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index f = 0; f < d; ++f) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return X(a, f) < X(b, f); });

    if (task == TaskKind::Classification) {
      double total1 = 0.0;
      for (Index i = 0; i < n; ++i)
        if (y(i) == 1.0) total1 += w(i);
      const double total0 = wsum - total1;
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t r = 0; r + 1 < order.size(); ++r) {
        const Index i = order[r];
        if (y(i) == 1.0) left1 += w(i);
        else left0 += w(i);
        const double v = X(i, f);
        const double v_next = X(order[r + 1], f);
        if (v == v_next) continue;
        const double err = std::min(left0, left1) +
                           std::min(total0 - left0, total1 - left1);
        if (err < best_score) {
          best_score = err;
          best.feature_index = f;
          best.threshold = 0.5 * (v + v_next);
          best.left_value = left1 > left0 ? 1.0 : 0.0;
          const double r1 = total1 - left1, r0 = total0 - left0;
          best.right_value = r1 > r0 ? 1.0 : 0.0;
          found = true;
        }
      }
    } else {
      double sw = 0.0, swy = 0.0, swy2 = 0.0;
      double tw = 0.0, twy = 0.0, twy2 = 0.0;
      for (Index i = 0; i < n; ++i) {
        tw += w(i);
        twy += w(i) * y(i);
        twy2 += w(i) * y(i) * y(i);
      }
      for (std::size_t r = 0; r + 1 < order.size(); ++r) {
        const Index i = order[r];
        sw += w(i);
        swy += w(i) * y(i);
        swy2 += w(i) * y(i) * y(i);
        const double v = X(i, f);
        const double v_next = X(order[r + 1], f);
        if (v == v_next) continue;
        const double rw = tw - sw, rwy = twy - swy, rwy2 = twy2 - swy2;
        const double sse_l = sw > 0.0 ? std::max(0.0, swy2 - swy * swy / sw) : 0.0;
        const double sse_r = rw > 0.0 ? std::max(0.0, rwy2 - rwy * rwy / rw) : 0.0;
        const double err = sse_l + sse_r;
        if (err < best_score) {
          best_score = err;
          best.feature_index = f;
          best.threshold = 0.5 * (v + v_next);
          best.left_value = sw > 0.0 ? swy / sw : overall;
          best.right_value = rw > 0.0 ? rwy / rw : overall;
          found = true;
        }
      }
    }
  }

  if (!found) {  // every feature is constant
    best.feature_index = 0;
    best.threshold = X(0, 0);
    best.left_value = overall;
    best.right_value = overall;
  }
  return best;
}

Vector stump_predict(const Stump& s, const Matrix& X) {
  if (s.feature_index >= X.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "stump feature index out of range");
  }
  Vector out(X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    out(i) = X(i, s.feature_index) <= s.threshold ? s.left_value : s.right_value;
  return out;
}

std::string_view estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Ridge: return "ridge";
    case EstimatorKind::Logistic: return "logistic";
    case EstimatorKind::Stump: return "stump";
  }
  return "ridge";
}

EstimatorKind estimator_from_name(std::string_view name) {
  if (name == "ridge") return EstimatorKind::Ridge;
  if (name == "logistic") return EstimatorKind::Logistic;
  if (name == "stump") return EstimatorKind::Stump;
  throw AdaptError(ErrorCode::InvalidConfig, "unknown base estimator: " + std::string(name));
}

BaseModel fit_base(const EstimatorSpec& spec, const Matrix& X, const Vector& y,
                   TaskKind task, const Vector* sample_weights) {
  switch (spec.kind) {
    case EstimatorKind::Ridge:
      if (task != TaskKind::Regression) {
        throw AdaptError(ErrorCode::InvalidArgument, "ridge base requires a regression task");
      }
      return ridge_fit(X, y, spec.lambda, sample_weights);
    case EstimatorKind::Logistic:
      if (task != TaskKind::Classification) {
        throw AdaptError(ErrorCode::InvalidArgument,
                         "logistic base requires a classification task");
      }
      return logistic_fit(X, y, spec.lambda, sample_weights);
    case EstimatorKind::Stump: {
      const Vector ones = Vector::Ones(X.rows());
      return stump_fit(X, y, sample_weights ? *sample_weights : ones, task);
    }
  }
  throw AdaptError(ErrorCode::InvalidArgument, "unknown estimator kind");
}

Vector predict_base(const BaseModel& model, const Matrix& X) {
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return m.task == TaskKind::Classification ? logistic_predict(m, X)
                                                    : ridge_predict(m, X);
        } else {
          return stump_predict(m, X);
        }
      },
      model);
}

}  // namespace adapt::estimators
