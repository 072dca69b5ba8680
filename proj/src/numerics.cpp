#include "adapt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adapt::numerics {

namespace {

double squared_distance(const Matrix& A, Index i, const Matrix& B, Index j) {
  double d2 = 0.0;
  for (Index c = 0; c < A.cols(); ++c) {
    const double diff = A(i, c) - B(j, c);
    d2 += diff * diff;
  }
  return d2;
}

}  // namespace

Matrix rbf_kernel(const Matrix& A, const Matrix& B, double gamma) {
  check_matrix(A, "kernel input A");
  check_matrix(B, "kernel input B");
  if (A.cols() != B.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "kernel inputs must have equal column counts");
  }
  if (!(gamma > 0.0)) {
    throw AdaptError(ErrorCode::NonPositiveGamma, "gamma must be positive");
  }
  Matrix K(A.rows(), B.rows());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < B.rows(); ++j)
      K(i, j) = std::exp(-gamma * squared_distance(A, i, B, j));
  return K;
}

double median_heuristic(const Matrix& X, std::uint64_t seed) {
  check_matrix(X, "median heuristic input");
  if (X.rows() < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "median heuristic needs at least 2 rows");
  }
  constexpr Index kMaxRows = 1000;
  std::vector<Index> rows;
  if (X.rows() > kMaxRows) {
    Rng rng(seed);
    auto perm = rng.permutation(static_cast<std::size_t>(X.rows()));
    rows.assign(perm.begin(), perm.begin() + kMaxRows);
    std::sort(rows.begin(), rows.end());
  } else {
    rows.resize(static_cast<std::size_t>(X.rows()));
    for (Index i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  }
  const std::size_t n = rows.size();
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dists.push_back(std::sqrt(squared_distance(X, rows[i], X, rows[j])));
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median =
      (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  if (!(median > 0.0)) {
    throw AdaptError(ErrorCode::DegenerateData, "median pairwise distance is zero");
  }
  return 1.0 / (2.0 * median * median);
}

Matrix covariance_reg(const Matrix& X, double lambda) {
  check_matrix(X, "covariance input");
  if (X.rows() < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "covariance needs at least 2 rows");
  }
  if (lambda < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "covariance lambda must be nonnegative");
  }
  const Vector mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean.transpose();
  Matrix C = (centered.transpose() * centered) / static_cast<double>(X.rows() - 1);
  C.diagonal().array() += lambda;
  return C;
}

Matrix psd_power(const Matrix& C, PsdExponent exponent) {
  check_matrix(C, "psd_power input");
  if (C.rows() != C.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "psd_power input must be square");
  }
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) {
    std::ostringstream os;
    os << "matrix asymmetry " << asym << " exceeds 1e-8";
    throw AdaptError(ErrorCode::NotSymmetric, os.str());
  }
  const Matrix sym = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector lam = eig.eigenvalues();
  constexpr double kFloor = 1e-12;
  for (Index i = 0; i < lam.size(); ++i) {
    const double v = std::max(lam(i), kFloor);
    lam(i) = exponent == PsdExponent::PlusHalf ? std::sqrt(v) : 1.0 / std::sqrt(v);
  }
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Vector normalize_sample_weights(const Vector& w) {
  Index nonzero = 0;
  double sum = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0.0) {
      throw AdaptError(ErrorCode::InvalidArgument, "sample weights must be finite and >= 0");
    }
    if (w(i) > 0.0) ++nonzero;
    sum += w(i);
  }
  if (nonzero == 0 || sum <= 0.0) {
    throw AdaptError(ErrorCode::AllWeightsZero, "sample weights sum to zero");
  }
  return w * (static_cast<double>(nonzero) / sum);
}

Vector ridge_normal_eq(const Matrix& X, const Vector& y, double lambda,
                       const Vector* prior, const Vector* sample_weights) {
  check_matrix(X, "ridge X");
  check_vector(y, "ridge y");
  if (y.size() != X.rows()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "ridge y length must equal X rows");
  }
  if (lambda < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "ridge lambda must be nonnegative");
  }
  const Index n = X.rows();
  const Index p = X.cols() + 1;
  if (prior && prior->size() != p) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "prior length must equal feature count + 1");
  }
  if (sample_weights && sample_weights->size() != n) {
    throw AdaptError(ErrorCode::DimensionMismatch, "sample weights length must equal X rows");
  }

  Matrix Xb(n, p);
  Xb.leftCols(X.cols()) = X;
  Xb.col(p - 1).setOnes();

  Matrix A;
  Vector rhs;
  if (sample_weights) {
    const Vector s = normalize_sample_weights(*sample_weights);
    A = Xb.transpose() * s.asDiagonal() * Xb;
    rhs = Xb.transpose() * (s.asDiagonal() * y);
  } else {
    A = Xb.transpose() * Xb;
    rhs = Xb.transpose() * y;
  }
  A.diagonal().array() += lambda;
  if (prior) rhs += lambda * (*prior);

  if (lambda == 0.0) {
    Eigen::FullPivLU<Matrix> lu(A);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
      throw AdaptError(ErrorCode::SingularSystem,
                       "Gram matrix is rank-deficient and lambda is zero");
    }
    return lu.solve(rhs);
  }
  return A.ldlt().solve(rhs);
}

QpResult solve_kmm_qp(const QpProblem& p, Rng rng) {
  const Index n = p.K.rows();
  if (p.K.cols() != n || p.kappa.size() != n || n < 1) {
    throw AdaptError(ErrorCode::DimensionMismatch, "QP sizes are inconsistent");
  }
  if (p.eps < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "QP eps must be nonnegative");
  }
  const double dn = static_cast<double>(n);
  const double sum_lo = dn * (1.0 - p.eps);
  const double sum_hi = dn * (1.0 + p.eps);
  if (p.B * dn < sum_lo) {
    std::ostringstream os;
    os << "box bound B=" << p.B << " cannot reach the sum constraint";
    throw AdaptError(ErrorCode::Infeasible, os.str());
  }

  Matrix K = p.K;
  K.diagonal().array() += 1e-8;

  const auto project_box = [&](Vector& v) {
    for (Index i = 0; i < n; ++i) v(i) = std::clamp(v(i), 0.0, p.B);
  };
  const auto project_slab = [&](Vector& v) {
    const double s = v.sum();
    if (s < sum_lo) v.array() += (sum_lo - s) / dn;
    else if (s > sum_hi) v.array() -= (s - sum_hi) / dn;
  };
  // Dykstra's alternating projections onto box and slab.
  const auto project_feasible = [&](const Vector& v) {
    Vector x = v;
    Vector pc = Vector::Zero(n);
    Vector qc = Vector::Zero(n);
    for (int it = 0; it < 500; ++it) {
      Vector y = x + pc;
      project_box(y);
      pc = x + pc - y;
      x = y + qc;
      project_slab(x);
      qc = y + qc - x;
      double box_violation = 0.0;
      for (Index i = 0; i < n; ++i)
        box_violation = std::max(box_violation,
                                 std::max(0.0 - x(i), x(i) - p.B));
      const double s = x.sum();
      const double slab_violation = std::max({0.0, sum_lo - s, s - sum_hi});
      if (box_violation <= 1e-12 && slab_violation <= 1e-12) break;
    }
    return x;
  };

  // Lipschitz constant of the gradient: largest eigenvalue of K by power
  // iteration, with a small inflation for the estimation error.
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform() + 0.1;
  v.normalize();
  double lmax = 1.0;
  for (int it = 0; it < 500; ++it) {
    Vector Kv = K * v;
    const double norm = Kv.norm();
    if (norm <= 0.0) break;
    Kv /= norm;
    const double est = v.dot(K * v);
    if (it > 10 && std::abs(est - lmax) <= 1e-12 * std::abs(est)) {
      lmax = est;
      break;
    }
    lmax = est;
    v = Kv;
  }
  lmax = std::max(lmax * 1.05, 1e-10);
  const double step = 1.0 / lmax;

  const auto objective = [&](const Vector& w) {
    return 0.5 * w.dot(K * w) - p.kappa.dot(w);
  };

  Vector w = project_feasible(Vector::Ones(n));
  double f = objective(w);
  Vector best_w = w;
  double best_f = f;
  int consecutive = 0;
  constexpr int kMaxIters = 10000;
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIters; ++iter) {
    const Vector grad = K * w - p.kappa;
    w = project_feasible(w - step * grad);
    const double f_new = objective(w);
    if (f_new < best_f) {
      best_f = f_new;
      best_w = w;
    }
    const double rel_change = std::abs(f_new - f) / (1.0 + std::abs(f_new));
    consecutive = rel_change < 1e-9 ? consecutive + 1 : 0;
    f = f_new;
    if (consecutive >= 10) {
      converged = true;
      break;
    }
  }
  return QpResult{best_w, converged, iter + 1, best_f};
}

KliepResult kliep_optimize(const Matrix& K_tc, const Vector& k_sc_mean) {
  const Index nc = K_tc.cols();
  if (k_sc_mean.size() != nc) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "center-mean vector length must equal the center count");
  }
  if (k_sc_mean.maxCoeff() <= 0.0) {
    throw AdaptError(ErrorCode::DegenerateData,
                     "source kernel means have no positive entry");
  }

  // Clip negatives, then rescale onto the equality constraint. Returns false
  // when everything clips away (the caller shortens the step).
  const auto project = [&](Vector& a) {
    a = a.cwiseMax(0.0);
    const double s = k_sc_mean.dot(a);
    if (!(s > 1e-300)) return false;
    a /= s;
    return true;
  };

  const auto objective = [&](const Vector& a, bool& ok) {
    const Vector r = K_tc * a;
    double f = 0.0;
    ok = true;
    for (Index j = 0; j < r.size(); ++j) {
      if (!(r(j) > 0.0)) {
        ok = false;
        return 0.0;
      }
      f += std::log(r(j));
    }
    return f;
  };

  Vector alpha = Vector::Ones(nc);
  if (!project(alpha)) {
    throw AdaptError(ErrorCode::DegenerateData, "cannot initialize a feasible alpha");
  }
  bool ok = true;
  double f = objective(alpha, ok);
  if (!ok) {
    throw AdaptError(ErrorCode::DegenerateData, "initial objective is undefined");
  }

  KliepResult result;
  result.objective_trace.push_back(f);

  double step = 1.0;
  constexpr int kMaxIters = 2000;
  constexpr double kArmijo = 1e-4;
  int stall = 0;
  bool converged = false;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    const Vector ratio = (K_tc * alpha).cwiseInverse();
    const Vector grad = K_tc.transpose() * ratio;
    bool accepted = false;
    double t = step;
    for (int halving = 0; halving < 60; ++halving) {
      Vector cand = alpha + t * grad;
      if (!project(cand)) {
        t *= 0.5;
        continue;
      }
      bool cand_ok = true;
      const double f_cand = objective(cand, cand_ok);
      if (cand_ok && f_cand >= f + kArmijo * grad.dot(cand - alpha) && f_cand >= f) {
        const double improvement = f_cand - f;
        alpha = cand;
        f = f_cand;
        result.objective_trace.push_back(f);
        accepted = true;
        step = t * 2.0;
        stall = improvement < 1e-10 * (1.0 + std::abs(f)) ? stall + 1 : 0;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || stall >= 5) {
      converged = true;
      break;
    }
  }
  result.alpha = alpha;
  result.converged = converged;
  return result;
}

}  // namespace adapt::numerics
