#pragma once

#include <optional>
#include <vector>

#include "adapt/rng.hpp"
#include "adapt/types.hpp"

namespace adapt::numerics {

/// RBF kernel: entry (i,j) = exp(-gamma * ||A_i - B_j||^2).
/// Distances are accumulated directly per pair, so K(A,A) is exactly
/// symmetric with a unit diagonal.
Matrix rbf_kernel(const Matrix& A, const Matrix& B, double gamma);

/// Bandwidth gamma = 1 / (2 m^2), m = median pairwise Euclidean distance over
/// distinct index pairs. Rows are subsampled to at most 1000 (seeded) first.
/// Throws DegenerateData when the median distance is zero.
double median_heuristic(const Matrix& X, std::uint64_t seed = 0);

/// Sample covariance with (n-1) denominator plus lambda * I.
Matrix covariance_reg(const Matrix& X, double lambda);

enum class PsdExponent { MinusHalf, PlusHalf };

/// Symmetric PSD matrix power via eigendecomposition. Eigenvalues are floored
/// at 1e-12 before powering. Throws NotSymmetric when max |C - C^T| > 1e-8.
Matrix psd_power(const Matrix& C, PsdExponent exponent);

/// Penalized weighted least squares with intercept:
///   argmin_beta  sum_i s_i (x_i^T beta - y_i)^2 + lambda ||beta - prior||^2
/// A ones column is appended internally; the intercept is the last
/// coefficient and participates in the penalty. Sample weights are rescaled
/// to sum to the number of nonzero entries, which keeps the solution
/// invariant to uniform weight rescaling without disturbing the unweighted
/// or subset cases. Throws SingularSystem when lambda = 0 and the Gram
/// matrix is rank-deficient.
Vector ridge_normal_eq(const Matrix& X, const Vector& y, double lambda,
                       const Vector* prior = nullptr,
                       const Vector* sample_weights = nullptr);

/// Rescale weights so they sum to the count of nonzero entries.
/// Throws AllWeightsZero / InvalidArgument on degenerate input.
Vector normalize_sample_weights(const Vector& w);

/// minimize (1/2) w^T K w - kappa^T w
/// subject to 0 <= w_i <= B and |sum w_i - n| <= n * eps.
struct QpProblem {
  Matrix K;
  Vector kappa;
  double B = 1000.0;
  double eps = 0.0;
};

struct QpResult {
  Vector w;
  bool converged = true;
  int iterations = 0;
  double objective = 0.0;
};

/// Projected gradient descent with fixed step 1/L (power-iteration estimate
/// of the largest eigenvalue) and Dykstra projections onto box and sum slab.
/// K is regularized by +1e-8 I internally. Stops after the relative objective
/// change stays below 1e-9 for 10 consecutive iterations, or 10000 iterations
/// (then converged = false and the best feasible iterate is returned).
/// Throws Infeasible when B < 1 - eps.
QpResult solve_kmm_qp(const QpProblem& p, Rng rng = Rng(0));

struct KliepResult {
  Vector alpha;
  bool converged = true;
  std::vector<double> objective_trace;  // accepted objective values, nondecreasing
};

/// maximize sum_j log((K_tc alpha)_j)
/// subject to alpha >= 0 and k_sc_mean^T alpha = 1.
/// Projected gradient ascent with backtracking (halving, Armijo 1e-4);
/// projection clips negatives then rescales onto the equality constraint.
KliepResult kliep_optimize(const Matrix& K_tc, const Vector& k_sc_mean);

}  // namespace adapt::numerics
