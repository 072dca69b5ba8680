#include <doctest.h>

#include <cmath>

#include "adapt/numerics.hpp"
#include "oracles.hpp"

using namespace adapt;
using namespace adapt::numerics;

namespace {

Matrix random_matrix(Rng& rng, Index n, Index d, double scale = 1.0) {
  Matrix X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = scale * rng.normal();
  return X;
}

}  // namespace

TEST_CASE("rbf_kernel basics") {
  Rng rng(11);
  const Matrix A = random_matrix(rng, 6, 3);

  SUBCASE("self kernel has a unit diagonal and exact symmetry") {
    const Matrix K = rbf_kernel(A, A, 0.7);
    for (Index i = 0; i < K.rows(); ++i) CHECK(K(i, i) == 1.0);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(K.minCoeff() > 0.0);
    CHECK(K.maxCoeff() <= 1.0);
  }

  SUBCASE("two points at distance 1") {
    Matrix P(2, 1);
    P << 0.0, 1.0;
    const Matrix K = rbf_kernel(P, P, 1.0);
    CHECK(K(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }

  SUBCASE("gamma -> 0 limit pushes entries to 1") {
    const Matrix K = rbf_kernel(A, A, 1e-12);
    CHECK(K.minCoeff() >= 1.0 - 1e-6);
  }

  SUBCASE("errors") {
    const Matrix B = random_matrix(rng, 4, 2);
    CHECK_THROWS_AS(rbf_kernel(A, B, 1.0), AdaptError);
    CHECK_THROWS_AS(rbf_kernel(A, A, 0.0), AdaptError);
    CHECK_THROWS_AS(rbf_kernel(A, A, -2.0), AdaptError);
  }
}

TEST_CASE("median_heuristic") {
  SUBCASE("two points at distance 2") {
    Matrix X(2, 1);
    X << 0.0, 2.0;
    CHECK(median_heuristic(X) == doctest::Approx(0.125).epsilon(1e-15));
  }

  SUBCASE("identical points are degenerate") {
    Matrix X = Matrix::Constant(5, 2, 3.0);
    CHECK_THROWS_AS(median_heuristic(X), AdaptError);
    try {
      median_heuristic(X);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::DegenerateData);
    }
  }

  SUBCASE("matches the exhaustive-pairs recomputation exactly") {
    Rng rng(7);
    const Matrix X = random_matrix(rng, 100, 2);
    const double m = oracles::median_all_pairs(X);
    CHECK(median_heuristic(X) == 1.0 / (2.0 * m * m));
  }
}

TEST_CASE("covariance_reg") {
  SUBCASE("hand-computed 1-D case") {
    Matrix X(2, 1);
    X << 1.0, 3.0;
    const Matrix C = covariance_reg(X, 0.0);
    CHECK(C(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("lambda adds exactly lambda * I") {
    Rng rng(3);
    const Matrix X = random_matrix(rng, 12, 3);
    const Matrix diff = covariance_reg(X, 5.0) - covariance_reg(X, 0.0);
    CHECK((diff - 5.0 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("matches a two-pass reference") {
    Rng rng(41);
    const Matrix X = random_matrix(rng, 50, 3);
    const Matrix C = covariance_reg(X, 0.0);
    CHECK((C - oracles::covariance_two_pass(X)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("psd_power") {
  SUBCASE("identity is a fixed point") {
    const Matrix I = Matrix::Identity(3, 3);
    CHECK((psd_power(I, PsdExponent::PlusHalf) - I).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((psd_power(I, PsdExponent::MinusHalf) - I).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("scalar case") {
    Matrix C(1, 1);
    C << 4.0;
    CHECK(psd_power(C, PsdExponent::PlusHalf)(0, 0) == doctest::Approx(2.0));
    CHECK(psd_power(C, PsdExponent::MinusHalf)(0, 0) == doctest::Approx(0.5));
  }

  SUBCASE("square of the half power recovers the matrix") {
    Rng rng(5);
    const Matrix A = random_matrix(rng, 4, 4);
    const Matrix C = A * A.transpose() + 0.1 * Matrix::Identity(4, 4);
    const Matrix H = psd_power(C, PsdExponent::PlusHalf);
    CHECK((H * H - C).norm() <= 1e-8 * C.norm());
  }

  SUBCASE("minus half whitens") {
    Rng rng(6);
    const Matrix A = random_matrix(rng, 4, 4);
    const Matrix C = A * A.transpose() + 0.5 * Matrix::Identity(4, 4);
    const Matrix W = psd_power(C, PsdExponent::MinusHalf);
    CHECK((W * C * W - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("asymmetric input is rejected") {
    Matrix C(2, 2);
    C << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(psd_power(C, PsdExponent::PlusHalf), AdaptError);
  }
}

TEST_CASE("ridge_normal_eq") {
  SUBCASE("exact linear data") {
    Matrix X(3, 1);
    X << 1.0, 2.0, 3.0;
    Vector y(3);
    y << 2.0, 4.0, 6.0;
    const Vector beta = ridge_normal_eq(X, y, 0.0);
    CHECK(beta(0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(beta(1)) < 1e-10);
  }

  SUBCASE("huge lambda pins the solution to the prior") {
    Matrix X(4, 1);
    X << 1.0, 2.0, 3.0, 4.0;
    Vector y(4);
    y << 1.0, 0.0, 2.0, 1.0;
    Vector prior(2);
    prior << 5.0, 1.0;
    const Vector beta = ridge_normal_eq(X, y, 1e8, &prior);
    CHECK((beta - prior).cwiseAbs().maxCoeff() < 1e-3);
  }

  SUBCASE("gradient vanishes at the solution") {
    Rng rng(9);
    const Matrix X = random_matrix(rng, 30, 2);
    Vector y(30);
    for (Index i = 0; i < 30; ++i) y(i) = rng.normal();
    const Vector beta = ridge_normal_eq(X, y, 0.1);
    const auto objective = [&](const Vector& b) {
      return oracles::ridge_objective(X, y, 0.1, b);
    };
    const Vector g = oracles::central_difference(objective, beta);
    CHECK(g.norm() <= 1e-8);
  }

  SUBCASE("rank-deficient Gram with lambda = 0 is singular") {
    Matrix X(3, 2);
    X << 1.0, 2.0, 2.0, 4.0, 3.0, 6.0;  // second column is 2x the first
    Vector y(3);
    y << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(ridge_normal_eq(X, y, 0.0), AdaptError);
  }
}

TEST_CASE("solve_kmm_qp") {
  SUBCASE("symmetric separable optimum") {
    QpProblem p;
    p.K = Matrix::Identity(2, 2);
    p.kappa = Vector::Ones(2);
    p.B = 2.0;
    p.eps = 0.1;
    const auto res = solve_kmm_qp(p);
    CHECK(res.w(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.w(1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.converged);
  }

  SUBCASE("infeasible box below the sum slab") {
    QpProblem p;
    p.K = Matrix::Identity(10, 10);
    p.kappa = Vector::Ones(10);
    p.B = 0.5;
    p.eps = 0.1;
    CHECK_THROWS_AS(solve_kmm_qp(p), AdaptError);
    try {
      solve_kmm_qp(p);
    } catch (const AdaptError& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
    }
  }

  SUBCASE("objective matches the grid oracle on a random 3-dim instance") {
    Rng rng(17);
    const Matrix A = random_matrix(rng, 3, 3, 0.6);
    QpProblem p;
    p.K = A * A.transpose() + 0.3 * Matrix::Identity(3, 3);
    p.kappa = Vector(3);
    for (Index i = 0; i < 3; ++i) p.kappa(i) = rng.uniform(0.5, 1.5);
    p.B = 1.5;
    p.eps = 0.4;
    const auto res = solve_kmm_qp(p);
    const double f_grid = oracles::qp_grid_search(p);
    CHECK(oracles::qp_objective(p, res.w) <= f_grid + 1e-5);
    CHECK(std::abs(oracles::qp_objective(p, res.w) - f_grid) < 1e-5);
  }

  SUBCASE("feasibility holds on every return path") {
    Rng rng(23);
    for (int trial = 0; trial < 8; ++trial) {
      const Index n = 2 + static_cast<Index>(rng.uniform_index(5));
      const Matrix A = random_matrix(rng, n, n, 0.7);
      QpProblem p;
      p.K = A * A.transpose() + 0.05 * Matrix::Identity(n, n);
      p.kappa = Vector(n);
      for (Index i = 0; i < n; ++i) p.kappa(i) = rng.uniform(0.0, 2.0);
      p.B = rng.uniform(1.0, 3.0);
      p.eps = rng.uniform(0.2, 0.8);
      const auto res = solve_kmm_qp(p, rng.split(trial));
      const double dn = static_cast<double>(n);
      CHECK(res.w.minCoeff() >= -1e-9);
      CHECK(res.w.maxCoeff() <= p.B + 1e-9);
      CHECK(std::abs(res.w.sum() - dn) <= dn * p.eps + 1e-6);
    }
  }
}

TEST_CASE("kliep_optimize") {
  SUBCASE("single center is forced by the constraint") {
    Matrix K_tc(4, 1);
    K_tc << 0.2, 0.4, 0.9, 0.5;
    Vector b(1);
    b << 0.5;
    const auto res = kliep_optimize(K_tc, b);
    CHECK(res.alpha(0) == doctest::Approx(2.0).epsilon(1e-9));
  }

  SUBCASE("constraint and positivity hold at return") {
    Rng rng(31);
    const Matrix Xt = random_matrix(rng, 12, 2);
    const Matrix Xs = random_matrix(rng, 15, 2);
    const Matrix centers = Xt.topRows(5);
    const Matrix K_tc = rbf_kernel(Xt, centers, 0.8);
    const Vector b = rbf_kernel(Xs, centers, 0.8).colwise().mean();
    const auto res = kliep_optimize(K_tc, b);
    CHECK(res.alpha.minCoeff() >= 0.0);
    CHECK(std::abs(b.dot(res.alpha) - 1.0) <= 1e-6);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1]);
  }

  SUBCASE("objective reaches the long-run reference") {
    Rng rng(37);
    const Matrix Xt = random_matrix(rng, 8, 2);
    const Matrix Xs = random_matrix(rng, 10, 2);
    const Matrix centers = Xt.topRows(3);
    const Matrix K_tc = rbf_kernel(Xt, centers, 0.5);
    const Vector b = rbf_kernel(Xs, centers, 0.5).colwise().mean();
    const auto res = kliep_optimize(K_tc, b);
    const double f_impl = res.objective_trace.back();
    const double f_ref = oracles::kliep_long_run(K_tc, b);
    CHECK(std::abs(f_impl - f_ref) <= 1e-4);
  }

  SUBCASE("rejects an all-nonpositive normalizer") {
    Matrix K_tc(2, 2);
    K_tc << 0.5, 0.5, 0.5, 0.5;
    Vector b(2);
    b << 0.0, -0.1;
    CHECK_THROWS_AS(kliep_optimize(K_tc, b), AdaptError);
  }
}
