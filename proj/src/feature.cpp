#include "adapt/feature.hpp"

#include <cmath>

#include "adapt/numerics.hpp"

namespace adapt::feature {

Matrix fe_augment(const Matrix& X, DomainRole role) {
  check_matrix(X, "fe_augment input");
  const Index n = X.rows();
  const Index d = X.cols();
  Matrix out = Matrix::Zero(n, 3 * d);
  out.leftCols(d) = X;
  if (role == DomainRole::Source) out.middleCols(d, d) = X;
  else out.rightCols(d) = X;
  return out;
}

CoralTransform coral_fit(const Matrix& Xs, const Matrix& Xt, double lambda) {
  check_matrix(Xs, "coral Xs");
  check_matrix(Xt, "coral Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "coral inputs must share column counts");
  }
  if (Xs.rows() < 2 || Xt.rows() < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "coral needs at least 2 rows per domain");
  }
  const Matrix Cs = numerics::covariance_reg(Xs, lambda);
  const Matrix Ct = numerics::covariance_reg(Xt, lambda);
  CoralTransform t;
  t.M = numerics::psd_power(Cs, numerics::PsdExponent::MinusHalf) *
        numerics::psd_power(Ct, numerics::PsdExponent::PlusHalf);
  t.lambda = lambda;
  t.source_mean = Xs.colwise().mean();
  t.target_mean = Xt.colwise().mean();
  return t;
}

Matrix coral_transform(const CoralTransform& t, const Matrix& X) {
  if (X.cols() != t.M.rows()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "coral transform dimension mismatch");
  }
  Matrix out = (X.rowwise() - t.source_mean.transpose()) * t.M;
  out.rowwise() += t.target_mean.transpose();
  return out;
}

Matrix msda_layer(const Matrix& X, double p) {
  check_matrix(X, "msda input");
  if (!(p >= 0.0 && p < 1.0)) {
    throw AdaptError(ErrorCode::InvalidArgument, "corruption probability must be in [0, 1)");
  }
  const Index n = X.rows();
  const Index d = X.cols();
  Matrix Xb(n, d + 1);
  Xb.leftCols(d) = X;
  Xb.col(d).setOnes();

  const Matrix S = Xb.transpose() * Xb;
  Vector q = Vector::Constant(d + 1, 1.0 - p);
  q(d) = 1.0;  // bias never corrupted

  Matrix P = S.topRows(d) * q.asDiagonal();
  Matrix Q = q.asDiagonal() * S * q.asDiagonal();
  Q.diagonal() = q.cwiseProduct(S.diagonal());
  Q.diagonal().array() += 1e-8;

  // W (d x (d+1)) solves W Q = P; stored transposed so a layer applies as
  // [X, 1] * W_stored.
  const Matrix Wt = Q.ldlt().solve(P.transpose());
  return Wt;
}

MsdaModel msda_fit(const Matrix& Xs, const Matrix& Xt, double p, int n_layers) {
  check_matrix(Xs, "msda Xs");
  check_matrix(Xt, "msda Xt");
  if (Xs.cols() != Xt.cols()) {
    throw AdaptError(ErrorCode::DimensionMismatch, "msda inputs must share column counts");
  }
  if (n_layers < 1) {
    throw AdaptError(ErrorCode::InvalidArgument, "msda needs at least one layer");
  }
  Matrix H(Xs.rows() + Xt.rows(), Xs.cols());
  H.topRows(Xs.rows()) = Xs;
  H.bottomRows(Xt.rows()) = Xt;

  MsdaModel model;
  model.p = p;
  model.layers.reserve(static_cast<std::size_t>(n_layers));
  for (int k = 0; k < n_layers; ++k) {
    Matrix W = msda_layer(H, p);
    Matrix Hb(H.rows(), H.cols() + 1);
    Hb.leftCols(H.cols()) = H;
    Hb.col(H.cols()).setOnes();
    H = (Hb * W).array().tanh();
    model.layers.push_back(std::move(W));
  }
  return model;
}

Matrix msda_transform(const MsdaModel& m, const Matrix& X) {
  if (m.layers.empty()) {
    throw AdaptError(ErrorCode::InvalidArgument, "msda model has no layers");
  }
  Matrix H = X;
  for (const Matrix& W : m.layers) {
    if (H.cols() + 1 != W.rows()) {
      throw AdaptError(ErrorCode::DimensionMismatch, "msda transform dimension mismatch");
    }
    Matrix Hb(H.rows(), H.cols() + 1);
    Hb.leftCols(H.cols()) = H;
    Hb.col(H.cols()).setOnes();
    H = (Hb * W).array().tanh();
  }
  return H;
}

}  // namespace adapt::feature
