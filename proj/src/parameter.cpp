#include "adapt/parameter.hpp"

#include "adapt/numerics.hpp"

namespace adapt::parameter {

namespace {

void check_prior(const Matrix& Xt, const SourcePrior& prior, TaskKind expected) {
  if (prior.task != expected) {
    throw AdaptError(ErrorCode::InvalidArgument, "prior task does not match the method");
  }
  if (prior.beta_src.size() != Xt.cols() + 1) {
    throw AdaptError(ErrorCode::DimensionMismatch,
                     "prior length must equal target feature count + 1");
  }
  check_vector(prior.beta_src, "prior coefficients");
}

}  // namespace

estimators::LinearModel regular_transfer_lr(const Matrix& Xt, const Vector& yt,
                                            const SourcePrior& prior, double lambda) {
  check_prior(Xt, prior, TaskKind::Regression);
  if (lambda < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "transfer lambda must be nonnegative");
  }
  return estimators::ridge_fit(Xt, yt, lambda, nullptr, &prior.beta_src);
}

estimators::LinearModel regular_transfer_lc(const Matrix& Xt, const Vector& yt,
                                            const SourcePrior& prior, double lambda) {
  check_prior(Xt, prior, TaskKind::Classification);
  if (lambda < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "transfer lambda must be nonnegative");
  }
  return estimators::logistic_fit(Xt, yt, lambda, nullptr, &prior.beta_src);
}

}  // namespace adapt::parameter
