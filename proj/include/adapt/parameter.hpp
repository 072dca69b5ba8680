#pragma once

#include "adapt/estimators.hpp"
#include "adapt/types.hpp"

namespace adapt::parameter {

/// Coefficients (intercept last) of a source-fitted linear model.
struct SourcePrior {
  Vector beta_src;  // length d + 1
  TaskKind task = TaskKind::Regression;
};

/// Ridge refit of target data penalized toward the source coefficients.
estimators::LinearModel regular_transfer_lr(const Matrix& Xt, const Vector& yt,
                                            const SourcePrior& prior, double lambda);

/// Logistic refit of target data penalized toward the source coefficients.
estimators::LinearModel regular_transfer_lc(const Matrix& Xt, const Vector& yt,
                                            const SourcePrior& prior, double lambda);

}  // namespace adapt::parameter
