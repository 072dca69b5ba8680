#pragma once

#include <vector>

#include "adapt/types.hpp"

namespace adapt::feature {

enum class DomainRole { Source, Target };

/// Frustratingly-easy augmentation. Output blocks are
/// [general | source-specific | target-specific]: source rows map to
/// (x, x, 0), target rows to (x, 0, x).
Matrix fe_augment(const Matrix& X, DomainRole role);

/// Aligns source second-order statistics (and means) to the target:
/// x -> (x - source_mean) * M + target_mean with
/// M = cov_reg(Xs)^{-1/2} * cov_reg(Xt)^{+1/2}.
struct CoralTransform {
  Matrix M;
  double lambda = 1.0;
  Vector source_mean;
  Vector target_mean;
};

CoralTransform coral_fit(const Matrix& Xs, const Matrix& Xt, double lambda = 1.0);
Matrix coral_transform(const CoralTransform& t, const Matrix& X);

/// Marginalized denoising layers with closed-form maps under dropout-style
/// corruption: each stored W is (d+1) x d (bias row last) and a layer output
/// is tanh([X, 1] * W).
struct MsdaModel {
  std::vector<Matrix> layers;
  double p = 0.5;
};

/// Closed-form single-layer map. With bias column appended and survival
/// vector q = [(1-p), ..., (1-p), 1], scatter S = Xb^T Xb:
///   P_ij = S_ij q_j              (i restricted to non-bias rows)
///   Q_ij = S_ij q_i q_j (i != j),  Q_ii = q_i S_ii
/// and W solves W (Q + 1e-8 I) = P. Returned transposed, (d+1) x d.
Matrix msda_layer(const Matrix& X, double p);

/// Stacks msda_layer over the row-stacked union of Xs and Xt; layer k is fit
/// on layer k-1's tanh output.
MsdaModel msda_fit(const Matrix& Xs, const Matrix& Xt, double p = 0.5, int n_layers = 3);
Matrix msda_transform(const MsdaModel& m, const Matrix& X);

}  // namespace adapt::feature
