#pragma once

#include <optional>
#include <string>

#include "adapt/types.hpp"

namespace adapt::data {

/// Covariate-shift regression testbed: x_s ~ N(0.5, 0.5^2),
/// x_t ~ N(0.0, 0.3^2), y = x^3 - x + N(0, 0.1^2). Same conditional law on
/// both domains.
AdaptInput gen_covshift_1d(Index n_source, Index n_target, std::uint64_t seed);

/// Two interleaving half-circles with Gaussian noise; the target domain is
/// the same construction rotated by angle_deg about the origin (labels
/// preserved). angle_deg must lie in [0, 180).
AdaptInput gen_rotated_moons(Index n, double angle_deg, double noise, std::uint64_t seed);

/// Balanced two-Gaussian binary target; the source draws from the same law
/// but keeps an instance with probability min(1, exp(-bias_strength * x1)),
/// over-representing low-x1 instances. Throws SamplingStalled past 1e6
/// attempts.
AdaptInput gen_sample_bias(Index n_source, Index n_target, double bias_strength,
                           std::uint64_t seed);

struct CsvData {
  Matrix X;
  std::optional<Vector> y;
  TaskKind task = TaskKind::Regression;  // meaningful when y is present
  std::vector<std::string> feature_names;
};

/// Comma-separated, '.' decimal point, mandatory header, UTF-8. The target
/// column (when requested and present) is split out; integer-valued targets
/// with <= 20 distinct values classify as labels, anything else as
/// regression. require_target makes a missing column an error.
CsvData load_csv(const std::string& path, const std::string& target_column,
                 bool require_target = true);

/// Writes features (and the label column when y is given) with 17 significant
/// digits so values round-trip exactly.
void save_csv(const std::string& path, const Matrix& X, const Vector* y,
              const std::string& target_column = "y");

}  // namespace adapt::data
