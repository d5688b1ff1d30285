#pragma once

// Generalized extreme value margins and the transform to unit Frechet scale.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/rng.hpp"

namespace dmcle {

struct GevMargin {
  double location = 0.0;
  double scale = 1.0;  // > 0
  double shape = 0.0;
};

// Outputs of the transform at the support boundary (z = 0, or z = inf for a
// negative shape) are replaced by these and their indices reported.
inline constexpr double kFrechetLowerClamp = 1e-6;
inline constexpr double kFrechetUpperClamp = 1e6;
// Below this |shape| the Gumbel limit exp((y - mu) / scale) is used.
inline constexpr double kGumbelShapeCutoff = 1e-10;

struct FrechetColumn {
  Eigen::VectorXd z;
  std::vector<std::size_t> boundary;  // indices that were clamped
};

// z = [1 + shape (y - mu) / scale]_+^(1 / shape). Throws DataError when
// every entry lands on the boundary, ValidationError when scale <= 0.
FrechetColumn frechet_transform(const Eigen::VectorXd& y, const GevMargin& margin);

// Probability-weighted-moment (L-moment) estimate; the Gumbel fit is used
// when the shape comes out below the cutoff.
GevMargin fit_gev_lmoments(const Eigen::VectorXd& y);

// GEV cdf, handy for goodness-of-fit checks.
double gev_cdf(double y, const GevMargin& margin);

Eigen::VectorXd sample_gev(const GevMargin& margin, std::size_t n, CounterRng& rng);

}  // namespace dmcle
