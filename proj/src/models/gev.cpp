#include "dmcle/models/gev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dmcle/errors.hpp"

namespace dmcle {

namespace {

void check_margin(const GevMargin& m) {
  if (!(m.scale > 0.0) || !std::isfinite(m.scale) || !std::isfinite(m.location) ||
      !std::isfinite(m.shape)) {
    throw ValidationError("GEV scale must be positive and all parameters finite");
  }
}

}  // namespace

FrechetColumn frechet_transform(const Eigen::VectorXd& y, const GevMargin& margin) {
  check_margin(margin);
  FrechetColumn out;
  out.z.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double s = (y[i] - margin.location) / margin.scale;
    double z = 0.0;
    if (std::abs(margin.shape) < kGumbelShapeCutoff) {
      z = std::exp(s);
    } else {
      const double base = std::max(0.0, 1.0 + margin.shape * s);
      z = std::pow(base, 1.0 / margin.shape);
    }
    if (!(z > 0.0)) {
      z = kFrechetLowerClamp;
      out.boundary.push_back(static_cast<std::size_t>(i));
    } else if (!std::isfinite(z)) {
      z = kFrechetUpperClamp;
      out.boundary.push_back(static_cast<std::size_t>(i));
    }
    out.z[i] = z;
  }
  if (y.size() > 0 && out.boundary.size() == static_cast<std::size_t>(y.size())) {
    throw DataError("every observation falls outside the GEV support; margin unusable");
  }
  return out;
}

GevMargin fit_gev_lmoments(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (n < 3) throw DataError("need at least three observations for an L-moment fit");
  std::vector<double> x(y.data(), y.data() + n);
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw DataError("constant column cannot be fitted");
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  const double nn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = static_cast<double>(i);
    b0 += x[static_cast<std::size_t>(i)];
    b1 += r / (nn - 1.0) * x[static_cast<std::size_t>(i)];
    b2 += r * (r - 1.0) / ((nn - 1.0) * (nn - 2.0)) * x[static_cast<std::size_t>(i)];
  }
  b0 /= nn;
  b1 /= nn;
  b2 /= nn;
  const double l1 = b0;
  const double l2 = 2.0 * b1 - b0;
  const double l3 = 6.0 * b2 - 6.0 * b1 + b0;
  const double t3 = l3 / l2;

  // Hosking's rational approximation, k = -shape
  const double c = 2.0 / (3.0 + t3) - std::numbers::ln2 / std::log(3.0);
  const double k = 7.8590 * c + 2.9554 * c * c;
  GevMargin m;
  if (std::abs(k) < kGumbelShapeCutoff) {
    m.scale = l2 / std::numbers::ln2;
    m.location = l1 - std::numbers::egamma * m.scale;
    m.shape = 0.0;
    return m;
  }
  const double g = std::tgamma(1.0 + k);
  m.scale = l2 * k / ((1.0 - std::pow(2.0, -k)) * g);
  m.location = l1 - m.scale * (1.0 - g) / k;
  m.shape = -k;
  return m;
}

double gev_cdf(double y, const GevMargin& margin) {
  check_margin(margin);
  const double s = (y - margin.location) / margin.scale;
  if (std::abs(margin.shape) < kGumbelShapeCutoff) return std::exp(-std::exp(-s));
  const double base = 1.0 + margin.shape * s;
  if (base <= 0.0) return margin.shape > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::pow(base, -1.0 / margin.shape));
}

Eigen::VectorXd sample_gev(const GevMargin& margin, std::size_t n, CounterRng& rng) {
  check_margin(margin);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -1.0 / std::log(rng.uniform());  // unit Frechet
    y[static_cast<Eigen::Index>(i)] =
        std::abs(margin.shape) < kGumbelShapeCutoff
            ? margin.location + margin.scale * std::log(z)
            : margin.location + margin.scale * (std::pow(z, margin.shape) - 1.0) / margin.shape;
  }
  return y;
}

}  // namespace dmcle
