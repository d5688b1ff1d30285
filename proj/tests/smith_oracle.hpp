#pragma once

// Numerical references for the Smith pair distribution: a mixed difference of
// an independent quad-precision cdf, and a quadrature of the density on the
// unit Frechet scale.

#include <cmath>
#include <vector>

#include <quadmath.h>

#include <Eigen/Dense>

#include "dmcle/models/smith.hpp"

namespace smith_oracle {

using dmcle::smith_pair_density;

// Pair cdf exp(-V) in quad precision, V = Phi(g1)/zj + Phi(g2)/zk with
// g1 = a/2 + log(zk/zj)/a, g2 = a - g1 and a^2 = h' Sigma^-1 h.
inline __float128 quad_cdf(__float128 zj, __float128 zk, const Eigen::Vector2d& h, const Eigen::Matrix2d& s) {
  const __float128 s11 = s(0, 0), s12 = s(0, 1), s22 = s(1, 1), h1 = h[0], h2 = h[1];
  const __float128 a = sqrtq((s22 * h1 * h1 - 2 * s12 * h1 * h2 + s11 * h2 * h2) / (s11 * s22 - s12 * s12));
  const __float128 g1 = a / 2 + logq(zk / zj) / a;
  const __float128 g2 = a - g1;
  auto phi = [](__float128 x) { return erfcq(-x / sqrtq(2.0Q)) / 2; };
  return expq(-(phi(g1) / zj + phi(g2) / zk));
}

// Mixed central difference of the quad-precision cdf with one Richardson
// step; rounding stays far below any density value worth comparing.
inline double mixed_partial(double zj, double zk, const Eigen::Vector2d& h, const Eigen::Matrix2d& s) {
  auto d = [&](__float128 e) {
    const __float128 a = zj, b = zk, ej = e * a, ek = e * b;
    return (quad_cdf(a + ej, b + ek, h, s) - quad_cdf(a + ej, b - ek, h, s) - quad_cdf(a - ej, b + ek, h, s) +
            quad_cdf(a - ej, b - ek, h, s)) /
           (4 * ej * ek);
  };
  return static_cast<double>((4 * d(5e-4Q) - d(1e-3Q)) / 3);
}

// Gauss-Legendre nodes on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Integral of the density over (0, inf)^2 after z = -1/log(u).
inline double integrate_density(const Eigen::Vector2d& h, const Eigen::Matrix2d& s) {
  std::vector<double> edges{0.0};
  for (int k = 10; k >= 1; --k) edges.push_back(std::pow(10.0, -k));
  for (int i = 2; i <= 8; ++i) edges.push_back(0.1 * i);
  for (int k = 1; k <= 10; ++k) edges.push_back(1.0 - std::pow(10.0, -k));
  edges.push_back(1.0);
  std::vector<double> gx, gw;
  gauss_legendre(12, gx, gw);
  std::vector<double> nodes, weights;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double u = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
      const double lu = std::log(u);
      nodes.push_back(-1.0 / lu);
      weights.push_back(0.5 * (b - a) * gw[i] / (u * lu * lu));
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      total += weights[i] * weights[k] * smith_pair_density(nodes[i], nodes[k], h, s);
    }
  }
  return total;
}

}  // namespace smith_oracle
