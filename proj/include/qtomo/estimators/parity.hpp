#pragma once

// Displaced-parity tomography. With X(beta) = 4 D^dag(beta) P D(beta) and
// P = (-1)^{a^dag a}, every operator satisfies
//   <A> = int d^2beta/pi Tr[A X(beta)] Tr[D(beta) rho D^dag(beta) P],
// and the Fock elements of X have the closed form of displaced_parity_kernel.
// Sampling draws beta uniformly on a disk of radius R, so each record
// (beta, outcome = +-1) contributes R^2 outcome Tr[A X(beta)].

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/records.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

// <n+d| 4 D^dag(alpha) P D(alpha) |n>
//   = 4 (-1)^{n+d} e^{-2|alpha|^2} sqrt(n!/(n+d)!) (2 alpha)^d L_n^d(4|alpha|^2)
inline cplx displaced_parity_kernel(int n, int d, cplx alpha) {
  require(n >= 0 && d >= 0, "displaced parity kernel needs n >= 0 and d >= 0");
  const double x = 4.0 * std::norm(alpha);
  const double mag = std::exp(0.5 * (special::log_factorial(n) - special::log_factorial(n + d)) - 0.5 * x);
  const double sign = ((n + d) % 2 == 0) ? 4.0 : -4.0;
  return sign * mag * special::int_power(2.0 * alpha, d) * special::laguerre(n, d, x);
}

// X(beta) on the first dim Fock levels. Laguerre values for each
// off-diagonal d come from one upward recurrence in n.
inline Matrix displaced_parity_matrix(cplx beta, int dim) {
  Matrix x(dim, dim);
  const double t = 4.0 * std::norm(beta);
  const cplx two_beta = 2.0 * beta;
  cplx power{1.0, 0.0};  // (2 beta)^d
  for (int d = 0; d < dim; ++d) {
    double l_prev = 0.0, l_cur = 1.0;  // L_{n-1}^d, L_n^d
    double log_ratio = -0.5 * special::log_factorial(d);  // log sqrt(n!/(n+d)!) at n = 0
    for (int n = 0; n + d < dim; ++n) {
      if (n == 1) {
        l_prev = 1.0;
        l_cur = 1.0 + d - t;
      } else if (n > 1) {
        const double next = ((2.0 * (n - 1) + 1.0 + d - t) * l_cur - (n - 1 + d) * l_prev) / n;
        l_prev = l_cur;
        l_cur = next;
      }
      if (n > 0) log_ratio += 0.5 * (std::log(static_cast<double>(n)) - std::log(static_cast<double>(n + d)));
      const double sign = ((n + d) % 2 == 0) ? 4.0 : -4.0;
      const cplx v = sign * std::exp(log_ratio - 0.5 * t) * power * l_cur;
      x(n + d, n) = v;
      x(n, n + d) = std::conj(v);
    }
    power *= two_beta;
  }
  return x;
}

// Proposal radius 2 + sqrt(n_max).
inline double parity_proposal_radius(int dim) { return 2.0 + std::sqrt(static_cast<double>(dim - 1)); }

// max |Tr[A X(beta)]| on the circle |beta| = radius.
inline double parity_boundary_kernel(const Operator& a, double radius, int angles = 64) {
  double worst = 0.0;
  for (int j = 0; j < angles; ++j) {
    const cplx beta = std::polar(radius, 2.0 * std::numbers::pi * j / angles);
    const Matrix x = displaced_parity_matrix(beta, a.dim());
    worst = std::max(worst, std::abs((a.matrix().transpose().cwiseProduct(x)).sum()));
  }
  return worst;
}

inline constexpr double kParityBoundaryTol = 1e-3;

inline EstimationResult parity_estimate(const Operator& a, const RecordSet& records, const EstimatorConfig& cfg) {
  require(!records.empty(), "parity estimate needs at least one record");
  require_family(records, Family::parity);
  if (a.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from cfg.dim");
  double min_radius = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    require(r.setting[2] > 0.0, "parity record carries a non-positive proposal radius");
    require(r.outcome == 1.0 || r.outcome == -1.0, "parity outcome must be +1 or -1");
    min_radius = std::min(min_radius, r.setting[2]);
  }
  const Matrix at = a.matrix().transpose();
  auto result = estimate_mean(records.size(), [&](std::size_t i) {
    const auto& r = records[i];
    const Matrix x = displaced_parity_matrix({r.setting[0], r.setting[1]}, a.dim());
    return r.setting[2] * r.setting[2] * r.outcome * at.cwiseProduct(x).sum();
  });
  const double edge = parity_boundary_kernel(a, min_radius);
  if (edge > kParityBoundaryTol)
    result.warnings.push_back("proposal radius " + std::to_string(min_radius) +
                              " may bias the estimate: kernel magnitude at the boundary is " + std::to_string(edge));
  return result;
}

// Estimate of the matrix element rho_{n+d, n} (A = |n><n+d|).
inline EstimationResult parity_estimate(int n, int d, const RecordSet& records, const EstimatorConfig& cfg) {
  require(n >= 0 && d >= 0 && n + d < cfg.dim, "matrix element outside the truncation");
  return parity_estimate(build_operator({kinds::MatrixUnit{n, n + d}, cfg.dim}), records, cfg);
}

// int d^2beta/pi Tr[A X] Tr[rho X]/4 over |beta| <= radius: Gauss-Legendre
// in r, uniform in angle.
inline cplx parity_exact_average(const Operator& a, const DensityMatrix& rho, const EstimatorConfig& cfg,
                                 double radius) {
  if (a.dim() != rho.dim()) throw DimensionMismatch("operator and state dimensions differ");
  require(radius > 0.0, "radius must be positive");
  cfg.validate();
  const auto rule = special::gauss_legendre(cfg.parity_radial, 0.0, radius);
  const int m = cfg.parity_angular_points();
  const Matrix at = a.matrix().transpose();
  const Matrix rt = rho.matrix().transpose();
  cplx total{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double r = rule.nodes[i];
    for (int j = 0; j < m; ++j) {
      const Matrix x = displaced_parity_matrix(std::polar(r, 2.0 * std::numbers::pi * j / m), a.dim());
      total += rule.weights[i] * r * at.cwiseProduct(x).sum() * (0.25 * rt.cwiseProduct(x).sum());
    }
  }
  return total * (2.0 / m);  // (2 pi / m) / pi
}

}  // namespace qtomo
