#pragma once

// Special functions shared by the oscillator estimators: generalized Laguerre
// polynomials, exact Fock matrix elements of the displacement operator,
// oscillator wavefunctions and Gauss-Legendre rules.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

using cplx = std::complex<double>;

namespace special {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// L_n^{(alpha)}(x) by the three-term upward recurrence.
inline double laguerre(int n, int alpha, double x) {
  if (n < 0) return 0.0;
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

inline cplx int_power(cplx z, int p) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < p; ++i) r *= z;
  return r;
}

// <m| exp(alpha a^dag - conj(alpha) a) |n> of the untruncated oscillator.
inline cplx displacement_element(int m, int n, cplx alpha) {
  const double x = std::norm(alpha);
  if (m >= n) {
    const int d = m - n;
    const double pref = std::exp(0.5 * (log_factorial(n) - log_factorial(m)) - 0.5 * x);
    return pref * int_power(alpha, d) * laguerre(n, d, x);
  }
  const int d = n - m;
  const double pref = std::exp(0.5 * (log_factorial(m) - log_factorial(n)) - 0.5 * x);
  return pref * int_power(-std::conj(alpha), d) * laguerre(m, d, x);
}

// psi_n(q) for n < count in the quadrature convention q = (a + a^dag)/2, so
// |psi_0|^2 is a Gaussian of variance 1/4. Upward recurrence on the
// Hermite functions in x = sqrt(2) q, carried with a running log-scale so
// that no intermediate overflows or underflows for large n.
inline std::vector<double> oscillator_wavefunctions(int count, double q) {
  std::vector<double> out(static_cast<std::size_t>(count), 0.0);
  if (count <= 0) return out;
  const double x = std::numbers::sqrt2 * q;
  // h_n = exp(log_scale) * g_n
  double log_scale = -0.5 * x * x - 0.25 * std::log(std::numbers::pi) + 0.25 * std::log(2.0);
  std::vector<double> g(out.size());
  std::vector<double> scale_at(out.size());
  double g_prev = 0.0;
  double g_cur = 1.0;
  g[0] = g_cur;
  scale_at[0] = log_scale;
  for (int n = 0; n + 1 < count; ++n) {
    double g_next = std::sqrt(2.0 / (n + 1.0)) * x * g_cur - std::sqrt(n / (n + 1.0)) * g_prev;
    g_prev = g_cur;
    g_cur = g_next;
    const double mag = std::abs(g_cur);
    if (mag > 1e100) {
      g_prev /= mag;
      g_cur /= mag;
      log_scale += std::log(mag);
    }
    g[n + 1] = g_cur;
    scale_at[n + 1] = log_scale;
  }
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = g[n] * std::exp(scale_at[n]);
  return out;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  require(n >= 1, "Gauss-Legendre order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = mid - half * z;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * z;
    rule.weights[static_cast<std::size_t>(i)] = half * w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
  }
  return rule;
}

// Composite Gauss-Legendre: `panels` equal panels of `order` points each.
inline QuadratureRule composite_gauss_legendre(int panels, int order, double a, double b) {
  QuadratureRule out;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    auto panel = gauss_legendre(order, a + p * width, a + (p + 1) * width);
    out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return out;
}

}  // namespace special
}  // namespace qtomo
