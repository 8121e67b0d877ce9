#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "qtomo/oscore.hpp"

namespace qtomo::testing {

inline Operator random_operator(int dim, RngStream& rng) {
  Matrix m(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = rng.complex_normal();
  return Operator(m);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const Operator& a, const Operator& b) { return max_abs_diff(a.matrix(), b.matrix()); }

// Upper-tail p-value of Pearson's chi-square statistic.
inline double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& expected,
                                 int fitted_params = 0) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  const double dof = static_cast<double>(observed.size()) - 1.0 - fitted_params;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// One-sample Kolmogorov-Smirnov test; asymptotic Kolmogorov distribution
// with the Stephens small-sample correction.
inline double ks_p_value(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1.0) / n - f, f - i / n});
  }
  const double en = std::sqrt(n);
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = 2.0 * ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace qtomo::testing
