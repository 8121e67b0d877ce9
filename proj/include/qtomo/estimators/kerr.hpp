#pragma once

// Kerr-phase tomography. The POVM B(psi, phi) = V^dag(psi) mu(phi) V(psi),
// with V(psi) = exp[i (a^dag a)^2 psi] and mu the Susskind-Glogower phase
// POVM, has Fock elements
//   <j|B|k> = exp[-i psi (j^2 - k^2) + i phi (j - k)]
// and is self-dual for every off-diagonal element: averaging Tr[A B] over
// p(phi, psi) = Tr[rho B] (measure dphi dpsi / (2 pi)^2) returns Tr[A rho]
// whenever A has zero diagonal. Diagonal elements are not separable: the
// average of B_jj against any state is Tr[rho] independently of j.
//
// Records: s1 = psi, o1 = phi.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/records.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

// <n+d| B(psi, phi) |n>, the kernel of the matrix element rho_{n+d, n}.
inline cplx kerr_kernel(int n, int d, double phi, double psi) {
  require(d != 0, "diagonal Kerr kernel needs the regularized form");
  require(n >= 0 && n + d >= 0, "Fock index must be non-negative");
  const double k = static_cast<double>(d) * d + 2.0 * n * d;
  return std::polar(1.0, -psi * k + phi * d);
}

// exp[i 2 psi n eps + i phi eps], taken literally.
inline cplx kerr_kernel_regularized(int n, double eps, double phi, double psi) {
  require(eps > 0.0, "regularization eps must be positive");
  require(n >= 0, "Fock index must be non-negative");
  return std::polar(1.0, 2.0 * psi * n * eps + phi * eps);
}

// <j|B(psi, phi)|k> on the first dim levels.
inline Matrix kerr_povm_matrix(double psi, double phi, int dim) {
  Matrix b(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k)
      b(j, k) = std::polar(1.0, -psi * (static_cast<double>(j) * j - static_cast<double>(k) * k) + phi * (j - k));
  return b;
}

namespace detail {

// Splits A into c I + off-diagonal part; the kernel route handles only that.
inline cplx kerr_identity_part(const Operator& a) {
  const auto d = a.matrix().diagonal();
  const cplx c = d.mean();
  const double scale = std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
  require((d.array() - c).abs().maxCoeff() <= 1e-12 * scale,
          "Kerr tomography cannot estimate diagonal elements: the observable's diagonal must be a multiple of the "
          "identity");
  return c;
}

inline cplx kerr_offdiagonal_value(const Matrix& a, double psi, double phi) {
  const int dim = static_cast<int>(a.rows());
  cplx v{0.0, 0.0};
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k)
      if (j != k)
        v += a(k, j) * std::polar(1.0, -psi * (static_cast<double>(j) * j - static_cast<double>(k) * k) + phi * (j - k));
  return v;
}

}  // namespace detail

// Mean of Tr[A_off B] + c over the records, where A = c I + A_off.
inline EstimationResult kerr_estimate(const Operator& a, const RecordSet& records, const EstimatorConfig& cfg) {
  require(!records.empty(), "Kerr estimate needs at least one record");
  require_family(records, Family::kerr);
  if (a.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from cfg.dim");
  const cplx c = detail::kerr_identity_part(a);
  return estimate_mean(records.size(), [&](std::size_t i) {
    return c + detail::kerr_offdiagonal_value(a.matrix(), records[i].setting[0], records[i].outcome);
  });
}

// Estimate of rho_{n+d, n}, d != 0.
inline EstimationResult kerr_estimate(int n, int d, const RecordSet& records, const EstimatorConfig& cfg) {
  require(d != 0, "Kerr tomography cannot estimate diagonal elements");
  require(n >= 0 && n + d >= 0 && n < cfg.dim && n + d < cfg.dim, "matrix element outside the truncation");
  require(!records.empty(), "Kerr estimate needs at least one record");
  require_family(records, Family::kerr);
  return estimate_mean(records.size(), [&](std::size_t i) {
    return kerr_kernel(n, d, records[i].outcome, records[i].setting[0]);
  });
}

// (1/PQ) sum over phi_i = 2 pi i / P, psi_j = 2 pi j / Q of
// Tr[A_off B] Tr[rho B] + c Tr[rho]. Exact once P >= 2 dim - 1 and
// Q >= 2 (dim - 1)^2 + 1.
inline cplx kerr_exact_average(const Operator& a, const DensityMatrix& rho, const EstimatorConfig& cfg) {
  if (a.dim() != rho.dim()) throw DimensionMismatch("operator and state dimensions differ");
  const EstimatorConfig c = cfg.with_dim(a.dim());
  c.validate();
  const cplx shift = detail::kerr_identity_part(a);
  const int p = c.kerr_phi_points(), q = c.kerr_psi_points();
  const Matrix rt = rho.matrix().transpose();
  cplx total{0.0, 0.0};
  for (int j = 0; j < q; ++j) {
    const double psi = 2.0 * std::numbers::pi * j / q;
    for (int i = 0; i < p; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / p;
      const Matrix b = kerr_povm_matrix(psi, phi, a.dim());
      total += detail::kerr_offdiagonal_value(a.matrix(), psi, phi) * rt.cwiseProduct(b).sum();
    }
  }
  return total / static_cast<double>(p * q) + shift * rho.op().trace();
}

// (1/PQ) sum_{phi, psi} <m|B|l> <q|B|p> on the product grid.
inline cplx kerr_biorthogonality_sum(int m, int l, int qi, int p, int phi_points, int psi_points) {
  cplx total{0.0, 0.0};
  const double dpsi = -(static_cast<double>(m) * m - static_cast<double>(l) * l + static_cast<double>(qi) * qi -
                        static_cast<double>(p) * p);
  const double dphi = static_cast<double>(m - l + qi - p);
  for (int j = 0; j < psi_points; ++j) {
    const double psi = 2.0 * std::numbers::pi * j / psi_points;
    for (int i = 0; i < phi_points; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / phi_points;
      total += std::polar(1.0, dpsi * psi + dphi * phi);
    }
  }
  return total / static_cast<double>(phi_points * psi_points);
}

// --- diagonal elements: the regularized kernel, averaged exactly ------------

struct KerrEpsPoint {
  double eps;
  cplx value;
};

struct KerrEpsSweep {
  int n;
  double exact_rho_nn;
  std::vector<KerrEpsPoint> points;
};

// int_0^{2 pi} dx/(2 pi) e^{i a x}
inline cplx kerr_unit_circle_average(double a) {
  if (std::abs(a) < 1e-14) return {1.0, 0.0};
  const cplx ia{0.0, 2.0 * std::numbers::pi * a};
  return (std::exp(ia) - 1.0) / ia;
}

// Average of the regularized kernel over the exact p(phi, psi):
//   sum_{jk} rho_jk I(k - j + eps) I(j^2 - k^2 + 2 n eps).
inline cplx kerr_regularized_average(int n, double eps, const DensityMatrix& rho) {
  require(eps > 0.0, "regularization eps must be positive");
  require(n >= 0 && n < rho.dim(), "Fock index outside the truncation");
  cplx total{0.0, 0.0};
  for (int j = 0; j < rho.dim(); ++j)
    for (int k = 0; k < rho.dim(); ++k)
      total += rho.matrix()(j, k) * kerr_unit_circle_average(k - j + eps) *
               kerr_unit_circle_average(static_cast<double>(j) * j - static_cast<double>(k) * k + 2.0 * n * eps);
  return total;
}

// The same average by brute-force midpoint quadrature in (phi, psi).
inline cplx kerr_regularized_average_grid(int n, double eps, const DensityMatrix& rho, int phi_points, int psi_points) {
  require(eps > 0.0, "regularization eps must be positive");
  const Matrix rt = rho.matrix().transpose();
  cplx total{0.0, 0.0};
  for (int j = 0; j < psi_points; ++j) {
    const double psi = 2.0 * std::numbers::pi * (j + 0.5) / psi_points;
    for (int i = 0; i < phi_points; ++i) {
      const double phi = 2.0 * std::numbers::pi * (i + 0.5) / phi_points;
      total += kerr_kernel_regularized(n, eps, phi, psi) * rt.cwiseProduct(kerr_povm_matrix(psi, phi, rho.dim())).sum();
    }
  }
  return total / static_cast<double>(phi_points * psi_points);
}

inline KerrEpsSweep kerr_eps_sweep(int n, const DensityMatrix& rho, const std::vector<double>& eps_values) {
  KerrEpsSweep sweep{n, rho.matrix()(n, n).real(), {}};
  for (double eps : eps_values) sweep.points.push_back({eps, kerr_regularized_average(n, eps, rho)});
  return sweep;
}

}  // namespace qtomo
