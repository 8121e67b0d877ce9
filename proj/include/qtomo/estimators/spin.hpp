#pragma once

// Spin tomography over all directions n, and the spin-1/2 Pauli formula.
//
// The kernel R[A](m, n) = (2s+1)/pi int_0^{2pi} dpsi sin^2(psi/2)
// Tr[A exp(-i psi (S.n - m))] reduces, in the S.n eigenbasis, to
//   (2s+1) [A_mm - (A_{m+1,m+1} + A_{m-1,m-1}) / 2]
// because only eigenvalue gaps 0 and +-1 survive the psi integral.

#include <array>
#include <cmath>
#include <numbers>

#include "qtomo/estimators/config.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/records.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

namespace detail {

// Eigenbasis index of eigenvalue m (ascending order).
inline int spin_level(HalfInteger s, HalfInteger m) {
  if (std::abs(m.twice) > s.twice || (m.twice + s.twice) % 2 != 0)
    throw PreconditionError("m = " + std::to_string(m.value()) + " is not an eigenvalue of S.n for s = " +
                            std::to_string(s.value()));
  return (m.twice + s.twice) / 2;
}

// Diagonal of A in the S.n eigenbasis.
inline Eigen::VectorXcd spin_diagonal(const Operator& a, const Matrix& basis) {
  return (basis.adjoint() * a.matrix() * basis).diagonal();
}

inline cplx spin_kernel_from_diagonal(const Eigen::VectorXcd& diag, int j) {
  const auto d = static_cast<int>(diag.size());
  cplx r = diag(j);
  if (j + 1 < d) r -= 0.5 * diag(j + 1);
  if (j > 0) r -= 0.5 * diag(j - 1);
  return static_cast<double>(d) * r;
}

}  // namespace detail

inline cplx spin_kernel(const Operator& a, HalfInteger m, const Vec3& n, HalfInteger s) {
  if (a.dim() != spin_dim(s)) throw DimensionMismatch("observable dimension must be 2s + 1");
  const int j = detail::spin_level(s, m);
  return detail::spin_kernel_from_diagonal(detail::spin_diagonal(a, spin_eigenbasis(s, n)), j);
}

// The psi integral done by an equispaced trapezoid rule (exact for the
// trigonometric-polynomial integrand once points > 2s + 2).
inline cplx spin_kernel_quadrature(const Operator& a, HalfInteger m, const Vec3& n, HalfInteger s, int points = 2048) {
  if (a.dim() != spin_dim(s)) throw DimensionMismatch("observable dimension must be 2s + 1");
  detail::spin_level(s, m);
  const Operator shifted = spin_component(s, n) - m.value() * Operator::identity(a.dim());
  cplx total{0.0, 0.0};
  const double h = 2.0 * std::numbers::pi / points;
  for (int i = 0; i < points; ++i) {
    const double psi = h * i;
    const double w = std::pow(std::sin(0.5 * psi), 2);
    total += w * (a * hermitian_evolution(shifted, -psi)).trace();
  }
  return static_cast<double>(a.dim()) / std::numbers::pi * h * total;
}

// Operator K with R[A](m, n) = Tr[A K]:
// (2s+1) [P_m - (P_{m+1} + P_{m-1}) / 2] with P_j the S.n eigenprojectors.
inline Matrix spin_operator_kernel(HalfInteger m, const Vec3& n, HalfInteger s) {
  const int j = detail::spin_level(s, m);
  const Matrix basis = spin_eigenbasis(s, n);
  const int d = spin_dim(s);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  c(j) = 1.0;
  if (j + 1 < d) c(j + 1) = -0.5;
  if (j > 0) c(j - 1) = -0.5;
  return static_cast<double>(d) * basis * c.cast<cplx>().asDiagonal() * basis.adjoint();
}

inline EstimationResult spin_estimate(const Operator& a, const RecordSet& records, HalfInteger s) {
  require(!records.empty(), "spin estimate needs at least one record");
  require_family(records, Family::spin);
  if (a.dim() != spin_dim(s)) throw DimensionMismatch("observable dimension must be 2s + 1");
  for (const auto& r : records)
    require(half_integer_from(r.setting[2]) == s, "records were taken for a different spin");
  return estimate_mean(records.size(), [&](std::size_t i) {
    const auto& r = records[i];
    const Matrix basis = spin_eigenbasis(s, direction(r.setting[0], r.setting[1]));
    return detail::spin_kernel_from_diagonal(detail::spin_diagonal(a, basis),
                                             detail::spin_level(s, half_integer_from(r.outcome)));
  });
}

// sum_m int dn/4pi p(m, n) R[A](m, n) with a Gauss-Legendre rule in cos(theta)
// and a uniform phi rule. Exact once order >= 2s + 1 and phi points > 4s.
inline cplx spin_exact_average(const Operator& a, const DensityMatrix& rho, HalfInteger s,
                               const EstimatorConfig& cfg = {}) {
  const int d = spin_dim(s);
  if (a.dim() != d || rho.dim() != d) throw DimensionMismatch("operator and state must have dim 2s + 1");
  const int order = cfg.sphere_order > 0 ? cfg.sphere_order : s.twice + 2;
  require(order >= s.twice + 1, "sphere quadrature order must be at least 2s + 1");
  const int n_phi = 2 * s.twice + 2;
  const auto rule = special::gauss_legendre(order, -1.0, 1.0);
  cplx total{0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double theta = std::acos(rule.nodes[i]);
    for (int k = 0; k < n_phi; ++k) {
      const Matrix basis = spin_eigenbasis(s, direction(theta, 2.0 * std::numbers::pi * k / n_phi));
      const Eigen::VectorXcd ad = detail::spin_diagonal(a, basis);
      const Eigen::VectorXd p = detail::spin_diagonal(rho.op(), basis).real();
      cplx v{0.0, 0.0};
      for (int j = 0; j < d; ++j) v += p(j) * detail::spin_kernel_from_diagonal(ad, j);
      total += 0.5 * rule.weights[i] / n_phi * v;
    }
  }
  return total;
}

// --- spin 1/2 along the three Pauli axes -----------------------------------

struct PauliAxisStats {
  std::array<Accumulator, 3> axis;
};

inline PauliAxisStats pauli_axis_stats(const RecordSet& records) {
  require_family(records, Family::pauli);
  PauliAxisStats st;
  for (const auto& r : records) {
    const double a = r.setting[0];
    require(a == 0.0 || a == 1.0 || a == 2.0, "Pauli axis must be 0, 1 or 2");
    require(r.outcome == 0.5 || r.outcome == -0.5, "Pauli outcome must be +-1/2");
    st.axis[static_cast<std::size_t>(a)].add(r.outcome);
  }
  for (int a = 0; a < 3; ++a)
    require(st.axis[static_cast<std::size_t>(a)].count() > 0,
            std::string("no samples along the ") + "xyz"[a] + " axis");
  return st;
}

// sum_a Tr[A sigma_a] mean(m_a) + Tr[A]/2, with the axis means independent:
// SE^2 = sum_a |Tr[A sigma_a]|^2 var_a / N_a.
inline EstimationResult pauli_estimate(const Operator& a, const PauliAxisStats& st) {
  if (a.dim() != 2) throw DimensionMismatch("Pauli formula needs a 2 x 2 operator");
  EstimationResult r;
  r.mean = 0.5 * a.trace();
  double var = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto& acc = st.axis[static_cast<std::size_t>(k)];
    const cplx c = (a * pauli(static_cast<Axis>(k))).trace();
    r.mean += c * acc.mean();
    var += std::norm(c) * acc.variance() / static_cast<double>(acc.count());
    r.n_samples += acc.count();
  }
  r.std_error = std::sqrt(var);
  return r;
}

inline EstimationResult pauli_estimate(const Operator& a, const RecordSet& records) {
  require(!records.empty(), "Pauli estimate needs at least one record");
  return pauli_estimate(a, pauli_axis_stats(records));
}

}  // namespace qtomo
