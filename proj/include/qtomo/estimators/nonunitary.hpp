#pragma once

// Resolution over the nonunitary family R_n(phi), n integer:
//   R_n(phi) = e_+^n e^{i a^dag a phi}      (n >= 0)
//   R_n(phi) = e_-^{-n} e^{i a^dag a phi}   (n < 0)
// with e_+ = sum |k+1><k| and e_- = sum |k><k+1|. Both cases give
//   R_n(phi) = sum_b e^{i b phi} |b + n><b|,   Tr[rho R_q(psi)] = sum_j e^{i j psi} rho_{j, j+q}.
// In the truncated space the phi integral is exact on an M-point grid once
// M >= 2 dim - 1.

#include <cmath>
#include <numbers>

#include "qtomo/estimators/config.hpp"
#include "qtomo/oscore.hpp"

namespace qtomo {

inline Matrix nonunitary_operator(int n, double phi, int dim) {
  Matrix r = Matrix::Zero(dim, dim);
  for (int b = 0; b < dim; ++b)
    if (b + n >= 0 && b + n < dim) r(b + n, b) = std::polar(1.0, b * phi);
  return r;
}

// Phase-representation matrix element <e^{i x}| rho |e^{i y}>.
inline cplx phase_matrix_element(const DensityMatrix& rho, double x, double y) {
  cplx v{0.0, 0.0};
  for (int j = 0; j < rho.dim(); ++j)
    for (int k = 0; k < rho.dim(); ++k) v += std::polar(1.0, -j * x + k * y) * rho.matrix()(j, k);
  return v;
}

struct PhaseTraceReport {
  cplx direct;
  cplx phase_route;
  double discrepancy;
};

// Tr[rho R_q(psi)] by the truncated trace and by
//   int dphi/2pi e^{-i q phi} <phi - psi| rho |phi>
// on an M-point grid (this form holds for either sign of q).
inline PhaseTraceReport nonunitary_phase_trace_report(const DensityMatrix& rho, int q, double psi,
                                                      const EstimatorConfig& cfg) {
  const int dim = rho.dim();
  require(std::abs(q) < dim, "|q| must be below dim");
  const int m = cfg.phi_grid > 0 ? cfg.phi_grid : 4 * dim;
  require(m >= 4 * dim, "phase grid must have at least 4 dim points");
  const cplx direct = (rho.matrix() * nonunitary_operator(q, psi, dim)).trace();
  cplx phase{0.0, 0.0};
  for (int i = 0; i < m; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / m;
    phase += std::polar(1.0, -q * phi) * phase_matrix_element(rho, phi - psi, phi);
  }
  phase /= static_cast<double>(m);
  return {direct, phase, std::abs(direct - phase)};
}

inline constexpr double kPhaseTraceTol = 1e-8;

inline cplx nonunitary_phase_trace(const DensityMatrix& rho, int q, double psi, const EstimatorConfig& cfg = {}) {
  const auto r = nonunitary_phase_trace_report(rho, q, psi, cfg.with_dim(rho.dim()));
  require(r.discrepancy <= kPhaseTraceTol, "phase-representation route disagrees with the direct trace by " +
                                               std::to_string(r.discrepancy));
  return r.direct;
}

// sum_{|n| <= max_shift} (1/M) sum_j Tr[A R_n^dag(phi_j)] Tr[rho R_n(phi_j)].
// max_shift < 0 means dim - 1.
inline cplx nonunitary_reconstruct(const Operator& a, const DensityMatrix& rho, const EstimatorConfig& cfg = {},
                                   int max_shift = -1) {
  const int dim = rho.dim();
  if (a.dim() != dim) throw DimensionMismatch("operator and state dimensions differ");
  if (max_shift < 0) max_shift = dim - 1;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      if (std::abs(r - c) > max_shift && a.matrix()(r, c) != cplx{0.0, 0.0})
        throw PreconditionError("observable has entries beyond the largest shift " + std::to_string(max_shift));
  const int m = cfg.phi_grid > 0 ? cfg.phi_grid : 4 * dim;
  require(m >= 2 * dim - 1, "phase grid must have at least 2 dim - 1 points");
  cplx total{0.0, 0.0};
  for (int n = -max_shift; n <= max_shift; ++n) {
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / m;
      const Matrix r = nonunitary_operator(n, phi, dim);
      total += (a.matrix() * r.adjoint()).trace() * (rho.matrix() * r).trace();
    }
  }
  return total / static_cast<double>(m);
}

// (1/M) sum_j Tr[R_k^dag(phi_i) R_n(phi_j)] e^{-i p (phi_j - phi_i)}: the
// discrete form of the delta in phi, resolved on Fourier mode p. For
// grid >= dim it equals delta_nk when level p and p + n both lie in the
// truncation, and 0 otherwise.
inline cplx nonunitary_orthogonality(int k, int n, int p, int i, int grid, int dim) {
  const double phi_i = 2.0 * std::numbers::pi * i / grid;
  const Matrix rk = nonunitary_operator(k, phi_i, dim).adjoint();
  cplx total{0.0, 0.0};
  for (int j = 0; j < grid; ++j) {
    const double phi_j = 2.0 * std::numbers::pi * j / grid;
    total += (rk * nonunitary_operator(n, phi_j, dim)).trace() * std::polar(1.0, -p * (phi_j - phi_i));
  }
  return total / static_cast<double>(grid);
}

}  // namespace qtomo
