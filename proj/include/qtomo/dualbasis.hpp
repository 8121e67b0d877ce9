#pragma once

// Dual-set construction for finite spanning sets: Gram-Schmidt for bases,
// frame-operator inversion for any irreducible (possibly overcomplete) set,
// and the finite spin-coherent projector quorum.

#include <Eigen/LU>
#include <numbers>
#include <string>
#include <vector>

#include "qtomo/frames.hpp"

namespace qtomo {

struct GramSchmidtTrace {
  std::vector<double> normalizers;     // N_k
  std::vector<Operator> orthonormal;   // y_k
};

struct GramSchmidtResult {
  DualSet dual;
  GramSchmidtTrace trace;
};

inline constexpr double kIndependenceTol = 1e-10;
inline constexpr double kReorthogonalizeTol = 1e-8;

// Orthonormalizes the vectorized C_k in order, writing C = Y R with R upper
// triangular (R_kk = N_k). The dual follows from back-substitution,
// B = Y R^{-dag}, divided by the weights so that sum_x w_x |C_x><B_x| = 1.
inline GramSchmidtResult gram_schmidt_dual(const SpanningSet& s) {
  const int d2 = s.dim() * s.dim();
  const auto n = static_cast<Eigen::Index>(s.size());
  if (n != d2)
    throw PreconditionError("Gram-Schmidt needs exactly d^2 = " + std::to_string(d2) + " elements, got " +
                            std::to_string(n));
  const Matrix c = liouville_columns(s);
  Matrix y = Matrix::Zero(d2, n);
  Matrix r = Matrix::Zero(n, n);
  GramSchmidtTrace trace;
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector v = c.col(k);
    const double input_norm = v.norm();
    for (int pass = 0; pass < 2 && k > 0; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const cplx overlap = y.col(j).dot(v);  // <y_j|v>
        r(j, k) += overlap;
        v -= overlap * y.col(j);
      }
      // Second pass only when the first left a sizeable component behind.
      double residual = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) residual = std::max(residual, std::abs(y.col(j).dot(v)));
      if (residual <= kReorthogonalizeTol * std::max(v.norm(), 1e-300)) break;
    }
    const double nk = v.norm();
    if (!(nk >= kIndependenceTol * input_norm) || input_norm == 0.0)
      throw PreconditionError("element " + std::to_string(k) +
                              " is linearly dependent on the preceding elements (N_k = " + std::to_string(nk) +
                              ")");
    r(k, k) = nk;
    y.col(k) = v / nk;
    trace.normalizers.push_back(nk);
    trace.orthonormal.push_back(unvec(y.col(k), s.dim()));
  }
  // B^dag = R^{-1} Y^dag
  const Matrix b_adj = r.triangularView<Eigen::Upper>().solve(Matrix(y.adjoint()));
  Matrix b = b_adj.adjoint();
  std::vector<Operator> duals;
  duals.reserve(s.size());
  for (Eigen::Index k = 0; k < n; ++k) duals.push_back(unvec(b.col(k) / s[k].weight, s.dim()));
  return {DualSet(s, std::move(duals)), std::move(trace)};
}

// Canonical dual B_x = F^{-1} C_x with F = sum_x w_x |C_x><C_x|.
inline DualSet pseudoinverse_dual(const SpanningSet& s) {
  const auto irr = irreducibility_rank(s);
  if (!irr.irreducible)
    throw PreconditionError("spanning set is reducible: rank " + std::to_string(irr.rank) + " < d^2 = " +
                            std::to_string(s.dim() * s.dim()));
  const Matrix c = liouville_columns(s);
  const Matrix frame = c * weights_of(s).cast<cplx>().asDiagonal() * c.adjoint();
  const Matrix b = frame.partialPivLu().solve(c);
  std::vector<Operator> duals;
  duals.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) duals.push_back(unvec(b.col(static_cast<Eigen::Index>(k)), s.dim()));
  return DualSet(s, std::move(duals));
}

// Projectors onto the m = s eigenstate of S.n_j, unit weights.
inline SpanningSet weigert_spin_quorum(HalfInteger s, const std::vector<Vec3>& directions) {
  const int d = spin_dim(s);
  if (static_cast<int>(directions.size()) != d * d)
    throw PreconditionError("Weigert quorum needs (2s+1)^2 = " + std::to_string(d * d) + " directions");
  std::vector<FrameElement> elements;
  elements.reserve(directions.size());
  for (const auto& n : directions) {
    const Vector top = spin_eigenbasis(s, n).col(d - 1);
    elements.push_back({{"weigert", {n[0], n[1], n[2]}}, 1.0, Operator(top * top.adjoint())});
  }
  return SpanningSet(d, std::move(elements));
}

// Fibonacci spiral on the unit sphere: nearly uniform, no two points on a
// common axis for count >= 2.
inline std::vector<Vec3> spiral_directions(int count) {
  require(count >= 1, "direction count must be positive");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    out.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return out;
}

// Directions uniform on the sphere from a seeded stream.
inline std::vector<Vec3> random_directions(int count, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<Vec3> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return out;
}

}  // namespace qtomo
