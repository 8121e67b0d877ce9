#pragma once

// Generalized Glauber resolution
//   A = int d^2alpha/pi Tr[A F1 D(alpha) F2] F2^{-1} D^dag(alpha) F1^{-1}
// checked on a square alpha lattice. F1 and F2 are given on a padded space
// of dimension P >= dim; displacements enter through their exact matrix
// elements, so the only error left is the lattice sum itself.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/estimators/parity.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/quorums.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

struct GlauberReport {
  double cond_f1 = 0.0;
  double cond_f2 = 0.0;
  double max_error = 0.0;  // worst max-entry error over the test operators
  double tolerance = 0.0;
  bool pass = false;
};

inline constexpr double kGlauberSingularCond = 1e12;

namespace detail {

inline double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Random dim x dim operator with entries e^{-rate (j^2 + k^2)} times a
// standard complex normal, so that its Glauber coefficients decay inside the
// lattice. Even for A = |0><0| the lattice cut at |alpha| = 4 leaves ~6e-5
// on the dim-6 block, because <5|D^dag|5> is still O(0.2) at the edge.
inline Operator suppressed_random_operator(int dim, std::uint64_t seed, double rate = 2.0) {
  RngStream rng(seed, 0);
  Matrix a(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) a(r, c) = std::exp(-rate * (r * r + c * c)) * rng.complex_normal();
  return Operator(a);
}

// Lattice value of the right-hand side for one operator A (dim x dim,
// embedded in the padded space), returned on the dim block.
inline Matrix generalized_glauber_apply(const Operator& a, const Operator& f1, const Operator& f2,
                                        const EstimatorConfig& cfg) {
  const int p = f1.dim(), dim = a.dim();
  if (f2.dim() != p) throw DimensionMismatch("F1 and F2 must have the same dimension");
  require(dim <= p, "F1 and F2 must act on at least the observable's dimension");
  Matrix ap = Matrix::Zero(p, p);
  ap.topLeftCorner(dim, dim) = a.matrix();
  const Eigen::PartialPivLU<Matrix> lu1(f1.matrix()), lu2(f2.matrix());
  const Matrix f1_inv = lu1.inverse(), f2_inv = lu2.inverse();
  // Tr[A F1 D F2] = Tr[(F2 A F1) D]
  const Matrix xt = (f2.matrix() * ap * f1.matrix()).transpose();
  const int n = cfg.glauber_grid;
  const double h = 2.0 * cfg.glauber_extent / (n - 1);
  Matrix sum = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx alpha{-cfg.glauber_extent + h * i, -cfg.glauber_extent + h * j};
      const Matrix d = displacement_block(alpha, p).matrix();
      sum += xt.cwiseProduct(d).sum() * d.adjoint();
    }
  sum *= h * h / std::numbers::pi;
  return (f2_inv * sum * f1_inv).topLeftCorner(dim, dim);
}

// Checks the resolution for n_ops random suppressed operators on cfg.dim.
inline GlauberReport generalized_glauber_check(const Operator& f1, const Operator& f2, const EstimatorConfig& cfg,
                                               double tolerance = 1e-4, int n_ops = 10, std::uint64_t seed = 1) {
  cfg.validate();
  GlauberReport r;
  r.tolerance = tolerance;
  r.cond_f1 = detail::condition_number(f1.matrix());
  r.cond_f2 = detail::condition_number(f2.matrix());
  if (!(r.cond_f1 < kGlauberSingularCond) || !(r.cond_f2 < kGlauberSingularCond))
    throw PreconditionError("F1 or F2 is singular (condition number above 1e12)");
  for (int k = 0; k < n_ops; ++k) {
    const Operator a = suppressed_random_operator(cfg.dim, seed + static_cast<std::uint64_t>(k));
    const Matrix back = generalized_glauber_apply(a, f1, f2, cfg);
    r.max_error = std::max(r.max_error, (back - a.matrix()).cwiseAbs().maxCoeff());
  }
  r.pass = r.max_error <= tolerance;
  return r;
}

// The displaced-parity resolution A = int d^2beta/pi Tr[A X(beta)] X(beta)/4
// on the lattice beta = alpha / 2, where it coincides term by term with the
// generalized Glauber sum for F1 = I, F2 = parity.
inline Matrix parity_lattice_apply(const Operator& a, int padded_dim, const EstimatorConfig& cfg) {
  const int dim = a.dim();
  require(dim <= padded_dim, "padded dimension must be at least the observable's dimension");
  Matrix ap = Matrix::Zero(padded_dim, padded_dim);
  ap.topLeftCorner(dim, dim) = a.matrix();
  const Matrix at = ap.transpose();
  const int n = cfg.glauber_grid;
  const double h = 2.0 * cfg.glauber_extent / (n - 1);
  Matrix sum = Matrix::Zero(padded_dim, padded_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx beta = 0.5 * cplx{-cfg.glauber_extent + h * i, -cfg.glauber_extent + h * j};
      const Matrix x = displaced_parity_matrix(beta, padded_dim);
      sum += 0.25 * at.cwiseProduct(x).sum() * x;
    }
  sum *= 0.25 * h * h / std::numbers::pi;
  return sum.topLeftCorner(dim, dim);
}

}  // namespace qtomo
