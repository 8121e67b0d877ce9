#pragma once

// Built-in finite quorums, described declaratively by QuorumDescriptor.

#include <numbers>
#include <string>
#include <vector>

#include "qtomo/dualbasis.hpp"

namespace qtomo {

// {sigma_x, sigma_y, sigma_z, I} scaled by 1/sqrt(2): orthonormal, self-dual
// with unit weights.
inline SpanningSet pauli_quorum() {
  const double k = 1.0 / std::numbers::sqrt2;
  std::vector<FrameElement> e;
  for (int a = 0; a < 3; ++a)
    e.push_back({{"pauli", {static_cast<double>(a)}}, 1.0, k * pauli(static_cast<Axis>(a))});
  e.push_back({{"pauli", {3.0}}, 1.0, k * Operator::identity(2)});
  return SpanningSet(2, std::move(e));
}

// Eigenprojectors of one Hermitian observable. Spans only the commutant, so
// it is reducible for dim >= 2.
inline SpanningSet observable_projectors(const Operator& x) {
  require(x.is_hermitian(1e-12), "observable must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
  std::vector<FrameElement> e;
  for (int i = 0; i < x.dim(); ++i) {
    const Vector v = es.eigenvectors().col(i);
    e.push_back({{"projectors", {es.eigenvalues()(i)}}, 1.0, Operator(v * v.adjoint())});
  }
  return SpanningSet(x.dim(), std::move(e));
}

// d x d block of the exact (untruncated) displacement operator.
inline Operator displacement_block(cplx alpha, int dim) {
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = special::displacement_element(r, c, alpha);
  return Operator(m);
}

// D(alpha) on a grid x grid lattice over [-extent, extent]^2 with weights
// h^2/pi (the d^2 alpha / pi measure).
inline SpanningSet weyl_grid_quorum(int dim, int grid, double extent) {
  require(grid >= 2 && extent > 0.0, "Weyl grid needs at least 2 points per axis and positive extent");
  const double h = 2.0 * extent / (grid - 1);
  std::vector<FrameElement> e;
  e.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const cplx alpha{-extent + h * i, -extent + h * j};
      e.push_back({{"weyl", {alpha.real(), alpha.imag()}}, h * h / std::numbers::pi, displacement_block(alpha, dim)});
    }
  return SpanningSet(dim, std::move(e));
}

// d^2 operators with standard complex normal entries; a basis with
// probability one.
inline SpanningSet random_basis(int dim, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<FrameElement> e;
  for (int k = 0; k < dim * dim; ++k) {
    Matrix m(dim, dim);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) m(r, c) = rng.complex_normal();
    e.push_back({{"random", {static_cast<double>(k)}}, 1.0, Operator(m)});
  }
  return SpanningSet(dim, std::move(e));
}

struct QuorumDescriptor {
  std::string family;        // pauli | projectors | weigert | weyl | random
  int dim = 2;               // projectors, weyl, random
  HalfInteger spin{1};       // weigert
  std::string directions = "spiral";  // weigert: spiral | random
  std::uint64_t seed = 0;    // weigert random directions, random basis
  int grid = 21;             // weyl
  double extent = 4.0;       // weyl
};

inline SpanningSet build_quorum(const QuorumDescriptor& q) {
  if (q.family == "pauli") return pauli_quorum();
  if (q.family == "projectors") return observable_projectors(build_operator({kinds::Number{}, q.dim}));
  if (q.family == "weigert") {
    const int d = spin_dim(q.spin);
    if (q.directions == "spiral") return weigert_spin_quorum(q.spin, spiral_directions(d * d));
    if (q.directions == "random") return weigert_spin_quorum(q.spin, random_directions(d * d, q.seed));
    throw PreconditionError("unknown direction set: " + q.directions);
  }
  if (q.family == "weyl") return weyl_grid_quorum(q.dim, q.grid, q.extent);
  if (q.family == "random") return random_basis(q.dim, q.seed);
  throw PreconditionError("unknown quorum family: " + q.family);
}

}  // namespace qtomo
