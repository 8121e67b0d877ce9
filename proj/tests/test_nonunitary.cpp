#include <gtest/gtest.h>

#include <numbers>

#include "qtomo/estimators/nonunitary.hpp"
#include "test_util.hpp"

using namespace qtomo;

TEST(NonunitaryOperator, MatchesLadderProducts) {
  const int dim = 7;
  const double phi = 0.83;
  const Matrix rot = build_operator({kinds::KerrShift{0.0}, dim}).matrix();  // identity
  Matrix phase = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) phase(n, n) = std::polar(1.0, n * phi);
  const Matrix ep = build_operator({kinds::RaisingEPlus{}, dim}).matrix();
  const Matrix em = build_operator({kinds::LoweringEMinus{}, dim}).matrix();
  Matrix pow_p = rot, pow_m = rot;
  for (int n = 0; n < dim; ++n) {
    EXPECT_LE(qtomo::testing::max_abs_diff(nonunitary_operator(n, phi, dim), pow_p * phase), 1e-14);
    EXPECT_LE(qtomo::testing::max_abs_diff(nonunitary_operator(-n, phi, dim), pow_m * phase), 1e-14);
    pow_p = pow_p * ep;
    pow_m = pow_m * em;
  }
}

TEST(NonunitaryTrace, KnownValues) {
  const auto rho8 = make_state({states::Fock{0}, 8});
  EXPECT_NEAR(std::abs(nonunitary_phase_trace(rho8, 0, 0.0) - 1.0), 0.0, 1e-12);

  const auto fock1 = make_state({states::Fock{1}, 6});
  for (double psi : {0.0, 1.0, 2.5}) EXPECT_NEAR(std::abs(nonunitary_phase_trace(fock1, 1, psi)), 0.0, 1e-12);

  Vector v = Vector::Zero(4);
  v(0) = v(1) = 1.0;
  EXPECT_NEAR(std::abs(nonunitary_phase_trace(pure_state(v), 1, 0.0) - 0.5), 0.0, 1e-12);
}

TEST(NonunitaryTrace, RoutesAgreeOnRandomStates) {
  RngStream rng(44, 0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int dim = 3 + static_cast<int>(seed % 6);
    const auto rho = make_state({states::RandomMixed{seed + 100}, dim});
    EstimatorConfig cfg;
    cfg.dim = dim;
    for (int q = -(dim - 1); q < dim; ++q) {
      const auto r = nonunitary_phase_trace_report(rho, q, rng.uniform(-std::numbers::pi, std::numbers::pi), cfg);
      EXPECT_LE(r.discrepancy, 1e-8) << "q = " << q;
    }
  }
}

TEST(NonunitaryTrace, RejectsSmallGridAndLargeShift) {
  const auto rho = make_state({states::Fock{0}, 5});
  EstimatorConfig cfg;
  cfg.dim = 5;
  cfg.phi_grid = 12;
  EXPECT_THROW(nonunitary_phase_trace(rho, 1, 0.0, cfg), PreconditionError);
  EXPECT_THROW(nonunitary_phase_trace(rho, 5, 0.0), PreconditionError);
}

TEST(NonunitaryReconstruct, IdentityElementAndNumber) {
  const auto rho = make_state({states::RandomMixed{5}, 8});
  EXPECT_NEAR(std::abs(nonunitary_reconstruct(Operator::identity(8), rho) - 1.0), 0.0, 1e-12);
  const auto a = build_operator({kinds::MatrixUnit{2, 3}, 8});
  EXPECT_LE(std::abs(nonunitary_reconstruct(a, rho) - rho.expectation(a)), 1e-8);
  const auto fock2 = make_state({states::Fock{2}, 8});
  EXPECT_NEAR(std::abs(nonunitary_reconstruct(build_operator({kinds::Number{}, 8}), fock2) - 2.0), 0.0, 1e-8);
}

TEST(NonunitaryReconstruct, SupportViolation) {
  const auto rho = make_state({states::RandomMixed{5}, 6});
  const auto a = build_operator({kinds::MatrixUnit{0, 4}, 6});
  EXPECT_THROW(nonunitary_reconstruct(a, rho, {}, 3), PreconditionError);
  EXPECT_NO_THROW(nonunitary_reconstruct(a, rho, {}, 4));
}

TEST(NonunitaryOrthogonality, DiscreteDelta) {
  const int dim = 12, grid = 4 * dim;
  double worst = 0.0;
  for (int k = -5; k <= 5; ++k)
    for (int n = -5; n <= 5; ++n)
      for (int p = 0; p < dim; ++p)
        for (int i : {0, 7}) {
          const bool inside = p + n >= 0 && p + n < dim;
          const double expected = (k == n && inside) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(nonunitary_orthogonality(k, n, p, i, grid, dim) - expected));
        }
  EXPECT_LE(worst, 1e-10);
}
