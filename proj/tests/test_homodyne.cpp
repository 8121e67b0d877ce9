#include <gtest/gtest.h>

#include <numbers>

#include "qtomo/estimators/glauber.hpp"
#include "qtomo/estimators/homodyne.hpp"
#include "qtomo/sampler.hpp"
#include "test_util.hpp"

using namespace qtomo;

namespace {

EstimatorConfig config(int dim) {
  EstimatorConfig c;
  c.dim = dim;
  return c;
}

Operator annihilation(int dim) { return build_operator({kinds::Annihilation{}, dim}); }
Operator number(int dim) { return build_operator({kinds::Number{}, dim}); }

void expect_within_se(const EstimationResult& r, cplx truth, double k = 5.0) {
  ASSERT_GT(r.std_error, 0.0);
  EXPECT_LE(std::abs(r.mean - truth), k * r.std_error) << "mean " << r.mean << " truth " << truth << " se "
                                                       << r.std_error;
}

}  // namespace

TEST(HomodyneKernel, MatrixIsHermitian) {
  const auto cfg = config(10);
  for (double q : {-2.3, -0.4, 0.0, 0.71, 3.2})
    for (double phi : {0.0, 0.9, 2.5}) {
      const auto k = homodyne_kernel_matrix(q, phi, cfg);
      EXPECT_TRUE(k.is_hermitian(1e-10));
    }
}

TEST(HomodyneKernel, TableMatchesDirectQuadrature) {
  const auto cfg = config(12);
  const HomodyneKernel kernel(cfg);
  std::vector<double> f(kernel.pair_count());
  for (double q : {-3.1234, -0.777, 0.0012, 1.4142, 2.9}) {
    kernel.patterns(q, f.data());
    const Eigen::VectorXd direct = kernel.patterns_direct(q);
    for (std::size_t p = 0; p < f.size(); ++p) EXPECT_NEAR(f[p], direct(static_cast<Eigen::Index>(p)), 1e-5);
  }
}

TEST(HomodyneKernel, IdentityNormalization) {
  for (int dim : {6, 12, 16}) {
    const auto cfg = config(dim);
    for (const auto& rho : {make_state({states::Coherent{0.5}, dim}), make_state({states::RandomMixed{3}, dim})}) {
      if (rho.matrix()(dim - 1, dim - 1).real() > 1e-3) continue;
      EXPECT_NEAR(std::abs(homodyne_exact_average(Operator::identity(dim), rho, cfg) - 1.0), 0.0, 1e-6) << dim;
    }
  }
}

TEST(HomodyneKernel, AnnihilationVanishesInVacuum) {
  const auto cfg = config(8);
  EXPECT_LE(std::abs(homodyne_exact_average(annihilation(8), make_state({states::Fock{0}, 8}), cfg)), 1e-8);
}

TEST(HomodyneKernel, CoherentAmplitude) {
  const auto cfg = config(12);
  const cplx beta{0.3, 0.0};
  const auto rho = make_state({states::Coherent{beta}, 12});
  const cplx truth = rho.expectation(annihilation(12));
  EXPECT_NEAR(std::abs(truth - beta), 0.0, 1e-6);
  EXPECT_LE(std::abs(homodyne_exact_average(annihilation(12), rho, cfg) - truth), 1e-3);
}

// Under q = (a e^{-i phi} + a^dag e^{i phi}) / 2, the phase average of
// 2 q e^{i phi} is <a>. Compare that first-moment integral with the kernel route.
TEST(HomodyneKernel, FirstMomentIdentity) {
  const auto cfg = config(12);
  const auto rho = make_state({states::Coherent{cplx{0.4, -0.2}}, 12});
  const HomodyneSampler dist(rho);
  const int n_phi = 48;
  const double h = 0.01, l = dist.half_width();
  cplx moment{0.0, 0.0};
  for (int j = 0; j < n_phi; ++j) {
    const double phi = std::numbers::pi * j / n_phi;
    double m1 = 0.0;
    for (double q = -l; q <= l; q += h) m1 += q * dist.density(q, phi) * h;
    moment += 2.0 * m1 * std::polar(1.0, phi) / static_cast<double>(n_phi);
  }
  const cplx kernel_route = homodyne_exact_average(annihilation(12), rho, cfg);
  EXPECT_LE(std::abs(moment - kernel_route), 1e-3);
  EXPECT_LE(std::abs(moment - rho.expectation(annihilation(12))), 1e-6);
}

TEST(HomodyneEstimate, NumberOnFockOne) {
  const int dim = 6;
  const auto rho = make_state({states::Fock{1}, dim});
  const auto rec = sample_homodyne(rho, 100000, 17);
  expect_within_se(homodyne_estimate(number(dim), rec, config(dim)), 1.0);
}

TEST(HomodyneEstimate, CoherenceElement) {
  const int dim = 12;
  const auto rho = make_state({states::Coherent{0.5}, dim});
  const auto a = build_operator({kinds::MatrixUnit{0, 1}, dim});
  const cplx truth = rho.expectation(a);
  EXPECT_NEAR(std::abs(truth - std::exp(-0.25) * 0.5), 0.0, 1e-6);
  const auto rec = sample_homodyne(rho, 100000, 23);
  expect_within_se(homodyne_estimate(a, rec, config(dim)), truth);
}

TEST(HomodyneEstimate, RejectsBadInput) {
  const auto cfg = config(4);
  EXPECT_THROW(homodyne_estimate(Operator::identity(4), {}, cfg), PreconditionError);
  const RecordSet rec{{Family::homodyne, {0.1, 0, 0}, 0.2}};
  EXPECT_THROW(homodyne_estimate(Operator::identity(5), rec, cfg), DimensionMismatch);
  const RecordSet spin{{Family::spin, {0.1, 0.2, 0.5}, 0.5}};
  EXPECT_THROW(homodyne_estimate(Operator::identity(4), spin, cfg), PreconditionError);
}

TEST(HomodyneEstimate, StandardErrorHalvesWithQuadrupleShots) {
  const int dim = 8;
  const auto rho = make_state({states::Coherent{0.5}, dim});
  const auto rec = sample_homodyne(rho, 80000, 5);
  const RecordSet half(rec.begin(), rec.begin() + 40000);
  const auto a = number(dim);
  const double ratio = homodyne_estimate(a, rec, config(dim)).std_error / homodyne_estimate(a, half, config(dim)).std_error;
  EXPECT_GE(ratio, 0.6);
  EXPECT_LE(ratio, 0.85);
}

TEST(SqueezedHomodyne, ZeroSqueezingReducesToHomodyne) {
  const int dim = 8;
  const auto cfg = config(dim);
  const auto rho = make_state({states::Coherent{0.4}, dim});
  const auto rec = sample_homodyne(rho, 2000, 3);
  RecordSet sq_rec = rec;
  for (auto& r : sq_rec) r.family = Family::squeezed;
  const auto a = number(dim);
  const auto plain = homodyne_estimate(a, rec, cfg);
  const auto squeezed = squeezed_homodyne_estimate(a, sq_rec, SqueezeParams{}, cfg);
  EXPECT_NEAR(std::abs(plain.mean - squeezed.mean), 0.0, 1e-10);
  EXPECT_NEAR(plain.std_error, squeezed.std_error, 1e-10);
}

TEST(SqueezedHomodyne, NormalizationAndVacuum) {
  const int dim = 6;
  const auto cfg = config(dim);
  const SqueezeParams sq{cplx{0.2, 0.0}};
  EXPECT_NEAR(sq.mu() * sq.mu() - std::norm(sq.nu()), 1.0, 1e-12);
  const auto vac = make_state({states::Fock{0}, dim});
  EXPECT_NEAR(std::abs(squeezed_homodyne_exact_average(Operator::identity(dim), vac, sq, cfg) - 1.0), 0.0, 1e-6);
  EXPECT_LE(std::abs(squeezed_homodyne_exact_average(number(dim), vac, sq, cfg)), 1e-3);

  const auto rec = sample_squeezed(vac, sq, 100000, 8, cfg);
  expect_within_se(squeezed_homodyne_estimate(number(dim), rec, sq, cfg), 0.0);
}

TEST(SqueezedHomodyne, RejectsMismatchedSqueezing) {
  const auto cfg = config(4);
  const RecordSet rec{{Family::squeezed, {0.1, 0.2, 0.0}, 0.2}, {Family::squeezed, {0.3, 0.2, 0.0}, -0.1}};
  EXPECT_THROW(squeezed_homodyne_estimate(Operator::identity(4), rec, SqueezeParams{0.1}, cfg), PreconditionError);
}

TEST(Glauber, IdentityFiltersReproduceOperators) {
  EstimatorConfig cfg = config(6);
  const auto id = Operator::identity(6);
  const auto r = generalized_glauber_check(id, id, cfg);
  EXPECT_TRUE(r.pass) << r.max_error;
  EXPECT_LE(r.max_error, 1e-4);
  EXPECT_NEAR(r.cond_f1, 1.0, 1e-12);
}

TEST(Glauber, SqueezeFiltersPass) {
  EstimatorConfig cfg = config(6);
  const int padded = 26;
  const auto s = build_operator({kinds::Squeeze{0.1}, padded});
  const auto r = generalized_glauber_check(s, s, cfg);
  EXPECT_TRUE(r.pass) << r.max_error;
}

TEST(Glauber, ParityFilterMatchesDisplacedParityRoute) {
  EstimatorConfig cfg = config(6);
  const int padded = 16;
  const auto id = Operator::identity(padded);
  const auto parity = build_operator({kinds::Parity{}, padded});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = suppressed_random_operator(6, seed);
    const Matrix glauber = generalized_glauber_apply(a, id, parity, cfg);
    const Matrix parity_route = parity_lattice_apply(a, padded, cfg);
    EXPECT_LE(qtomo::testing::max_abs_diff(glauber, parity_route), 1e-6);
    EXPECT_LE(qtomo::testing::max_abs_diff(parity_route, a.matrix()), 1e-4);
  }
}

TEST(Glauber, SingularFilterRejected) {
  EstimatorConfig cfg = config(4);
  Matrix m = Matrix::Identity(6, 6);
  m(5, 5) = 0.0;
  EXPECT_THROW(generalized_glauber_check(Operator(m), Operator::identity(6), cfg), PreconditionError);
}

TEST(Glauber, TruncatedDisplacementOrthogonality) {
  const int dim = 12;
  std::vector<cplx> grid;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid.push_back({-0.8 + 0.4 * i, -0.8 + 0.4 * j});
  std::vector<Operator> ops;
  for (const cplx& alpha : grid) ops.push_back(build_operator({kinds::Displacement{alpha}, dim}));
  for (std::size_t a = 0; a < grid.size(); ++a)
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const cplx t = (ops[a] * ops[b].adjoint()).trace();
      if (a == b) {
        EXPECT_NEAR(std::abs(t - static_cast<double>(dim)), 0.0, 1e-9);
      } else {
        EXPECT_LT(std::abs(t), 0.9 * dim);
      }
    }
  // Along a ray the truncated trace oscillates but its envelope decays:
  // the maximum over successive windows of |alpha| shrinks.
  const Operator origin = build_operator({kinds::Displacement{0.0}, dim});
  double previous = dim;
  for (double start : {0.5, 1.0, 1.5}) {
    double window_max = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double x = start + 0.05 * i;
      window_max = std::max(window_max, std::abs((build_operator({kinds::Displacement{x}, dim}) * origin.adjoint()).trace()));
    }
    EXPECT_LT(window_max, previous) << start;
    previous = window_max;
  }
}
