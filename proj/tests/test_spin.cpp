#include <gtest/gtest.h>

#include <numbers>

#include "qtomo/estimators/spin.hpp"
#include "qtomo/sampler.hpp"
#include "test_util.hpp"

using namespace qtomo;
using qtomo::testing::random_operator;

namespace {

constexpr HalfInteger kHalf{1};
constexpr HalfInteger kOne{2};
constexpr HalfInteger kThreeHalves{3};

const Vec3 kZ{0.0, 0.0, 1.0};

HalfInteger m_of(int twice) { return HalfInteger{twice}; }

void expect_within_se(const EstimationResult& r, cplx truth, double k = 5.0) {
  ASSERT_GT(r.std_error, 0.0);
  EXPECT_LE(std::abs(r.mean - truth), k * r.std_error) << "mean " << r.mean << " truth " << truth << " se "
                                                       << r.std_error;
}

Vec3 random_direction(RngStream& rng) {
  return direction(std::acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2.0 * std::numbers::pi));
}

}  // namespace

TEST(SpinKernel, PauliZValues) {
  const auto sz = pauli(Axis::z);
  EXPECT_NEAR(std::abs(spin_kernel(sz, m_of(1), kZ, kHalf) - 3.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(spin_kernel(sz, m_of(-1), kZ, kHalf) + 3.0), 0.0, 1e-12);
}

TEST(SpinKernel, OffDiagonalObservableGivesZero) {
  const auto sx = pauli(Axis::x);
  EXPECT_NEAR(std::abs(spin_kernel(sx, m_of(1), kZ, kHalf)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(spin_kernel(sx, m_of(-1), kZ, kHalf)), 0.0, 1e-12);
}

TEST(SpinKernel, IdentityAgainstQuadratureOracle) {
  for (HalfInteger s : {kHalf, kOne, kThreeHalves}) {
    const auto id = Operator::identity(spin_dim(s));
    for (int tm = -s.twice; tm <= s.twice; tm += 2)
      EXPECT_NEAR(std::abs(spin_kernel(id, m_of(tm), kZ, s) - spin_kernel_quadrature(id, m_of(tm), kZ, s)), 0.0, 1e-9);
  }
}

TEST(SpinKernel, ClosedFormMatchesQuadratureOnRandomDraws) {
  RngStream rng(77, 0);
  const std::array<HalfInteger, 3> spins{kHalf, kOne, kThreeHalves};
  for (int trial = 0; trial < 50; ++trial) {
    const HalfInteger s = spins[static_cast<std::size_t>(trial % 3)];
    const auto a = random_operator(spin_dim(s), rng);
    const Vec3 n = random_direction(rng);
    const int j = static_cast<int>(rng.uniform() * spin_dim(s));
    const HalfInteger m{2 * j - s.twice};
    EXPECT_LE(std::abs(spin_kernel(a, m, n, s) - spin_kernel_quadrature(a, m, n, s)), 1e-9);
  }
}

TEST(SpinKernel, OperatorKernelReproducesScalarKernel) {
  RngStream rng(5, 0);
  const auto a = random_operator(4, rng);
  const Vec3 n = random_direction(rng);
  for (int tm = -3; tm <= 3; tm += 2) {
    const Matrix k = spin_operator_kernel(m_of(tm), n, kThreeHalves);
    EXPECT_LE(std::abs((a.matrix() * k).trace() - spin_kernel(a, m_of(tm), n, kThreeHalves)), 1e-12);
  }
}

TEST(SpinKernel, RejectsNonEigenvalues) {
  const auto id = Operator::identity(2);
  EXPECT_THROW(spin_kernel(id, m_of(0), kZ, kHalf), PreconditionError);
  EXPECT_THROW(spin_kernel(id, m_of(3), kZ, kHalf), PreconditionError);
  EXPECT_THROW(spin_kernel(Operator::identity(3), m_of(1), kZ, kHalf), DimensionMismatch);
}

TEST(SpinExact, QuadratureModeIsExact) {
  for (HalfInteger s : {kHalf, kOne, kThreeHalves}) {
    const int d = spin_dim(s);
    const auto rho = make_state({states::RandomMixed{11}, d});
    EXPECT_NEAR(std::abs(spin_exact_average(Operator::identity(d), rho, s) - 1.0), 0.0, 1e-9);
    RngStream rng(s.twice, 1);
    for (int k = 0; k < 5; ++k) {
      const auto a = random_operator(d, rng);
      EXPECT_LE(std::abs(spin_exact_average(a, rho, s) - rho.expectation(a)), 1e-9);
    }
  }
}

TEST(SpinEstimate, SpinUpPauliZ) {
  const auto up = make_state({states::SpinPure{kHalf, kZ}, 2});
  const auto rec = sample_spin(up, kHalf, 100000, 1);
  expect_within_se(spin_estimate(pauli(Axis::z), rec, kHalf), 1.0);
}

TEST(SpinEstimate, SpinOneRandomState) {
  const auto rho = make_state({states::RandomMixed{11}, 3});
  const auto sz = spin_component(kOne, kZ);
  const auto rec = sample_spin(rho, kOne, 100000, 2);
  expect_within_se(spin_estimate(sz, rec, kOne), rho.expectation(sz));
}

TEST(SpinEstimate, RejectsBadInput) {
  EXPECT_THROW(spin_estimate(Operator::identity(2), {}, kHalf), PreconditionError);
  const RecordSet rec{{Family::spin, {0.3, 0.2, 1.0}, 0.0}};
  EXPECT_THROW(spin_estimate(Operator::identity(2), rec, kHalf), PreconditionError);
}

TEST(SpinEstimate, StandardErrorScaling) {
  const auto rho = make_state({states::RandomMixed{4}, 2});
  const auto rec = sample_spin(rho, kHalf, 40000, 3);
  const RecordSet half(rec.begin(), rec.begin() + 20000);
  const auto a = pauli(Axis::x);
  const double ratio = spin_estimate(a, rec, kHalf).std_error / spin_estimate(a, half, kHalf).std_error;
  EXPECT_GE(ratio, 0.6);
  EXPECT_LE(ratio, 0.85);
}

TEST(PauliEstimate, SpinUpAndIdentity) {
  const auto up = make_state({states::SpinPure{kHalf, kZ}, 2});
  const auto rec = sample_pauli(up, 1000, 1);
  const auto z = pauli_estimate(pauli(Axis::z), rec);
  EXPECT_NEAR(std::abs(z.mean - 1.0), 0.0, 1e-15);
  const auto id = pauli_estimate(Operator::identity(2), rec);
  EXPECT_EQ(id.mean, cplx(1.0, 0.0));
  EXPECT_EQ(id.std_error, 0.0);
}

TEST(PauliEstimate, MaximallyMixedSigmaX) {
  const auto mixed = DensityMatrix(Operator(0.5 * Matrix::Identity(2, 2)));
  const auto rec = sample_pauli(mixed, 100000, 2);
  expect_within_se(pauli_estimate(pauli(Axis::x), rec), 0.0);
}

TEST(PauliEstimate, MissingAxisRejected) {
  RecordSet rec{{Family::pauli, {0.0, 0, 0}, 0.5}, {Family::pauli, {1.0, 0, 0}, -0.5}};
  EXPECT_THROW(pauli_estimate(pauli(Axis::x), rec), PreconditionError);
  rec.push_back({Family::pauli, {2.0, 0, 0}, 0.5});
  EXPECT_NO_THROW(pauli_estimate(pauli(Axis::x), rec));
}

TEST(SpinSampler, MaximallyMixedOutcomesUniform) {
  const HalfInteger s = kOne;
  const auto rho = DensityMatrix(Operator(Matrix::Identity(3, 3) / 3.0));
  const auto rec = sample_spin(rho, s, 100000, 9);
  std::vector<double> counts(3, 0.0);
  for (const auto& r : rec) counts[static_cast<std::size_t>(std::lround(r.outcome + 1.0))] += 1.0;
  const std::vector<double> expected(3, rec.size() / 3.0);
  EXPECT_GT(qtomo::testing::chi_square_p_value(counts, expected), 1e-3);
}

TEST(SpinSampler, EigenstateAlongFixedAxis) {
  const auto up = make_state({states::SpinPure{kHalf, kZ}, 2});
  const auto rec = sample_spin(up, kHalf, 1000, 4, std::array<double, 2>{0.0, 0.0});
  for (const auto& r : rec) EXPECT_EQ(r.outcome, 0.5);
}

TEST(SpinSampler, FirstMomentOfSpinUp) {
  const auto up = make_state({states::SpinPure{kHalf, kZ}, 2});
  const auto rec = sample_spin(up, kHalf, 100000, 5);
  // <m> = cos(theta) / 2 along n and the sphere average of cos^2 is 1/3,
  // so 6 m cos(theta) averages to 1.
  expect_within_se(
      estimate_mean(rec.size(), [&](std::size_t i) { return 6.0 * rec[i].outcome * std::cos(rec[i].setting[0]); }), 1.0);
}

TEST(SpinSampler, DirectionsUniformOnSphere) {
  const auto rec = sample_spin(make_state({states::RandomMixed{2}, 2}), kHalf, 100000, 6);
  std::vector<double> cos_theta, phi;
  for (const auto& r : rec) {
    cos_theta.push_back(std::cos(r.setting[0]));
    phi.push_back(r.setting[1]);
  }
  EXPECT_GT(qtomo::testing::ks_p_value(cos_theta, [](double x) { return 0.5 * (x + 1.0); }), 1e-3);
  EXPECT_GT(qtomo::testing::ks_p_value(phi, [](double x) { return x / (2.0 * std::numbers::pi); }), 1e-3);
}
