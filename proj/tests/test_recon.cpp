#include <gtest/gtest.h>

#include <numbers>

#include "qtomo/recon.hpp"
#include "qtomo/sampler.hpp"
#include "test_util.hpp"

using namespace qtomo;

namespace {

EstimatorConfig config(int dim) {
  EstimatorConfig c;
  c.dim = dim;
  return c;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// |est - truth| <= k SE for every estimated element; elements with a
// constant kernel (SE 0) must match to roundoff.
void expect_elementwise(const ReconstructedMatrix& r, const Matrix& truth, double k = 5.0) {
  for (int i = 0; i < r.dim; ++i)
    for (int j = 0; j < r.dim; ++j) {
      if (!r.estimated(i, j)) continue;
      const double err = std::abs(r.mean(i, j) - truth(i, j));
      EXPECT_LE(err, std::max(k * r.std_error(i, j), 1e-10))
          << "(" << i << "," << j << ") est " << r.mean(i, j) << " truth " << truth(i, j) << " se " << r.std_error(i, j);
    }
}

// Trace of the reconstruction equals the identity estimate (same linear
// kernel) and is within 5 SE of 1.
void expect_unit_trace(const ReconstructedMatrix& r, const RecordSet& rec, Method method, int dim,
                       const EstimatorConfig& cfg) {
  const auto id = estimate_observable(Operator::identity(dim), rec, method, cfg);
  const cplx trace = r.mean.trace();
  EXPECT_LE(std::abs(trace - id.mean), 1e-9);
  EXPECT_LE(std::abs(trace - 1.0), std::max(5.0 * id.std_error, 1e-10)) << method_name(method);
}

}  // namespace

TEST(Estimate, ConstantKernelHasZeroError) {
  const RecordSet rec(10, MeasurementRecord{Family::homodyne, {0.1, 0, 0}, 0.3});
  const auto r = estimate(rec, [](const MeasurementRecord&) { return cplx(1.0); });
  EXPECT_EQ(r.mean, cplx(1.0));
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.n_samples, 10u);
}

TEST(Estimate, TwoRecordsHandArithmetic) {
  const RecordSet rec{{Family::homodyne, {0, 0, 0}, 0.0}, {Family::homodyne, {0, 0, 0}, 2.0}};
  const auto r = estimate(rec, [](const MeasurementRecord& m) { return cplx(m.outcome); });
  EXPECT_DOUBLE_EQ(r.mean.real(), 1.0);
  EXPECT_DOUBLE_EQ(r.std_error, 1.0);
}

TEST(Estimate, ComplexVarianceAddsParts) {
  // Values 0 and 2 + 2i: each part has sample variance 2, total 4, SE sqrt(4/2).
  const RecordSet rec{{Family::homodyne, {0, 0, 0}, 0.0}, {Family::homodyne, {0, 0, 0}, 2.0}};
  const auto r = estimate(rec, [](const MeasurementRecord& m) { return cplx(m.outcome, m.outcome); });
  EXPECT_NEAR(r.std_error, std::sqrt(2.0), 1e-15);
}

TEST(Estimate, RequiresTwoRecords) {
  const auto one = [](const MeasurementRecord&) { return cplx(1.0); };
  EXPECT_THROW(estimate({}, one), PreconditionError);
  EXPECT_THROW(estimate({{Family::homodyne, {0, 0, 0}, 0.0}}, one), PreconditionError);
}

TEST(Estimate, VacuumQuadratureMeanIsZero) {
  const auto rec = sample_homodyne(make_state({states::Fock{0}, 5}), 100000, 1);
  const auto r = estimate(rec, [](const MeasurementRecord& m) { return cplx(m.outcome); });
  EXPECT_LE(std::abs(r.mean), 5.0 * r.std_error);
  EXPECT_GT(r.std_error, 0.0);
}

TEST(Accumulation, MergeMatchesSinglePass) {
  RngStream rng(3, 0);
  std::vector<cplx> xs(10007);
  for (auto& x : xs) x = rng.complex_normal() * 3.0 + cplx(1.0, -2.0);
  Accumulator single;
  for (const auto& x : xs) single.add(x);
  for (std::size_t cut : {1u, 17u, 5000u, 10006u}) {
    Accumulator a, b;
    for (std::size_t i = 0; i < cut; ++i) a.add(xs[i]);
    for (std::size_t i = cut; i < xs.size(); ++i) b.add(xs[i]);
    a.merge(b);
    EXPECT_EQ(a.count(), single.count());
    EXPECT_NEAR(std::abs(a.mean() - single.mean()), 0.0, 1e-13);
    EXPECT_NEAR(a.m2() / single.m2(), 1.0, 1e-12);
  }
  Accumulator empty, copy = single;
  copy.merge(empty);
  EXPECT_EQ(copy.mean(), single.mean());
  empty.merge(single);
  EXPECT_EQ(empty.m2(), single.m2());
}

TEST(Accumulation, MatrixMergeMatchesSinglePass) {
  RngStream rng(4, 0);
  std::vector<Matrix> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(qtomo::testing::random_operator(3, rng).matrix());
  MatrixAccumulator single(3), a(3), b(3), c(3);
  for (const auto& x : xs) single.add(x);
  for (int i = 0; i < 100; ++i) a.add(xs[static_cast<std::size_t>(i)]);
  for (int i = 100; i < 321; ++i) b.add(xs[static_cast<std::size_t>(i)]);
  for (int i = 321; i < 500; ++i) c.add(xs[static_cast<std::size_t>(i)]);
  a.merge(b);
  a.merge(c);
  EXPECT_LE(qtomo::testing::max_abs_diff(a.mean(), single.mean()), 1e-13);
  EXPECT_LE((a.std_error() - single.std_error()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Accumulation, WorkerCountDoesNotChangeResult) {
  const auto rec = sample_homodyne(make_state({states::Coherent{0.3}, 6}), 3 * kPartitionSize, 5);
  setenv("QTOMO_THREADS", "1", 1);
  const auto one = reconstruct_matrix(rec, Method::homodyne, config(6));
  setenv("QTOMO_THREADS", "3", 1);
  const auto three = reconstruct_matrix(rec, Method::homodyne, config(6));
  unsetenv("QTOMO_THREADS");
  EXPECT_EQ(one.mean, three.mean);
  EXPECT_EQ(one.std_error, three.std_error);
}

TEST(ReconstructMatrix, SpinHalfUp) {
  const auto up = make_state({states::SpinPure{HalfInteger{1}, Vec3{0, 0, 1}}, 2});
  const auto rec = sample_spin(up, HalfInteger{1}, 100000, 1);
  const auto r = reconstruct_matrix(rec, Method::spin, {});
  ASSERT_EQ(r.dim, 2);
  expect_elementwise(r, diag2(1.0, 0.0));
  expect_unit_trace(r, rec, Method::spin, 2, {});
  EXPECT_EQ(r.n_samples, 100000u);
}

TEST(ReconstructMatrix, SpinOneRandomState) {
  const auto rho = make_state({states::RandomMixed{7}, 3});
  const auto rec = sample_spin(rho, HalfInteger{2}, 100000, 2);
  const auto r = reconstruct_matrix(rec, Method::spin, {});
  expect_elementwise(r, rho.matrix());
}

TEST(ReconstructMatrix, ParityCoherent) {
  const int dim = 8;
  const auto rho = make_state({states::Coherent{0.5}, dim});
  const auto rec = sample_displaced_parity(rho, 400000, 3);
  const auto r = reconstruct_matrix(rec, Method::parity, config(dim));
  expect_elementwise(r, rho.matrix());
  EXPECT_TRUE(r.warnings.empty());
  expect_unit_trace(r, rec, Method::parity, dim, config(dim));
}

TEST(ReconstructMatrix, HomodyneCoherentLowBlock) {
  const int dim = 8;
  const auto rho = make_state({states::Coherent{cplx{0.3, 0.2}}, dim});
  const auto rec = sample_homodyne(rho, 100000, 4);
  const auto r = reconstruct_matrix(rec, Method::homodyne, config(dim), 3);
  ASSERT_EQ(r.dim, 4);
  expect_elementwise(r, rho.matrix().topLeftCorner(4, 4));
}

TEST(ReconstructMatrix, HomodyneTrace) {
  const int dim = 6;
  const auto rho = make_state({states::Coherent{0.3}, dim});
  const auto rec = sample_homodyne(rho, 50000, 5);
  expect_unit_trace(reconstruct_matrix(rec, Method::homodyne, config(dim)), rec, Method::homodyne, dim, config(dim));
}

TEST(ReconstructMatrix, SqueezedVacuumElements) {
  const int dim = 5;
  const auto cfg = config(dim);
  const auto vac = make_state({states::Fock{0}, dim});
  const auto rec = sample_squeezed(vac, SqueezeParams{cplx{0.2, 0.0}}, 50000, 6, cfg);
  const auto r = reconstruct_matrix(rec, Method::squeezed, cfg, 2);
  expect_elementwise(r, vac.matrix().topLeftCorner(3, 3));
}

TEST(ReconstructMatrix, PauliRandomQubit) {
  const auto rho = make_state({states::RandomMixed{8}, 2});
  const auto rec = sample_pauli(rho, 50000, 7);
  const auto r = reconstruct_matrix(rec, Method::pauli, {});
  expect_elementwise(r, rho.matrix());
  expect_unit_trace(r, rec, Method::pauli, 2, {});
}

TEST(ReconstructMatrix, KerrMarksDiagonalsNotEstimated) {
  const int dim = 5;
  const auto rho = make_state({states::Coherent{0.5}, dim});
  const auto rec = sample_kerr_phase(rho, 60000, 8);
  const auto r = reconstruct_matrix(rec, Method::kerr, config(dim));
  for (int k = 0; k < dim; ++k) EXPECT_FALSE(r.estimated(k, k));
  EXPECT_TRUE(r.estimated(0, 1));
  EXPECT_FALSE(r.warnings.empty());
  expect_elementwise(r, rho.matrix());
}

TEST(ReconstructMatrix, HermitizedIsConjugateSymmetric) {
  const auto rec = sample_spin(make_state({states::RandomMixed{9}, 2}), HalfInteger{1}, 2000, 9);
  const Matrix h = reconstruct_matrix(rec, Method::spin, {}).hermitized();
  for (int k = 0; k < 2; ++k)
    for (int n = 0; n < 2; ++n) EXPECT_EQ(h(k, n), std::conj(h(n, k)));
}

TEST(ReconstructMatrix, ElementsMatchSingleObservableEstimates) {
  // Element (k, n) is the estimate of A = |n><k|.
  const int dim = 6;
  const auto rec = sample_displaced_parity(make_state({states::Coherent{0.4}, dim}), 5000, 10);
  const auto r = reconstruct_matrix(rec, Method::parity, config(dim));
  for (int k = 0; k < 3; ++k)
    for (int n = 0; n < 3; ++n) {
      const auto e = estimate_observable(build_operator({kinds::MatrixUnit{n, k}, dim}), rec, Method::parity, config(dim));
      EXPECT_LE(std::abs(e.mean - r.mean(k, n)), 1e-10);
      EXPECT_NEAR(e.std_error, r.std_error(k, n), 1e-10);
    }
}

TEST(ReconstructMatrix, StandardErrorScaling) {
  const auto rho = make_state({states::RandomMixed{10}, 3});
  const auto rec = sample_spin(rho, HalfInteger{2}, 40000, 11);
  const RecordSet half(rec.begin(), rec.begin() + 20000);
  const auto full = reconstruct_matrix(rec, Method::spin, {});
  const auto part = reconstruct_matrix(half, Method::spin, {});
  for (int k = 0; k < 3; ++k)
    for (int n = 0; n < 3; ++n) {
      if (part.std_error(k, n) == 0.0) continue;
      const double ratio = full.std_error(k, n) / part.std_error(k, n);
      EXPECT_GE(ratio, 0.6);
      EXPECT_LE(ratio, 0.85);
    }
}

TEST(ReconstructMatrix, Errors) {
  const auto rec = sample_spin(make_state({states::Fock{0}, 2}), HalfInteger{1}, 10, 1);
  EXPECT_THROW(reconstruct_matrix(rec, Method::homodyne, config(4)), PreconditionError);
  EXPECT_THROW(reconstruct_matrix({}, Method::spin, {}), PreconditionError);
  EXPECT_THROW(reconstruct_matrix(rec, Method::nonunitary, {}), PreconditionError);
  EXPECT_THROW(reconstruct_matrix(rec, Method::spin, {}, 5), PreconditionError);
  EXPECT_THROW(method_from_name("tomography"), FormatError);
  EXPECT_EQ(method_from_name("kerr"), Method::kerr);
}

TEST(ReconstructMatrix, NonunitaryExactRoute) {
  const auto rho = make_state({states::RandomMixed{12}, 6});
  const auto r = reconstruct_matrix_nonunitary(rho, config(6));
  EXPECT_LE(qtomo::testing::max_abs_diff(r.mean, rho.matrix()), 1e-8);
  const auto low = reconstruct_matrix_nonunitary(rho, config(6), 2);
  EXPECT_EQ(low.dim, 3);
}

TEST(CompareStates, IdenticalStates) {
  const auto rho = make_state({states::RandomMixed{13}, 4}).matrix();
  const auto c = compare_states(rho, rho);
  EXPECT_NEAR(c.fidelity, 1.0, 1e-9);
  EXPECT_NEAR(c.trace_distance, 0.0, 1e-12);
  EXPECT_NEAR(c.max_element_error, 0.0, 1e-15);
}

TEST(CompareStates, OrthogonalAndMixedPairs) {
  const auto c = compare_states(diag2(1.0, 0.0), diag2(0.0, 1.0));
  EXPECT_NEAR(c.fidelity, 0.0, 1e-15);
  EXPECT_NEAR(c.trace_distance, 1.0, 1e-15);
  EXPECT_NEAR(compare_states(diag2(0.75, 0.25), diag2(0.25, 0.75)).trace_distance, 0.5, 1e-15);
  // Fidelity of commuting states: (sum sqrt(p q))^2.
  const double f = std::pow(2.0 * std::sqrt(0.75 * 0.25), 2);
  EXPECT_NEAR(compare_states(diag2(0.75, 0.25), diag2(0.25, 0.75)).fidelity, f, 1e-12);
}

TEST(CompareStates, NonPhysicalEstimateReported) {
  const auto c = compare_states(diag2(1.05, -0.05), diag2(1.0, 0.0));
  EXPECT_LT(c.min_eigenvalue, 0.0);
  EXPECT_LE(c.fidelity, 1.0 + 0.05 + 1e-9);
  EXPECT_THROW(compare_states(diag2(1, 0), Matrix::Identity(3, 3)), DimensionMismatch);
}

TEST(NearestPhysicalState, ProjectsOntoSimplex) {
  const Matrix p = nearest_physical_state(diag2(1.1, -0.1));
  EXPECT_NEAR(p(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(p(1, 1).real(), 0.0, 1e-15);
  const auto rho = make_state({states::RandomMixed{14}, 3}).matrix();
  EXPECT_LE(qtomo::testing::max_abs_diff(nearest_physical_state(rho), rho), 1e-12);
}
