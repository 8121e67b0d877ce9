#pragma once

// Density-matrix reconstruction and observable estimation from records.
//
// Every record-based method has an operator kernel Q(record) with
// Tr[A Q] equal to the single-record estimate of <A>, hence E[Q] = rho.
// Element (k, n) of the reconstruction is the average of Q_kn, i.e. the
// estimate for A = |n><k|.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/estimators/homodyne.hpp"
#include "qtomo/estimators/kerr.hpp"
#include "qtomo/estimators/nonunitary.hpp"
#include "qtomo/estimators/parity.hpp"
#include "qtomo/estimators/spin.hpp"
#include "qtomo/records.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

enum class Method { homodyne, squeezed, parity, spin, pauli, kerr, nonunitary };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::homodyne: return "homodyne";
    case Method::squeezed: return "squeezed";
    case Method::parity: return "parity";
    case Method::spin: return "spin";
    case Method::pauli: return "pauli";
    case Method::kerr: return "kerr";
    case Method::nonunitary: return "nonunitary";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  for (Method m : {Method::homodyne, Method::squeezed, Method::parity, Method::spin, Method::pauli, Method::kerr,
                   Method::nonunitary})
    if (name == method_name(m)) return m;
  throw FormatError("unknown method: " + name);
}

// Record family consumed by a record-based method.
inline Family method_family(Method m) {
  switch (m) {
    case Method::homodyne: return Family::homodyne;
    case Method::squeezed: return Family::squeezed;
    case Method::parity: return Family::parity;
    case Method::spin: return Family::spin;
    case Method::pauli: return Family::pauli;
    case Method::kerr: return Family::kerr;
    case Method::nonunitary: break;
  }
  throw PreconditionError("method 'nonunitary' works from a state, not from records");
}

// Mean and standard error of kernel(record) over the records.
inline EstimationResult estimate(const RecordSet& records, const std::function<cplx(const MeasurementRecord&)>& kernel) {
  require(records.size() >= 2, "estimation needs at least 2 records");
  return estimate_mean(records.size(), [&](std::size_t i) { return kernel(records[i]); });
}

// Spin carried by spin records (column s3); all records must agree.
inline HalfInteger record_spin(const RecordSet& records) {
  require(!records.empty(), "no records");
  const HalfInteger s = half_integer_from(records.front().setting[2]);
  for (const auto& r : records) require(half_integer_from(r.setting[2]) == s, "records mix different spins");
  return s;
}

// Squeezing parameter carried by squeezed records (columns s2, s3).
inline SqueezeParams record_squeeze(const RecordSet& records) {
  require(!records.empty(), "no records");
  return {cplx(records.front().setting[1], records.front().setting[2])};
}

// Single-observable estimate with the method's estimator.
inline EstimationResult estimate_observable(const Operator& a, const RecordSet& records, Method method,
                                            const EstimatorConfig& cfg) {
  require(records.size() >= 2, "estimation needs at least 2 records");
  require_family(records, method_family(method));
  switch (method) {
    case Method::homodyne: return homodyne_estimate(a, records, cfg.with_dim(a.dim()));
    case Method::squeezed: return squeezed_homodyne_estimate(a, records, record_squeeze(records), cfg.with_dim(a.dim()));
    case Method::parity: return parity_estimate(a, records, cfg.with_dim(a.dim()));
    case Method::spin: return spin_estimate(a, records, record_spin(records));
    case Method::pauli: return pauli_estimate(a, records);
    case Method::kerr: return kerr_estimate(a, records, cfg.with_dim(a.dim()));
    case Method::nonunitary: break;
  }
  throw PreconditionError("method 'nonunitary' works from a state, not from records");
}

struct ReconstructedMatrix {
  int dim = 0;
  Matrix mean;                    // raw element averages M_kn
  Eigen::MatrixXd std_error;      // per element
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> estimated;
  std::size_t n_samples = 0;
  std::vector<std::string> warnings;

  // (M + M^dag) / 2; elements not estimated stay zero.
  Matrix hermitized() const { return 0.5 * (mean + mean.adjoint()); }

  EstimationResult element(int k, int n) const {
    return {mean(k, n), std_error(k, n), n_samples, {}};
  }
};

namespace detail {

inline ReconstructedMatrix from_accumulator(const MatrixAccumulator& acc, int size) {
  ReconstructedMatrix r;
  r.dim = size;
  r.mean = acc.mean().topLeftCorner(size, size);
  r.std_error = acc.std_error().topLeftCorner(size, size);
  r.estimated.setConstant(size, size, true);
  r.n_samples = acc.count();
  return r;
}

template <class KernelOf>
ReconstructedMatrix average_kernel(const RecordSet& records, int kernel_dim, int size, KernelOf kernel_of) {
  const MatrixAccumulator acc = partitioned_reduce(
      records.size(), MatrixAccumulator(kernel_dim), [&](MatrixAccumulator& a, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) a.add(kernel_of(records[i]));
      });
  return from_accumulator(acc, size);
}

}  // namespace detail

// Every element (k, n) with k, n <= n_max; n_max < 0 means dim - 1.
// cfg.dim is the Fock truncation of the oscillator kernels; spin and Pauli
// take their dimension from the records.
inline ReconstructedMatrix reconstruct_matrix(const RecordSet& records, Method method, const EstimatorConfig& cfg,
                                              int n_max = -1) {
  require(records.size() >= 2, "reconstruction needs at least 2 records");
  require_family(records, method_family(method));
  cfg.validate();
  const int dim = method == Method::spin ? spin_dim(record_spin(records)) : method == Method::pauli ? 2 : cfg.dim;
  const int size = n_max < 0 ? dim : n_max + 1;
  require(size >= 1 && size <= dim, "n_max must be below the kernel dimension");

  switch (method) {
    case Method::homodyne: {
      const HomodyneKernel kernel(cfg);
      return detail::average_kernel(records, dim, size, [&](const MeasurementRecord& r) {
        std::vector<double> f(kernel.pair_count());
        kernel.patterns(r.outcome, f.data());
        return kernel.assemble(f.data(), r.setting[0]);
      });
    }
    case Method::squeezed: {
      const SqueezeParams sq = record_squeeze(records);
      for (const auto& r : records)
        require(std::abs(cplx(r.setting[1], r.setting[2]) - sq.zeta) <= 1e-12, "records mix squeezing parameters");
      const EstimatorConfig padded = cfg.with_dim(squeezed_dim(cfg));
      const HomodyneKernel kernel(padded);
      const Matrix sc = squeeze_columns(sq.zeta, dim, padded.dim, cfg.pad);
      return detail::average_kernel(records, dim, size, [&](const MeasurementRecord& r) {
        std::vector<double> f(kernel.pair_count());
        kernel.patterns(r.outcome, f.data());
        return Matrix(sc.adjoint() * kernel.assemble(f.data(), r.setting[0]) * sc);
      });
    }
    case Method::parity: {
      double min_radius = records.front().setting[2];
      for (const auto& r : records) min_radius = std::min(min_radius, r.setting[2]);
      auto out = detail::average_kernel(records, dim, size, [&](const MeasurementRecord& r) {
        return Matrix(r.setting[2] * r.setting[2] * r.outcome * displaced_parity_matrix({r.setting[0], r.setting[1]}, dim));
      });
      // Worst boundary kernel over the element observables |n><k|.
      double edge = 0.0;
      for (int j = 0; j < 64; ++j) {
        const Matrix x = displaced_parity_matrix(std::polar(min_radius, 2.0 * std::numbers::pi * j / 64), dim);
        edge = std::max(edge, x.topLeftCorner(size, size).cwiseAbs().maxCoeff());
      }
      if (edge > kParityBoundaryTol)
        out.warnings.push_back("proposal radius " + std::to_string(min_radius) +
                               " may bias the estimate: kernel magnitude at the boundary is " + std::to_string(edge));
      return out;
    }
    case Method::spin: {
      const HalfInteger s = record_spin(records);
      return detail::average_kernel(records, dim, size, [&](const MeasurementRecord& r) {
        return spin_operator_kernel(half_integer_from(r.outcome), direction(r.setting[0], r.setting[1]), s);
      });
    }
    case Method::pauli: {
      const PauliAxisStats st = pauli_axis_stats(records);
      ReconstructedMatrix out;
      out.dim = size;
      out.mean = Matrix::Zero(size, size);
      out.std_error = Eigen::MatrixXd::Zero(size, size);
      out.estimated.setConstant(size, size, true);
      for (int k = 0; k < size; ++k)
        for (int n = 0; n < size; ++n) {
          const auto e = pauli_estimate(build_operator({kinds::MatrixUnit{n, k}, 2}), st);
          out.mean(k, n) = e.mean;
          out.std_error(k, n) = e.std_error;
          out.n_samples = e.n_samples;
        }
      return out;
    }
    case Method::kerr: {
      auto out = detail::average_kernel(records, dim, size, [&](const MeasurementRecord& r) {
        Matrix b = kerr_povm_matrix(r.setting[0], r.outcome, dim);
        b.diagonal().setZero();
        return b;
      });
      for (int k = 0; k < size; ++k) {
        out.estimated(k, k) = false;
        out.mean(k, k) = 0.0;
        out.std_error(k, k) = 0.0;
      }
      out.warnings.push_back("diagonal elements are not estimated by the kerr method");
      return out;
    }
    case Method::nonunitary: break;
  }
  throw PreconditionError("method 'nonunitary' works from a state, not from records");
}

// Exact route of the nonunitary resolution: each element from the state.
inline ReconstructedMatrix reconstruct_matrix_nonunitary(const DensityMatrix& rho, const EstimatorConfig& cfg,
                                                         int n_max = -1) {
  const int dim = rho.dim();
  const int size = n_max < 0 ? dim : n_max + 1;
  require(size >= 1 && size <= dim, "n_max must be below the state dimension");
  ReconstructedMatrix out;
  out.dim = size;
  out.mean = Matrix::Zero(size, size);
  out.std_error = Eigen::MatrixXd::Zero(size, size);
  out.estimated.setConstant(size, size, true);
  for (int k = 0; k < size; ++k)
    for (int n = 0; n < size; ++n)
      out.mean(k, n) = nonunitary_reconstruct(build_operator({kinds::MatrixUnit{n, k}, dim}), rho, cfg);
  return out;
}

// --- comparison ---------------------------------------------------------------

struct StateComparison {
  double fidelity = 0.0;
  double trace_distance = 0.0;
  double max_element_error = 0.0;
  double min_eigenvalue = 0.0;  // of the estimate; negative means non-physical
};

namespace detail {

inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Fidelity (Tr sqrt(sqrt(ref) est sqrt(ref)))^2 and trace distance
// (1/2) ||est - ref||_1. The estimate is Hermitized but not projected, so
// negative eigenvalues of sqrt(ref) est sqrt(ref) are dropped from the
// fidelity sum and reported through min_eigenvalue.
inline StateComparison compare_states(const Matrix& estimate, const Matrix& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw DimensionMismatch("states have different dimensions");
  const Matrix est = 0.5 * (estimate + estimate.adjoint());
  const Matrix ref = 0.5 * (reference + reference.adjoint());
  StateComparison c;
  const Matrix s = detail::psd_sqrt(ref);
  Eigen::SelfAdjointEigenSolver<Matrix> inner(s * est * s);
  const double root = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  c.fidelity = root * root;
  Eigen::SelfAdjointEigenSolver<Matrix> diff(est - ref);
  c.trace_distance = 0.5 * diff.eigenvalues().cwiseAbs().sum();
  c.max_element_error = (est - ref).cwiseAbs().maxCoeff();
  c.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(est).eigenvalues().minCoeff();
  return c;
}

// Closest density matrix in Frobenius norm: eigenvalues projected onto the
// probability simplex. Diagnostic only.
inline Matrix nearest_physical_state(const Matrix& estimate) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (estimate + estimate.adjoint()));
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) theta = t;
  }
  Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<Eigen::Index>(i)) = std::max(0.0, v[i] - theta);
  return es.eigenvectors() * p.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qtomo
