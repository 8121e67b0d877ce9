#pragma once

// Simulated quorum measurements on known states.
//
// Shots are cut into partitions of kPartitionSize; partition p draws from
// RngStream(seed, p) and records are concatenated in partition order, so the
// output depends only on (state, config, seed) and not on the worker count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/estimators/homodyne.hpp"
#include "qtomo/estimators/parity.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/records.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

// Largest population of the top Fock level accepted by the oscillator samplers.
inline constexpr double kLeakageTolerance = 1e-6;

inline void check_leakage(const DensityMatrix& rho) {
  const double top = rho.matrix()(rho.dim() - 1, rho.dim() - 1).real();
  if (top > kLeakageTolerance)
    throw PreconditionError("state population " + std::to_string(top) +
                            " at the top Fock level exceeds 1e-6: increase dim");
}

namespace detail {

// draw(rng, i) -> MeasurementRecord for shot i.
template <class Draw>
RecordSet sample_partitioned(std::size_t shots, std::uint64_t seed, Draw&& draw) {
  require(shots >= 1, "shots must be at least 1");
  RecordSet out(shots);
  parallel_for(partition_count(shots), [&](std::size_t p) {
    RngStream rng(seed, p);
    const std::size_t begin = p * kPartitionSize;
    const std::size_t end = std::min(shots, begin + kPartitionSize);
    for (std::size_t i = begin; i < end; ++i) out[i] = draw(rng, i);
  });
  return out;
}

// Index of the first cumulative value above target.
inline std::size_t pick_bin(const std::vector<double>& cumulative, double target) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace detail

// --- homodyne ---------------------------------------------------------------

// Exact draws from p(q; phi) by rejection under a phi-independent envelope
//   E(q) = c_0(q) + 2 sum_{d > 0} |c_d(q)| >= p(q; phi),
// sampled through its piecewise-constant upper bound on a fine q-grid.
class HomodyneSampler {
 public:
  static constexpr double kCellWidth = 0.01;
  static constexpr double kTailMass = 1e-8;
  static constexpr double kEnvelopeMargin = 1.05;

  explicit HomodyneSampler(const DensityMatrix& rho) : rho_(rho.matrix()), dim_(rho.dim()) {
    check_leakage(rho);
    half_width_ = std::sqrt(static_cast<double>(dim_ - 1)) + 2.0;  // 4 vacuum standard deviations
    while (central_mass(half_width_) < 1.0 - kTailMass) half_width_ += 0.5;
    const auto cells = static_cast<std::size_t>(std::ceil(2.0 * half_width_ / kCellWidth));
    width_ = 2.0 * half_width_ / static_cast<double>(cells);
    bound_.resize(cells);
    cumulative_.resize(cells);
    double total = 0.0;
    double left = envelope(-half_width_);
    for (std::size_t i = 0; i < cells; ++i) {
      const double q0 = -half_width_ + width_ * static_cast<double>(i);
      const double mid = envelope(q0 + 0.5 * width_);
      const double right = envelope(q0 + width_);
      bound_[i] = kEnvelopeMargin * std::max({left, mid, right});
      total += bound_[i] * width_;
      cumulative_[i] = total;
      left = right;
    }
  }

  double half_width() const { return half_width_; }

  double density(double q, double phi) const {
    const auto c = homodyne_coherence_profile(rho_, special::oscillator_wavefunctions(dim_, q));
    double p = c[0].real();
    for (int d = 1; d < dim_; ++d) p += 2.0 * (std::polar(1.0, -d * phi) * c[static_cast<std::size_t>(d)]).real();
    return p;
  }

  double draw(double phi, RngStream& rng) const {
    for (;;) {
      const std::size_t i = detail::pick_bin(cumulative_, rng.uniform() * cumulative_.back());
      const double q = -half_width_ + width_ * (static_cast<double>(i) + rng.uniform());
      const double p = density(q, phi);
      if (p > bound_[i]) throw std::logic_error("homodyne envelope violated");
      if (rng.uniform() * bound_[i] < p) return q;
    }
  }

 private:
  double envelope(double q) const {
    const auto c = homodyne_coherence_profile(rho_, special::oscillator_wavefunctions(dim_, q));
    double e = c[0].real();
    for (int d = 1; d < dim_; ++d) e += 2.0 * std::abs(c[static_cast<std::size_t>(d)]);
    return e;
  }

  // Phase-averaged mass in [-l, l] (trapezoid on the cell grid).
  double central_mass(double l) const {
    const int n = static_cast<int>(std::ceil(2.0 * l / kCellWidth));
    const double h = 2.0 * l / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const auto psi = special::oscillator_wavefunctions(dim_, -l + h * i);
      double c0 = 0.0;
      for (int k = 0; k < dim_; ++k) c0 += rho_(k, k).real() * psi[static_cast<std::size_t>(k)] * psi[static_cast<std::size_t>(k)];
      s += (i == 0 || i == n ? 0.5 : 1.0) * c0;
    }
    return s * h;
  }

  Matrix rho_;
  int dim_;
  double half_width_ = 0.0;
  double width_ = 0.0;
  std::vector<double> bound_;
  std::vector<double> cumulative_;
};

// phi uniform on [0, pi) unless fixed; q from p(q; phi).
inline RecordSet sample_homodyne(const DensityMatrix& rho, std::size_t shots, std::uint64_t seed,
                                 std::optional<double> fixed_phi = {}) {
  const HomodyneSampler sampler(rho);
  return detail::sample_partitioned(shots, seed, [&](RngStream& rng, std::size_t) {
    const double phi = fixed_phi ? *fixed_phi : rng.uniform(0.0, std::numbers::pi);
    return MeasurementRecord{Family::homodyne, {phi, 0.0, 0.0}, sampler.draw(phi, rng)};
  });
}

// Squeezed quadrature S^dag q_phi S: homodyne statistics of S rho S^dag on
// the padded space.
inline RecordSet sample_squeezed(const DensityMatrix& rho, const SqueezeParams& sq, std::size_t shots,
                                 std::uint64_t seed, const EstimatorConfig& cfg, std::optional<double> fixed_phi = {}) {
  check_leakage(rho);
  const HomodyneSampler sampler(squeeze_state(rho, sq, cfg.with_dim(rho.dim())));
  return detail::sample_partitioned(shots, seed, [&](RngStream& rng, std::size_t) {
    const double phi = fixed_phi ? *fixed_phi : rng.uniform(0.0, std::numbers::pi);
    return MeasurementRecord{Family::squeezed, {phi, sq.zeta.real(), sq.zeta.imag()}, sampler.draw(phi, rng)};
  });
}

// --- spin -------------------------------------------------------------------

// n uniform on the sphere (cos theta uniform) unless fixed as (theta, phi);
// m from the populations of rho in the S.n eigenbasis.
inline RecordSet sample_spin(const DensityMatrix& rho, HalfInteger s, std::size_t shots, std::uint64_t seed,
                             std::optional<std::array<double, 2>> fixed_direction = {}) {
  if (rho.dim() != spin_dim(s)) throw DimensionMismatch("state dimension must be 2s + 1");
  const int d = rho.dim();
  return detail::sample_partitioned(shots, seed, [&](RngStream& rng, std::size_t) {
    double theta, phi;
    if (fixed_direction) {
      theta = (*fixed_direction)[0];
      phi = (*fixed_direction)[1];
    } else {
      theta = std::acos(std::clamp(rng.uniform(-1.0, 1.0), -1.0, 1.0));
      phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const Matrix basis = spin_eigenbasis(s, direction(theta, phi));
    std::vector<double> cumulative(static_cast<std::size_t>(d));
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
      total += std::max(0.0, (basis.col(j).adjoint() * rho.matrix() * basis.col(j))(0, 0).real());
      cumulative[static_cast<std::size_t>(j)] = total;
    }
    const auto j = static_cast<int>(detail::pick_bin(cumulative, rng.uniform() * total));
    return MeasurementRecord{Family::spin, {theta, phi, s.value()}, 0.5 * (2 * j - s.twice)};
  });
}

// shots_per_axis records along x, then y, then z; outcome m = +-1/2.
inline RecordSet sample_pauli(const DensityMatrix& rho, std::size_t shots_per_axis, std::uint64_t seed) {
  if (rho.dim() != 2) throw DimensionMismatch("Pauli sampling needs a qubit state");
  require(shots_per_axis >= 1, "shots per axis must be at least 1");
  std::array<double, 3> p_up{};
  for (int a = 0; a < 3; ++a)
    p_up[static_cast<std::size_t>(a)] = 0.5 * (1.0 + rho.expectation(pauli(static_cast<Axis>(a))).real());
  return detail::sample_partitioned(3 * shots_per_axis, seed, [&](RngStream& rng, std::size_t i) {
    const std::size_t axis = i / shots_per_axis;
    const double m = rng.uniform() < p_up[axis] ? 0.5 : -0.5;
    return MeasurementRecord{Family::pauli, {static_cast<double>(axis), 0.0, 0.0}, m};
  });
}

// --- displaced parity ---------------------------------------------------------

// <P> in D(beta) rho D^dag(beta), i.e. Tr[rho X(beta)] / 4.
inline double displaced_parity_mean(const DensityMatrix& rho, cplx beta) {
  const Matrix x = displaced_parity_matrix(beta, rho.dim());
  return 0.25 * rho.matrix().transpose().cwiseProduct(x).sum().real();
}

// beta uniform on the disk |beta| <= radius (radius <= 0 selects the default
// 2 + sqrt(n_max)) unless fixed; outcome +-1 with p(+) = (1 + <P>) / 2.
inline RecordSet sample_displaced_parity(const DensityMatrix& rho, std::size_t shots, std::uint64_t seed,
                                         double radius = 0.0, std::optional<cplx> fixed_beta = {}) {
  check_leakage(rho);
  const double r_max = radius > 0.0 ? radius : parity_proposal_radius(rho.dim());
  return detail::sample_partitioned(shots, seed, [&](RngStream& rng, std::size_t) {
    cplx beta;
    if (fixed_beta) {
      beta = *fixed_beta;
    } else {
      const double r = r_max * std::sqrt(rng.uniform());
      beta = std::polar(r, rng.uniform(0.0, 2.0 * std::numbers::pi));
    }
    const double p_plus = std::clamp(0.5 * (1.0 + displaced_parity_mean(rho, beta)), 0.0, 1.0);
    const double o = rng.uniform() < p_plus ? 1.0 : -1.0;
    return MeasurementRecord{Family::parity, {beta.real(), beta.imag(), r_max}, o};
  });
}

// --- Kerr phase -------------------------------------------------------------

// Phase distribution of V(psi) rho V^dag(psi) under the Susskind-Glogower
// POVM: density g(phi) / 2 pi with
//   g(phi) = Tr[sigma] + 2 Re sum_{d > 0} c_d e^{i d phi},  c_d = sum_j sigma_{j, j+d}.
class KerrPhaseDistribution {
 public:
  KerrPhaseDistribution(const DensityMatrix& rho, double psi) : c_(static_cast<std::size_t>(rho.dim())) {
    const int dim = rho.dim();
    for (int d = 0; d < dim; ++d) {
      cplx s{0.0, 0.0};
      for (int j = 0; j + d < dim; ++j) {
        const double jj = static_cast<double>(j) * j, kk = static_cast<double>(j + d) * (j + d);
        s += std::polar(1.0, (jj - kk) * psi) * rho.matrix()(j, j + d);
      }
      c_[static_cast<std::size_t>(d)] = s;
    }
  }

  double density(double phi) const {
    double g = c_[0].real();
    for (std::size_t d = 1; d < c_.size(); ++d) g += 2.0 * (c_[d] * std::polar(1.0, static_cast<double>(d) * phi)).real();
    return g / (2.0 * std::numbers::pi);
  }

  double cdf(double phi) const {
    double g = c_[0].real() * phi;
    for (std::size_t d = 1; d < c_.size(); ++d) {
      const double dd = static_cast<double>(d);
      g += 2.0 * (c_[d] * (std::polar(1.0, dd * phi) - 1.0) / cplx{0.0, dd}).real();
    }
    return g / (2.0 * std::numbers::pi);
  }

  // Inverse CDF: bracket on a uniform grid, then safeguarded Newton.
  double quantile(double u, int grid) const {
    const double h = 2.0 * std::numbers::pi / grid;
    int lo = 0, hi = grid;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (cdf(h * mid) <= u ? lo : hi) = mid;
    }
    double a = h * lo, b = h * hi, x = 0.5 * (a + b);
    for (int it = 0; it < 100; ++it) {
      const double f = cdf(x) - u;
      if (std::abs(f) < 1e-14) break;
      (f < 0.0 ? a : b) = x;
      const double p = density(x);
      double next = p > 0.0 ? x - f / p : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - x) < 1e-13) {
        x = next;
        break;
      }
      x = next;
    }
    return x;
  }

 private:
  std::vector<cplx> c_;
};

// psi uniform on [0, 2 pi) unless fixed; phi by inverse CDF.
inline RecordSet sample_kerr_phase(const DensityMatrix& rho, std::size_t shots, std::uint64_t seed,
                                   const EstimatorConfig& cfg = {}, std::optional<double> fixed_psi = {}) {
  const int grid = std::max(cfg.phi_grid, 4 * rho.dim());
  return detail::sample_partitioned(shots, seed, [&](RngStream& rng, std::size_t) {
    const double psi = fixed_psi ? *fixed_psi : rng.uniform(0.0, 2.0 * std::numbers::pi);
    const KerrPhaseDistribution dist(rho, psi);
    return MeasurementRecord{Family::kerr, {psi, 0.0, 0.0}, dist.quantile(rng.uniform(), grid)};
  });
}

}  // namespace qtomo
