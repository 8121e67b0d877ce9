#pragma once

// Homodyne tomography kernel K(q - q_phi) in the Fock basis.
//
// With e^{-ik q_phi} = D(-(ik/2) e^{i phi}) the kernel factorizes as
//   K_mn(q, phi) = e^{i(m-n)phi} f_mn(q),
// where the pattern functions f_mn = f_nm are real:
//   f_mn(q) = s_d 2 int_0^{k_max} dk (k/4) e^{-eps k^2} r_mn(k) t_d(kq),
//   r_mn(k) = sqrt(n!/m!) (k/2)^d e^{-k^2/8} L_n^d(k^2/4),   d = m - n >= 0,
// with t_d = cos, s_d = (-1)^{d/2} for even d and t_d = sin,
// s_d = (-1)^{(d-1)/2} for odd d.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "qtomo/estimators/config.hpp"
#include "qtomo/oscore.hpp"
#include "qtomo/records.hpp"
#include "qtomo/stats.hpp"

namespace qtomo {

namespace detail {

inline double homodyne_radial(int n, int d, double k) {
  if (k == 0.0) return d == 0 ? 1.0 : 0.0;
  const double x = 0.25 * k * k;
  const double log_mag = 0.5 * (special::log_factorial(n) - special::log_factorial(n + d)) +
                         d * std::log(0.5 * k) - 0.5 * x;
  return std::exp(log_mag) * special::laguerre(n, d, x);
}

// 4-point Lagrange weights for nodes at -1, 0, 1, 2 and offset t in [0, 1).
inline std::array<double, 4> cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace detail

class HomodyneKernel {
 public:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit HomodyneKernel(const EstimatorConfig& cfg, bool tabulate = true) : dim_(cfg.dim), h_(cfg.table_step) {
    cfg.validate();
    for (int n = 0; n < dim_; ++n)
      for (int m = n; m < dim_; ++m) pairs_.push_back({m, n});
    index_.assign(static_cast<std::size_t>(dim_ * dim_), -1);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto [m, n] = pairs_[p];
      index_[static_cast<std::size_t>(m * dim_ + n)] = static_cast<int>(p);
      index_[static_cast<std::size_t>(n * dim_ + m)] = static_cast<int>(p);
    }

    const auto rule = special::composite_gauss_legendre(cfg.k_panels, cfg.k_order, 0.0, cfg.k_max);
    const auto nk = static_cast<Eigen::Index>(rule.nodes.size());
    k_.resize(nk);
    radial_.resize(static_cast<Eigen::Index>(pairs_.size()), nk);
    for (Eigen::Index j = 0; j < nk; ++j) {
      const double k = rule.nodes[static_cast<std::size_t>(j)];
      k_(j) = k;
      const double w = 2.0 * rule.weights[static_cast<std::size_t>(j)] * 0.25 * k * std::exp(-cfg.reg_eps * k * k);
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const auto [m, n] = pairs_[p];
        const int d = m - n;
        const double sign = ((d / 2) % 2 == 0) ? 1.0 : -1.0;
        radial_(static_cast<Eigen::Index>(p), j) = sign * w * detail::homodyne_radial(n, d, k);
      }
    }
    odd_.resize(static_cast<Eigen::Index>(pairs_.size()));
    for (std::size_t p = 0; p < pairs_.size(); ++p) odd_(static_cast<Eigen::Index>(p)) = (pairs_[p][0] - pairs_[p][1]) % 2;

    q_limit_ = std::sqrt(static_cast<double>(dim_)) + 4.0;
    if (tabulate) build_table();
  }

  int dim() const { return dim_; }
  std::size_t pair_count() const { return pairs_.size(); }
  const std::vector<std::array<int, 2>>& pairs() const { return pairs_; }
  int pair_index(int m, int n) const { return index_[static_cast<std::size_t>(m * dim_ + n)]; }

  // Tabulation grid: q_i = q0 + i h for i < table_size().
  bool tabulated() const { return table_.rows() > 0; }
  double table_q0() const { return q0_; }
  double table_step() const { return h_; }
  Eigen::Index table_size() const { return table_.rows(); }
  const double* table_row(Eigen::Index i) const { return table_.data() + i * table_.cols(); }

  // All f_p(q) by direct k-quadrature.
  Eigen::VectorXd patterns_direct(double q) const {
    const Eigen::VectorXd c = (k_ * q).array().cos().matrix();
    const Eigen::VectorXd s = (k_ * q).array().sin().matrix();
    const Eigen::VectorXd fc = radial_ * c;
    const Eigen::VectorXd fs = radial_ * s;
    Eigen::VectorXd f(fc.size());
    for (Eigen::Index p = 0; p < f.size(); ++p) f(p) = odd_(p) ? fs(p) : fc(p);
    return f;
  }

  // All f_p(q), interpolated from the table where available.
  void patterns(double q, double* out) const {
    const double u = (q - q0_) / h_;
    const auto i = static_cast<Eigen::Index>(std::floor(u));
    if (!tabulated() || i < 1 || i + 2 >= table_.rows()) {
      const Eigen::VectorXd f = patterns_direct(q);
      std::copy(f.data(), f.data() + f.size(), out);
      return;
    }
    const auto w = detail::cubic_weights(u - static_cast<double>(i));
    const Eigen::Index np = table_.cols();
    const double* r0 = table_row(i - 1);
    const double* r1 = r0 + np;
    const double* r2 = r1 + np;
    const double* r3 = r2 + np;
    for (Eigen::Index p = 0; p < np; ++p) out[p] = w[0] * r0[p] + w[1] * r1[p] + w[2] * r2[p] + w[3] * r3[p];
  }

  // K(q - q_phi) assembled from pattern values f (length pair_count()).
  Matrix assemble(const double* f, double phi) const {
    Matrix k(dim_, dim_);
    std::vector<cplx> phase(static_cast<std::size_t>(dim_));
    for (int d = 0; d < dim_; ++d) phase[static_cast<std::size_t>(d)] = std::polar(1.0, d * phi);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
      const auto [m, n] = pairs_[p];
      const cplx e = phase[static_cast<std::size_t>(m - n)];
      k(m, n) = e * f[p];
      k(n, m) = std::conj(e) * f[p];
    }
    return k;
  }

  Operator matrix(double q, double phi) const {
    const Eigen::VectorXd f = patterns_direct(q);
    return Operator(assemble(f.data(), phi));
  }

 private:
  void build_table() {
    const auto half_points = static_cast<Eigen::Index>(std::ceil(q_limit_ / h_));
    q0_ = -static_cast<double>(half_points) * h_;
    const Eigen::Index n_points = 2 * half_points + 1;
    table_.resize(n_points, static_cast<Eigen::Index>(pairs_.size()));
    constexpr Eigen::Index chunk = 256;
    for (Eigen::Index start = 0; start < n_points; start += chunk) {
      const Eigen::Index len = std::min(chunk, n_points - start);
      Eigen::RowVectorXd q(len);
      for (Eigen::Index i = 0; i < len; ++i) q(i) = q0_ + static_cast<double>(start + i) * h_;
      const Eigen::MatrixXd arg = k_ * q;
      const Eigen::MatrixXd fc = radial_ * arg.array().cos().matrix();
      const Eigen::MatrixXd fs = radial_ * arg.array().sin().matrix();
      for (Eigen::Index p = 0; p < fc.rows(); ++p)
        table_.block(start, p, len, 1) = (odd_(p) ? fs.row(p) : fc.row(p)).transpose();
    }
  }

  int dim_;
  double h_;
  double q_limit_ = 0.0;
  double q0_ = 0.0;
  std::vector<std::array<int, 2>> pairs_;
  std::vector<int> index_;
  Eigen::VectorXd k_;
  Eigen::MatrixXd radial_;  // pairs x nodes, sign and quadrature weight folded in
  Eigen::VectorXi odd_;
  RowMajor table_;          // points x pairs
};

// Tr[A K(q - q_phi)] as a sparse sum over pattern functions.
class HomodyneObservable {
 public:
  HomodyneObservable(const HomodyneKernel& kernel, const Operator& a) : kernel_(&kernel) {
    if (a.dim() != kernel.dim()) throw DimensionMismatch("observable dimension differs from the kernel dimension");
    for (std::size_t p = 0; p < kernel.pair_count(); ++p) {
      const auto [m, n] = kernel.pairs()[p];
      // Tr[A K] = sum A_nm K_mn; pair (m, n) carries A_nm e^{i d phi} + A_mn e^{-i d phi}
      const cplx fwd = a(n, m);
      const cplx back = (m != n) ? a(m, n) : cplx{0.0, 0.0};
      if (fwd != cplx{0.0, 0.0} || back != cplx{0.0, 0.0}) terms_.push_back({static_cast<int>(p), m - n, fwd, back});
    }
  }

  cplx value(const double* f, double phi) const {
    cplx total{0.0, 0.0};
    for (const auto& t : terms_) {
      const cplx e = std::polar(1.0, t.d * phi);
      total += f[t.pair] * (t.fwd * e + t.back * std::conj(e));
    }
    return total;
  }

  cplx value(double q, double phi, std::vector<double>& scratch) const {
    scratch.resize(kernel_->pair_count());
    kernel_->patterns(q, scratch.data());
    return value(scratch.data(), phi);
  }

 private:
  struct Term {
    int pair;
    int d;
    cplx fwd;
    cplx back;
  };
  const HomodyneKernel* kernel_;
  std::vector<Term> terms_;
};

// Fock-basis matrix of K(q - q_phi) by direct k-quadrature.
inline Operator homodyne_kernel_matrix(double q, double phi, const EstimatorConfig& cfg) {
  return HomodyneKernel(cfg, false).matrix(q, phi);
}

namespace detail {

template <class PhiOf, class QOf>
EstimationResult homodyne_average(const HomodyneKernel& kernel, const Operator& a, std::size_t n, PhiOf phi_of,
                                  QOf q_of) {
  const HomodyneObservable obs(kernel, a);
  const Accumulator acc = partitioned_reduce(n, Accumulator{}, [&](Accumulator& acc, std::size_t b, std::size_t e) {
    std::vector<double> f;
    for (std::size_t i = b; i < e; ++i) acc.add(obs.value(q_of(i), phi_of(i), f));
  });
  return acc.result();
}

}  // namespace detail

inline EstimationResult homodyne_estimate(const Operator& a, const RecordSet& records, const EstimatorConfig& cfg) {
  require(!records.empty(), "homodyne estimate needs at least one record");
  require_family(records, Family::homodyne);
  if (a.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from cfg.dim");
  const HomodyneKernel kernel(cfg);
  return detail::homodyne_average(
      kernel, a, records.size(), [&](std::size_t i) { return records[i].setting[0]; },
      [&](std::size_t i) { return records[i].outcome; });
}

// c_d(q) = sum_{n - m = d} rho_nm psi_n(q) psi_m(q) for d = 0..dim-1, so that
// p(q; phi) = c_0 + 2 Re sum_{d > 0} e^{-i d phi} c_d(q).
inline std::vector<cplx> homodyne_coherence_profile(const Matrix& rho, const std::vector<double>& psi) {
  const auto dim = static_cast<int>(rho.rows());
  std::vector<cplx> c(static_cast<std::size_t>(dim), cplx{0.0, 0.0});
  for (int m = 0; m < dim; ++m)
    for (int n = m; n < dim; ++n)
      c[static_cast<std::size_t>(n - m)] += rho(n, m) * (psi[static_cast<std::size_t>(n)] * psi[static_cast<std::size_t>(m)]);
  return c;
}

// (1/pi) int_0^pi dphi int dq p(q;phi) Tr[A K(q - q_phi)]. After the phase
// average only terms with matching frequency survive, leaving
// sum_{m,n} A_nm int dq f_mn(q) c_{m-n}(q), integrated by the trapezoid rule
// on the tabulation grid.
inline cplx homodyne_exact_average(const Operator& a, const DensityMatrix& rho, const EstimatorConfig& cfg) {
  if (a.dim() != cfg.dim || rho.dim() != cfg.dim) throw DimensionMismatch("operator, state and cfg.dim must agree");
  const HomodyneKernel kernel(cfg);
  cplx total{0.0, 0.0};
  for (Eigen::Index i = 0; i < kernel.table_size(); ++i) {
    const double q = kernel.table_q0() + static_cast<double>(i) * kernel.table_step();
    const double* f = kernel.table_row(i);
    const auto c = homodyne_coherence_profile(rho.matrix(), special::oscillator_wavefunctions(cfg.dim, q));
    cplx v{0.0, 0.0};
    for (std::size_t p = 0; p < kernel.pair_count(); ++p) {
      const auto [m, n] = kernel.pairs()[p];
      const cplx cd = c[static_cast<std::size_t>(m - n)];
      v += f[p] * a(n, m) * cd;
      if (m != n) v += f[p] * a(m, n) * std::conj(cd);
    }
    total += v;
  }
  return total * kernel.table_step();
}

// --- squeezed quadratures -------------------------------------------------

// Columns 0..dim-1 of S(zeta) on the first `rows` Fock levels, computed by
// exponentiating in rows + pad levels.
inline Matrix squeeze_columns(cplx zeta, int dim, int rows, int pad) {
  const Operator s = build_operator({kinds::Squeeze{zeta}, rows + pad});
  return s.matrix().topLeftCorner(rows, dim);
}

// Truncation used for squeezed kernels: dim + cfg.pad levels.
inline int squeezed_dim(const EstimatorConfig& cfg) { return cfg.dim + cfg.pad; }

// S A S^dag on the padded space, with A supported on the first dim levels.
inline Operator squeeze_conjugate(const Operator& a, const SqueezeParams& sq, const EstimatorConfig& cfg) {
  const Matrix sc = squeeze_columns(sq.zeta, a.dim(), squeezed_dim(cfg), cfg.pad);
  return Operator(sc * a.matrix() * sc.adjoint());
}

// S rho S^dag on the padded space.
inline DensityMatrix squeeze_state(const DensityMatrix& rho, const SqueezeParams& sq, const EstimatorConfig& cfg) {
  const Matrix sc = squeeze_columns(sq.zeta, rho.dim(), squeezed_dim(cfg), cfg.pad);
  return DensityMatrix::normalized(sc * rho.matrix() * sc.adjoint());
}

// Records of q_{phi zeta} = S^dag q_phi S. Tr[A K(q - q_{phi zeta})] equals
// Tr[S A S^dag K(q - q_phi)], evaluated on the padded space.
inline EstimationResult squeezed_homodyne_estimate(const Operator& a, const RecordSet& records,
                                                   const SqueezeParams& sq, const EstimatorConfig& cfg) {
  require(!records.empty(), "squeezed homodyne estimate needs at least one record");
  require_family(records, Family::squeezed);
  if (a.dim() != cfg.dim) throw DimensionMismatch("observable dimension differs from cfg.dim");
  for (const auto& r : records)
    require(std::abs(cplx(r.setting[1], r.setting[2]) - sq.zeta) <= 1e-12,
            "records were taken with a different squeezing parameter");
  const EstimatorConfig padded = cfg.with_dim(squeezed_dim(cfg));
  const HomodyneKernel kernel(padded);
  return detail::homodyne_average(
      kernel, squeeze_conjugate(a, sq, cfg), records.size(), [&](std::size_t i) { return records[i].setting[0]; },
      [&](std::size_t i) { return records[i].outcome; });
}

inline cplx squeezed_homodyne_exact_average(const Operator& a, const DensityMatrix& rho, const SqueezeParams& sq,
                                            const EstimatorConfig& cfg) {
  const EstimatorConfig padded = cfg.with_dim(squeezed_dim(cfg));
  return homodyne_exact_average(squeeze_conjugate(a, sq, cfg), squeeze_state(rho, sq, cfg), padded);
}

}  // namespace qtomo
