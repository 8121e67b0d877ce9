#pragma once

// Dense operator algebra on finite (or Fock-truncated) Hilbert spaces and
// builders for the operators and states used by the estimators.
//
// Oscillator operators live in dim = n_max + 1 with basis |0>..|n_max>.
// Spin-s operators live in dim = 2s + 1 with basis index i <-> m = s - i,
// so index 0 is the "up" state m = +s.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>

#include "qtomo/errors.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/special.hpp"

namespace qtomo {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Vec3 = std::array<double, 3>;

constexpr cplx kI{0.0, 1.0};

// Dense square complex matrix with finite entries.
class Operator {
 public:
  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw DimensionMismatch("operator must be a non-empty square matrix");
    if (!m_.allFinite()) throw PreconditionError("operator has non-finite entries");
  }

  static Operator zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
  static Operator identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  cplx trace() const { return m_.trace(); }
  double hs_norm() const { return m_.norm(); }

  bool is_hermitian(double tol) const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol; }

  friend Operator operator+(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    check_same(a, b);
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator*(const Operator& a, cplx s) { return Operator(s * a.m_); }

  static void check_same(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim())
      throw DimensionMismatch("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()));
  }

 private:
  Matrix m_;
};

// Tr[A^dag B], the Hilbert-Schmidt (Liouville-space) scalar product.
inline cplx hs_inner(const Operator& a, const Operator& b) {
  Operator::check_same(a, b);
  return (a.matrix().conjugate().cwiseProduct(b.matrix())).sum();
}

// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kEigenTol = -1e-10;

  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    if (!op_.is_hermitian(kHermitianTol)) throw PreconditionError("density matrix is not Hermitian");
    if (std::abs(op_.trace() - cplx{1.0, 0.0}) > kTraceTol)
      throw PreconditionError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kEigenTol)
      throw PreconditionError("density matrix has a negative eigenvalue");
  }

  // Symmetrizes and renormalizes before validating; for matrices that are
  // physical up to roundoff.
  static DensityMatrix normalized(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    h /= h.trace().real();
    return DensityMatrix(Operator(std::move(h)));
  }

  int dim() const { return op_.dim(); }
  const Operator& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  double purity() const { return (op_.matrix() * op_.matrix()).trace().real(); }

  cplx expectation(const Operator& a) const {
    Operator::check_same(a, op_);
    return (a.matrix() * op_.matrix()).trace();
  }

 private:
  Operator op_;
};

// Spin quantum number stored as 2s.
struct HalfInteger {
  int twice = 0;
  double value() const { return 0.5 * twice; }
  friend bool operator==(HalfInteger, HalfInteger) = default;
};

inline HalfInteger half_integer_from(double v) {
  const double t = 2.0 * v;
  const long r = std::lround(t);
  require(std::abs(t - static_cast<double>(r)) < 1e-9, "value is not a half-integer");
  return HalfInteger{static_cast<int>(r)};
}

inline int spin_dim(HalfInteger s) { return s.twice + 1; }

enum class Axis { x = 0, y = 1, z = 2 };

// Operator kinds accepted by build_operator.
namespace kinds {
struct Annihilation {};
struct Number {};
struct Parity {};
struct Displacement {
  cplx alpha;
};
struct Squeeze {
  cplx zeta;
};
struct SpinComponent {
  HalfInteger s;
  Vec3 n;
};
struct Pauli {
  Axis axis;
};
struct LoweringEMinus {};
struct RaisingEPlus {};
struct KerrShift {
  double psi;
};
struct MatrixUnit {
  int row;
  int col;
};
struct Identity {};
}  // namespace kinds

using OperatorKind =
    std::variant<kinds::Annihilation, kinds::Number, kinds::Parity, kinds::Displacement, kinds::Squeeze,
                 kinds::SpinComponent, kinds::Pauli, kinds::LoweringEMinus, kinds::RaisingEPlus,
                 kinds::KerrShift, kinds::MatrixUnit, kinds::Identity>;

struct OperatorSpec {
  OperatorKind kind;
  int dim = 1;
};

// exp(i t H) for Hermitian H, via eigendecomposition.
inline Operator hermitian_evolution(const Operator& h, double t) {
  const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
  if (!h.is_hermitian(1e-10 * scale)) throw PreconditionError("hermitian_evolution: generator is not Hermitian");
  const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector phases = (kI * t * es.eigenvalues().cast<cplx>()).array().exp().matrix();
  return Operator(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
}

namespace detail {

inline Matrix annihilation(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline std::array<Matrix, 3> spin_matrices(HalfInteger s) {
  const int d = spin_dim(s);
  const double sv = s.value();
  Matrix sp = Matrix::Zero(d, d);  // S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
  Matrix sz = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = sv - i;
    sz(i, i) = m;
    if (i > 0) sp(i - 1, i) = std::sqrt(sv * (sv + 1.0) - m * (m + 1.0));
  }
  Matrix sx = 0.5 * (sp + sp.adjoint());
  Matrix sy = (sp - sp.adjoint()) / (2.0 * kI);
  return {sx, sy, sz};
}

inline void require_unit(const Vec3& n) {
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  require(std::abs(norm - 1.0) <= 1e-12, "direction must be a unit vector");
}

template <class>
inline constexpr bool always_false = false;

}  // namespace detail

// Squeeze generator convention: S(zeta) = exp[(xi a^dag^2 - conj(xi) a^2)/2]
// with xi = |zeta| exp(2i arg zeta), so that S^dag a S = mu a + nu a^dag with
// mu = cosh|zeta| and nu = sinh|zeta| exp(2i arg zeta).
inline cplx squeeze_xi(cplx zeta) {
  const double r = std::abs(zeta);
  if (r == 0.0) return {0.0, 0.0};
  return std::polar(r, 2.0 * std::arg(zeta));
}

inline Operator build_operator(const OperatorSpec& spec) {
  const int dim = spec.dim;
  require(dim >= 1, "dimension must be positive");
  return std::visit(
      [dim](const auto& k) -> Operator {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, kinds::Annihilation>) {
          return Operator(detail::annihilation(dim));
        } else if constexpr (std::is_same_v<K, kinds::Number>) {
          Matrix n = Matrix::Zero(dim, dim);
          for (int i = 0; i < dim; ++i) n(i, i) = i;
          return Operator(n);
        } else if constexpr (std::is_same_v<K, kinds::Parity>) {
          Matrix p = Matrix::Zero(dim, dim);
          for (int i = 0; i < dim; ++i) p(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
          return Operator(p);
        } else if constexpr (std::is_same_v<K, kinds::Displacement>) {
          const Matrix a = detail::annihilation(dim);
          const Matrix gen = k.alpha * a.adjoint() - std::conj(k.alpha) * a;  // anti-Hermitian
          return hermitian_evolution(Operator(-kI * gen), 1.0);
        } else if constexpr (std::is_same_v<K, kinds::Squeeze>) {
          const Matrix a = detail::annihilation(dim);
          const cplx xi = squeeze_xi(k.zeta);
          const Matrix gen = 0.5 * (xi * a.adjoint() * a.adjoint() - std::conj(xi) * a * a);
          return hermitian_evolution(Operator(-kI * gen), 1.0);
        } else if constexpr (std::is_same_v<K, kinds::SpinComponent>) {
          require(spin_dim(k.s) == dim, "spin component requires dim = 2s + 1");
          detail::require_unit(k.n);
          const auto s = detail::spin_matrices(k.s);
          return Operator(k.n[0] * s[0] + k.n[1] * s[1] + k.n[2] * s[2]);
        } else if constexpr (std::is_same_v<K, kinds::Pauli>) {
          require(dim == 2, "Pauli matrices require dim = 2");
          const auto s = detail::spin_matrices(HalfInteger{1});
          return Operator(2.0 * s[static_cast<int>(k.axis)]);
        } else if constexpr (std::is_same_v<K, kinds::LoweringEMinus>) {
          Matrix e = Matrix::Zero(dim, dim);  // sum_n |n><n+1|
          for (int n = 0; n + 1 < dim; ++n) e(n, n + 1) = 1.0;
          return Operator(e);
        } else if constexpr (std::is_same_v<K, kinds::RaisingEPlus>) {
          Matrix e = Matrix::Zero(dim, dim);  // sum_n |n+1><n|
          for (int n = 0; n + 1 < dim; ++n) e(n + 1, n) = 1.0;
          return Operator(e);
        } else if constexpr (std::is_same_v<K, kinds::KerrShift>) {
          Matrix v = Matrix::Zero(dim, dim);  // exp[i (a^dag a)^2 psi]
          for (int n = 0; n < dim; ++n) v(n, n) = std::polar(1.0, static_cast<double>(n) * n * k.psi);
          return Operator(v);
        } else if constexpr (std::is_same_v<K, kinds::MatrixUnit>) {
          require(k.row >= 0 && k.row < dim && k.col >= 0 && k.col < dim, "matrix unit index out of range");
          Matrix e = Matrix::Zero(dim, dim);
          e(k.row, k.col) = 1.0;
          return Operator(e);
        } else if constexpr (std::is_same_v<K, kinds::Identity>) {
          return Operator::identity(dim);
        } else {
          static_assert(detail::always_false<K>, "unhandled operator kind");
        }
      },
      spec.kind);
}

// q_phi = (a e^{-i phi} + a^dag e^{i phi}) / 2.
inline Operator quadrature(double phi, int dim) {
  const Matrix a = detail::annihilation(dim);
  return Operator(0.5 * (a * std::polar(1.0, -phi) + a.adjoint() * std::polar(1.0, phi)));
}

inline Operator pauli(Axis axis) { return build_operator({kinds::Pauli{axis}, 2}); }

inline Operator spin_component(HalfInteger s, const Vec3& n) {
  return build_operator({kinds::SpinComponent{s, n}, spin_dim(s)});
}

inline Vec3 direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Eigenbasis of S.n; column j is |m_j, n> with m_j = -s + j (ascending).
inline Matrix spin_eigenbasis(HalfInteger s, const Vec3& n) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(spin_component(s, n).matrix());
  return es.eigenvectors();
}

// State kinds accepted by make_state.
namespace states {
struct Fock {
  int n;
};
struct Coherent {
  cplx beta;
};
struct SqueezedVacuum {
  cplx zeta;
};
struct Thermal {
  double mean_n;
};
struct RandomMixed {
  std::uint64_t seed;
};
struct SpinPure {
  HalfInteger s;
  Vec3 n;
};
}  // namespace states

using StateKind = std::variant<states::Fock, states::Coherent, states::SqueezedVacuum, states::Thermal,
                               states::RandomMixed, states::SpinPure>;

struct StateSpec {
  StateKind kind;
  int dim = 1;
};

// Largest truncated-away population accepted for squeezed and thermal states.
inline constexpr double kStateTailTolerance = 1e-8;

inline DensityMatrix pure_state(const Vector& psi) {
  const Vector v = psi / psi.norm();
  return DensityMatrix::normalized(v * v.adjoint());
}

// Coherent |beta> is faithful in dim = n_max + 1 when |beta|^2 + 4|beta| <= n_max.
inline bool coherent_is_faithful(cplx beta, int dim) {
  const double b = std::abs(beta);
  return b * b + 4.0 * b <= dim - 1 + 1e-12;
}

inline DensityMatrix make_state(const StateSpec& spec) {
  const int dim = spec.dim;
  require(dim >= 1, "dimension must be positive");
  return std::visit(
      [dim](const auto& k) -> DensityMatrix {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, states::Fock>) {
          require(k.n >= 0 && k.n < dim, "Fock index must satisfy 0 <= n < dim");
          Vector v = Vector::Zero(dim);
          v(k.n) = 1.0;
          return pure_state(v);
        } else if constexpr (std::is_same_v<K, states::Coherent>) {
          if (!coherent_is_faithful(k.beta, dim))
            throw PreconditionError("coherent state outside the truncation regime |beta|^2 + 4|beta| <= n_max");
          Vector v(dim);
          const double x = std::norm(k.beta);
          for (int n = 0; n < dim; ++n)
            v(n) = std::exp(-0.5 * x - 0.5 * special::log_factorial(n)) * special::int_power(k.beta, n);
          return pure_state(v);
        } else if constexpr (std::is_same_v<K, states::SqueezedVacuum>) {
          // S(zeta)|0> = cosh(r)^{-1/2} sum_n (e^{i theta} tanh r)^n sqrt((2n)!)/(2^n n!) |2n>
          const double r = std::abs(k.zeta);
          const cplx ratio = std::polar(std::tanh(r), 2.0 * std::arg(k.zeta));
          Vector v = Vector::Zero(dim);
          double kept = 0.0;
          for (int n = 0; 2 * n < dim; ++n) {
            const double mag = std::exp(0.5 * special::log_factorial(2 * n) - n * std::log(2.0) -
                                        special::log_factorial(n));
            v(2 * n) = special::int_power(ratio, n) * mag / std::sqrt(std::cosh(r));
            kept += std::norm(v(2 * n));
          }
          if (1.0 - kept > kStateTailTolerance)
            throw PreconditionError("squeezed vacuum leaks more than 1e-8 population beyond n_max");
          return pure_state(v);
        } else if constexpr (std::is_same_v<K, states::Thermal>) {
          require(k.mean_n >= 0.0, "thermal mean photon number must be non-negative");
          const double q = k.mean_n / (k.mean_n + 1.0);
          if (std::pow(q, dim) > kStateTailTolerance)
            throw PreconditionError("thermal state leaks more than 1e-8 population beyond n_max");
          Matrix m = Matrix::Zero(dim, dim);
          for (int n = 0; n < dim; ++n) m(n, n) = std::pow(q, n) / (k.mean_n + 1.0);
          return DensityMatrix::normalized(m);
        } else if constexpr (std::is_same_v<K, states::RandomMixed>) {
          // G G^dag / Tr[G G^dag] with G standard complex normal.
          RngStream rng(k.seed, 0);
          Matrix g(dim, dim);
          for (int c = 0; c < dim; ++c)
            for (int r = 0; r < dim; ++r) g(r, c) = rng.complex_normal() / std::numbers::sqrt2;
          return DensityMatrix::normalized(g * g.adjoint());
        } else if constexpr (std::is_same_v<K, states::SpinPure>) {
          require(spin_dim(k.s) == dim, "spin state requires dim = 2s + 1");
          const Matrix basis = spin_eigenbasis(k.s, k.n);
          return pure_state(basis.col(dim - 1));  // maximal eigenvalue m = s
        } else {
          static_assert(detail::always_false<K>, "unhandled state kind");
        }
      },
      spec.kind);
}

}  // namespace qtomo
