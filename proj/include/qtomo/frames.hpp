#pragma once

// Liouville-space view of operator families. An operator A on a
// d-dimensional space is the column-major vector vec(A) of length d^2, and
// <A|B> = vec(A)^dag vec(B) = Tr[A^dag B].
//
// A SpanningSet {(x, w_x, C_x)} stands for the measure integral over x as the
// weighted sum over its elements; a DualSet carries the B_x aligned with it.
// The pair resolves the identity when
//   sum_x w_x |C_x><B_x| = 1   (superoperator on the d^2-dimensional space),
// i.e. A = sum_x w_x Tr[B_x^dag A] C_x for every A.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtomo/oscore.hpp"

namespace qtomo {

struct SettingLabel {
  std::string quorum;
  std::vector<double> coords;
  friend bool operator==(const SettingLabel&, const SettingLabel&) = default;
};

struct FrameElement {
  SettingLabel label;
  double weight;
  Operator op;
};

namespace detail {
inline void validate_frame(int dim, const std::vector<FrameElement>& elements) {
  require(dim >= 1, "frame dimension must be positive");
  require(!elements.empty(), "a spanning set needs at least one element");
  for (const auto& e : elements) {
    require(e.weight > 0.0 && std::isfinite(e.weight), "frame weights must be positive");
    if (e.op.dim() != dim) throw DimensionMismatch("frame element dimension differs from the set dimension");
  }
}
}  // namespace detail

class SpanningSet {
 public:
  SpanningSet(int dim, std::vector<FrameElement> elements) : dim_(dim), elements_(std::move(elements)) {
    detail::validate_frame(dim_, elements_);
  }

  int dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<FrameElement>& elements() const { return elements_; }
  const FrameElement& operator[](std::size_t i) const { return elements_[i]; }

 private:
  int dim_;
  std::vector<FrameElement> elements_;
};

// Dual operators B_x aligned one-to-one with a SpanningSet: same labels, same
// order, same weights.
class DualSet {
 public:
  DualSet(const SpanningSet& partner, std::vector<Operator> duals) : dim_(partner.dim()) {
    if (duals.size() != partner.size()) throw DimensionMismatch("dual set size differs from its spanning set");
    elements_.reserve(duals.size());
    for (std::size_t i = 0; i < duals.size(); ++i)
      elements_.push_back({partner[i].label, partner[i].weight, std::move(duals[i])});
    detail::validate_frame(dim_, elements_);
  }

  DualSet(int dim, std::vector<FrameElement> elements) : dim_(dim), elements_(std::move(elements)) {
    detail::validate_frame(dim_, elements_);
  }

  // The self-dual choice B_x = C_x.
  static DualSet self_dual(const SpanningSet& s) { return DualSet(s.dim(), s.elements()); }

  int dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<FrameElement>& elements() const { return elements_; }
  const FrameElement& operator[](std::size_t i) const { return elements_[i]; }

  SpanningSet as_spanning_set() const { return SpanningSet(dim_, elements_); }

 private:
  int dim_;
  std::vector<FrameElement> elements_;
};

inline void check_paired(const SpanningSet& s, const DualSet& b) {
  if (s.dim() != b.dim()) throw DimensionMismatch("spanning and dual sets have different dimensions");
  if (s.size() != b.size()) throw DimensionMismatch("spanning and dual sets have different sizes");
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(s[i].label == b[i].label, "dual set labels are not aligned with the spanning set");
    require(s[i].weight == b[i].weight, "dual set weights differ from the spanning set");
  }
}

inline Vector vec(const Operator& a) { return Eigen::Map<const Vector>(a.matrix().data(), a.dim() * a.dim()); }

inline Operator unvec(const Vector& v, int dim) {
  require(v.size() == static_cast<Eigen::Index>(dim) * dim, "Liouville vector has wrong length");
  return Operator(Eigen::Map<const Matrix>(v.data(), dim, dim));
}

// d^2 x |X| matrix whose columns are vec(C_x).
template <class Set>
Matrix liouville_columns(const Set& s) {
  const int d2 = s.dim() * s.dim();
  Matrix cols(d2, static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) cols.col(static_cast<Eigen::Index>(i)) = vec(s[i].op);
  return cols;
}

template <class Set>
Eigen::VectorXd weights_of(const Set& s) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) w(static_cast<Eigen::Index>(i)) = s[i].weight;
  return w;
}

// sum_x w_x |C_x><B_x| as a d^2 x d^2 matrix.
inline Matrix resolution_superoperator(const SpanningSet& s, const DualSet& b) {
  check_paired(s, b);
  const Matrix c = liouville_columns(s);
  const Matrix bc = liouville_columns(b);
  return c * weights_of(s).cast<cplx>().asDiagonal() * bc.adjoint();
}

// sum_x w_x Tr[B_x^dag A] C_x
inline Operator reconstruct(const SpanningSet& s, const DualSet& b, const Operator& a) {
  Operator::check_same(a, s[0].op);
  return unvec(resolution_superoperator(s, b) * vec(a), s.dim());
}

struct BiorthogonalityReport {
  double max_violation = 0.0;
  bool pass = false;
};

// Max |entry - identity| of the resolution superoperator.
inline BiorthogonalityReport check_biorthogonality(const SpanningSet& s, const DualSet& b, double tol) {
  const Matrix sup = resolution_superoperator(s, b);
  const double v = (sup - Matrix::Identity(sup.rows(), sup.cols())).cwiseAbs().maxCoeff();
  return {v, v <= tol};
}

struct IrreducibilityReport {
  int rank = 0;
  bool irreducible = false;
};

// Numerical rank of the vectorized family. Columns are normalized first so
// the result does not depend on individual element scales.
inline IrreducibilityReport irreducibility_rank(const SpanningSet& s, double rel_tol = 1e-10) {
  Matrix cols = liouville_columns(s);
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double n = cols.col(j).norm();
    if (n > 0.0) cols.col(j) /= n;
  }
  Eigen::JacobiSVD<Matrix> svd(cols);
  const auto& sv = svd.singularValues();
  int rank = 0;
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top && top > 0.0) ++rank;
  const int d2 = s.dim() * s.dim();
  return {rank, rank == d2};
}

// Reproducing kernel K_xy = Tr[B_x^dag C_y] expected by the trace condition.
struct ReproducingKernelMatrix {
  Matrix k;

  // delta_xy / w_x, the default for discrete orthogonal families.
  static ReproducingKernelMatrix orthogonal_default(const SpanningSet& s) {
    return {weights_of(s).cwiseInverse().cast<cplx>().asDiagonal()};
  }
};

struct TraceConditionReport {
  double trace_violation = 0.0;         // max |Tr[B_x^dag C_y] - K_xy|
  double reproducing_violation_b = 0.0;  // max |sum_x w_x B_x conj(K_yx) - B_y|
  double reproducing_violation_c = 0.0;  // max |sum_x w_x C_x K_xy - C_y|
  int rank = 0;
  bool irreducible = false;
  bool trace_condition_holds = false;
  bool pass = false;
  std::string verdict;
};

inline TraceConditionReport check_trace_condition(const SpanningSet& s, const DualSet& b,
                                                  const ReproducingKernelMatrix& kernel, double tol) {
  check_paired(s, b);
  const auto n = static_cast<Eigen::Index>(s.size());
  if (kernel.k.rows() != n || kernel.k.cols() != n)
    throw DimensionMismatch("reproducing kernel must be |X| x |X|");
  const Matrix c = liouville_columns(s);
  const Matrix bc = liouville_columns(b);
  const Vector w = weights_of(s).cast<cplx>();

  TraceConditionReport r;
  const Matrix gram = bc.adjoint() * c;  // Tr[B_x^dag C_y]
  r.trace_violation = (gram - kernel.k).cwiseAbs().maxCoeff();
  r.reproducing_violation_c = (c * w.asDiagonal() * kernel.k - c).cwiseAbs().maxCoeff();
  r.reproducing_violation_b = (bc * w.asDiagonal() * kernel.k.adjoint() - bc).cwiseAbs().maxCoeff();
  const auto irr = irreducibility_rank(s);
  r.rank = irr.rank;
  r.irreducible = irr.irreducible;
  r.trace_condition_holds =
      r.trace_violation <= tol && r.reproducing_violation_b <= tol && r.reproducing_violation_c <= tol;
  r.pass = r.trace_condition_holds && r.irreducible;
  if (r.pass)
    r.verdict = "pass";
  else if (r.trace_condition_holds)
    r.verdict = "trace condition holds but set reducible";
  else
    r.verdict = "trace condition violated";
  return r;
}

// True unless O is orthogonal to every C_x and yet nonzero, in which case O
// witnesses that the set is not a quorum.
inline bool null_operator_test(const SpanningSet& s, const Operator& o, double tol) {
  Operator::check_same(o, s[0].op);
  const double norm = o.hs_norm();
  if (norm <= tol) return true;
  double max_overlap = 0.0;
  for (const auto& e : s.elements())
    max_overlap = std::max(max_overlap, std::abs(hs_inner(e.op, o)) / std::max(e.op.hs_norm(), 1e-300));
  if (max_overlap > tol * norm) return true;  // not orthogonal: nothing to refute
  return false;
}

// An operator orthogonal to every C_x, if the set is reducible.
inline std::optional<Operator> orthogonal_witness(const SpanningSet& s, double rel_tol = 1e-10) {
  const Matrix cols = liouville_columns(s);
  Eigen::JacobiSVD<Matrix> svd(cols.adjoint(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * top) ++rank;
  const int d2 = s.dim() * s.dim();
  if (rank >= d2) return std::nullopt;
  return unvec(svd.matrixV().col(rank), s.dim());
}

// d^2 x d^2 matrix of a linear map on operators, in the vec() convention.
inline Matrix superoperator_of(const std::function<Operator(const Operator&)>& map, int dim) {
  const int d2 = dim * dim;
  Matrix l(d2, d2);
  for (int j = 0; j < d2; ++j) {
    Vector e = Vector::Zero(d2);
    e(j) = 1.0;
    const Operator image = map(unvec(e, dim));
    if (image.dim() != dim) throw DimensionMismatch("superoperator changes the dimension");
    l.col(j) = vec(image);
  }
  return l;
}

// <B_x| L |C_y> for all x, y.
inline Matrix superop_matrix_elements(const Matrix& l, const SpanningSet& s, const DualSet& b) {
  check_paired(s, b);
  const int d2 = s.dim() * s.dim();
  if (l.rows() != d2 || l.cols() != d2) throw DimensionMismatch("superoperator must be d^2 x d^2");
  return liouville_columns(b).adjoint() * l * liouville_columns(s);
}

// sum_{x,y} w_x w_y |C_x> <B_x|L|C_y> <B_y|
inline Matrix superop_reassemble(const Matrix& coefficients, const SpanningSet& s, const DualSet& b) {
  check_paired(s, b);
  const auto n = static_cast<Eigen::Index>(s.size());
  if (coefficients.rows() != n || coefficients.cols() != n)
    throw DimensionMismatch("coefficient table must be |X| x |X|");
  const Vector w = weights_of(s).cast<cplx>();
  return liouville_columns(s) * w.asDiagonal() * coefficients * w.asDiagonal() * liouville_columns(b).adjoint();
}

}  // namespace qtomo
