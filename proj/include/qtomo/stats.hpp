#pragma once

// Single-pass mean / standard-error accumulation with deterministic
// partitioned reduction.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"
#include "qtomo/special.hpp"

namespace qtomo {

struct EstimationResult {
  cplx mean{0.0, 0.0};
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::vector<std::string> warnings;
};

// Count / mean / M2 for complex samples, with M2 = sum |x - mean|^2 so the
// variance is the sum of the real- and imaginary-part variances.
class Accumulator {
 public:
  void add(cplx x) {
    ++n_;
    const cplx delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += std::real(std::conj(delta) * (x - mean_));
  }

  // Chan et al. pairwise combination.
  void merge(const Accumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const cplx delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + std::norm(delta) * na * nb / n;
    n_ += other.n_;
  }

  std::size_t count() const { return n_; }
  cplx mean() const { return mean_; }
  double m2() const { return m2_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

  EstimationResult result() const { return {mean_, std_error(), n_, {}}; }

 private:
  std::size_t n_ = 0;
  cplx mean_{0.0, 0.0};
  double m2_ = 0.0;
};

// Elementwise Accumulator over dim x dim matrices.
class MatrixAccumulator {
 public:
  explicit MatrixAccumulator(int dim) : mean_(Eigen::MatrixXcd::Zero(dim, dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::MatrixXcd& x) {
    ++n_;
    const Eigen::MatrixXcd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += (delta.conjugate().cwiseProduct(x - mean_)).real();
  }

  void merge(const MatrixAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const Eigen::MatrixXcd delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + delta.cwiseAbs2() * (na * nb / n);
    n_ += other.n_;
  }

  std::size_t count() const { return n_; }
  const Eigen::MatrixXcd& mean() const { return mean_; }
  Eigen::MatrixXd std_error() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(mean_.rows(), mean_.cols());
    const double n = static_cast<double>(n_);
    return (m2_ / ((n - 1.0) * n)).cwiseSqrt();
  }

 private:
  std::size_t n_ = 0;
  Eigen::MatrixXcd mean_;
  Eigen::MatrixXd m2_;
};

// Records are reduced in fixed-size partitions merged in index order, so
// results do not depend on the worker count.
inline constexpr std::size_t kPartitionSize = 8192;

inline std::size_t partition_count(std::size_t n) { return (n + kPartitionSize - 1) / kPartitionSize; }

// fill(acc, begin, end) adds items [begin, end) to acc.
template <class Acc, class Fill>
Acc partitioned_reduce(std::size_t n, const Acc& empty, Fill&& fill) {
  const std::size_t parts = partition_count(n);
  std::vector<Acc> partial(parts, empty);
  parallel_for(parts, [&](std::size_t p) {
    const std::size_t begin = p * kPartitionSize;
    fill(partial[p], begin, std::min(n, begin + kPartitionSize));
  });
  Acc total = empty;
  for (const auto& a : partial) total.merge(a);
  return total;
}

// Mean of value(i) for i in [0, n).
template <class Value>
EstimationResult estimate_mean(std::size_t n, Value&& value) {
  require(n >= 1, "no samples to average");
  const Accumulator acc = partitioned_reduce(n, Accumulator{}, [&](Accumulator& a, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) a.add(value(i));
  });
  return acc.result();
}

}  // namespace qtomo
