#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace shellcontact {

/// Symmetric matrix with a fixed half-bandwidth, lower band stored row-wise:
/// entry (i, i - k) lives at data[i * (bw + 1) + k].
class BandedSymmetricMatrix {
 public:
  BandedSymmetricMatrix() = default;
  BandedSymmetricMatrix(std::size_t n, std::size_t half_bandwidth)
      : n_(n), bw_(half_bandwidth), data_(n * (half_bandwidth + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t half_bandwidth() const { return bw_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (i > j ? i - j : j - i) <= bw_;
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return data_[i * (bw_ + 1) + (i - j)];
  }

  /// Adds to the (i, j) entry; the symmetric partner is implied.
  void add(std::size_t i, std::size_t j, double value) {
    if (i < j) std::swap(i, j);
    data_[i * (bw_ + 1) + (i - j)] += value;
  }

  void set(std::size_t i, std::size_t j, double value) {
    if (i < j) std::swap(i, j);
    data_[i * (bw_ + 1) + (i - j)] = value;
  }

  void zero_row_and_column(std::size_t i) {
    const std::size_t lo = i >= bw_ ? i - bw_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + bw_);
    for (std::size_t j = lo; j <= hi; ++j) set(i, j, 0.0);
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = lo; j < i; ++j) {
        const double a = data_[i * (bw_ + 1) + (i - j)];
        y[i] += a * x[j];
        y[j] += a * x[i];
      }
      y[i] += data_[i * (bw_ + 1)] * x[i];
    }
    return y;
  }

  double max_abs_diagonal() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i) m = std::max(m, std::abs(data_[i * (bw_ + 1)]));
    return m;
  }

 private:
  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> data_;
};

/// Band Cholesky factor L (A = L L^T). `factor` fails on a non-positive pivot,
/// which the Newton solver uses as its indefiniteness test.
class BandedCholesky {
 public:
  bool factor(const BandedSymmetricMatrix& a) {
    n_ = a.size();
    bw_ = a.half_bandwidth();
    l_.assign(n_ * (bw_ + 1), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = lo; j <= i; ++j) {
        double sum = a(i, j);
        const std::size_t klo = std::max(lo, j >= bw_ ? j - bw_ : 0);
        for (std::size_t k = klo; k < j; ++k) sum -= at(i, k) * at(j, k);
        if (i == j) {
          if (!(sum > 0.0) || !std::isfinite(sum)) return false;
          at(i, i) = std::sqrt(sum);
        } else {
          at(i, j) = sum / at(j, j);
        }
      }
    }
    return true;
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t k = lo; k < i; ++k) x[i] -= at(i, k) * x[k];
      x[i] /= at(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const std::size_t hi = std::min(n_ - 1, ii + bw_);
      for (std::size_t k = ii + 1; k <= hi; ++k) x[ii] -= at(k, ii) * x[k];
      x[ii] /= at(ii, ii);
    }
    return x;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return l_[i * (bw_ + 1) + (i - j)]; }
  double at(std::size_t i, std::size_t j) const { return l_[i * (bw_ + 1) + (i - j)]; }

  std::size_t n_ = 0;
  std::size_t bw_ = 0;
  std::vector<double> l_;
};

}  // namespace shellcontact
