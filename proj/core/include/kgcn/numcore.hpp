#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kgcn/error.hpp"

namespace kgcn {

/// Dense row-major matrix of 64-bit floats. Everything in the library that is
/// matrix-valued (signals, adjacencies, filter banks, classifier weights)
/// lives in this type. Instances handed out by library operations contain
/// only finite entries; operations that could produce NaN/Inf validate their
/// result before returning it.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool all_finite() const noexcept;
  /// Throws numcore/non-finite when any entry is NaN or Inf.
  void ensure_finite(const char* context) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// PCG32. The stream is a pure function of (seed, stream) and of nothing
/// else, so identical seeds reproduce identical results on any platform.
/// Not shareable across threads; parallel work takes independently seeded
/// instances.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Box-Muller; consumes two uniforms and caches the paired variate.
  double normal(double mean = 0.0, double stddev = 1.0);
  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint32_t below(std::uint32_t bound);

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = below(static_cast<std::uint32_t>(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable 64-bit mix for deriving sub-stream seeds, e.g. per-epoch shuffles.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// log(sum_i exp(x_i)) via max-shift; exact for a singleton.
/// Errors: numcore/empty-reduction.
double log_sum_exp(std::span<const double> xs);

struct SoftmaxResult {
  double loss = 0.0;
  std::vector<double> probs;
};

/// Cross-entropy of max-shifted softmax probabilities against `label`.
/// Errors: numcore/bad-label.
SoftmaxResult softmax_cross_entropy(std::span<const double> logits,
                                    std::size_t label);

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h; the gradient
/// oracle every analytic gradient in the repo is tested against.
/// Errors: numcore/non-finite-objective.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double h = 1e-5);

/// |a-b| / max(1e-8, |a|+|b|); the relative-error metric of all gradient
/// checks, robust near zero.
double rel_error(double a, double b);

}  // namespace kgcn
