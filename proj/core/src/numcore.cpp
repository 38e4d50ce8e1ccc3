#include "kgcn/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kgcn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorKind::Data, "numcore/shape-mismatch",
                "matrix data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
  ensure_finite("matrix construction");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

void Matrix::ensure_finite(const char* context) const {
  if (!all_finite()) {
    throw Error(ErrorKind::Numeric, "numcore/non-finite",
                std::string("non-finite matrix entry after ") + context);
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::Data, "numcore/shape-mismatch",
                "matmul " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " * " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out(i, j) += aik * b(k, j);
      }
    }
  }
  out.ensure_finite("matmul");
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(j, i) = m(i, j);
    }
  }
  return out;
}

namespace {
constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ULL;
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  inc_ = (stream << 1u) | 1u;
  state_ = 0u;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Rng::next_u32() {
  std::uint64_t old = state_;
  state_ = old * kPcgMultiplier + inc_;
  auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t Rng::next_u64() {
  std::uint64_t hi = next_u32();
  std::uint64_t lo = next_u32();
  return (hi << 32u) | lo;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  // u1 in (0, 1] keeps the log finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

std::uint32_t Rng::below(std::uint32_t bound) {
  if (bound == 0) {
    throw Error(ErrorKind::Data, "numcore/bad-bound", "below(0) is undefined");
  }
  std::uint32_t threshold = (-bound) % bound;
  for (;;) {
    std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) {
    throw Error(ErrorKind::Data, "numcore/empty-reduction",
                "log_sum_exp of an empty sequence");
  }
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) {
    throw Error(ErrorKind::Numeric, "numcore/non-finite",
                "non-finite input to log_sum_exp");
  }
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

SoftmaxResult softmax_cross_entropy(std::span<const double> logits,
                                    std::size_t label) {
  if (label >= logits.size()) {
    throw Error(ErrorKind::Data, "numcore/bad-label",
                "label " + std::to_string(label) + " out of range for " +
                    std::to_string(logits.size()) + " classes");
  }
  double lse = log_sum_exp(logits);
  SoftmaxResult out;
  out.probs.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out.probs[c] = std::exp(logits[c] - lse);
  }
  out.loss = lse - logits[label];
  return out;
}

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double h) {
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    double fp = f(point);
    point[i] = saved - h;
    double fm = f(point);
    point[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error(ErrorKind::Numeric, "numcore/non-finite-objective",
                  "objective non-finite at perturbed coordinate " +
                      std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

}  // namespace kgcn
