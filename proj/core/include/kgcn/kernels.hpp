#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgcn/numcore.hpp"

namespace kgcn {

enum class KernelKind {
  Linear,
  Polynomial,
  Sigmoid,
  Tanh,
  Gaussian,
  Laplacian,
  Power,
  InverseMultiquadric,
  Log,
  Cauchy,
  HistogramIntersection,
};

inline constexpr std::array<KernelKind, 11> kAllKernelKinds = {
    KernelKind::Linear,        KernelKind::Polynomial,
    KernelKind::Sigmoid,       KernelKind::Tanh,
    KernelKind::Gaussian,      KernelKind::Laplacian,
    KernelKind::Power,         KernelKind::InverseMultiquadric,
    KernelKind::Log,           KernelKind::Cauchy,
    KernelKind::HistogramIntersection,
};

std::string_view kernel_name(KernelKind kind);
std::optional<KernelKind> kernel_from_name(std::string_view name);

/// Which arguments the closed form consumes: an inner product <u,v> or the
/// distance ||u-v||; histogram intersection is its own family.
bool is_distance_kernel(KernelKind kind);
bool is_inner_product_kernel(KernelKind kind);

/// Kernel family plus hyperparameters. Only the fields relevant to `kind`
/// are ever read:
///   beta   — Gaussian/Laplacian/Sigmoid sharpness, HI softness
///   p      — Polynomial/Power/Log degree
///   a, b   — Tanh affine map; b doubles as the InverseMultiquadric offset
///   sigma2 — Cauchy width
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double beta = 1.0;
  int p = 2;
  double a = 1.0;
  double b = 0.0;
  double sigma2 = 1.0;

  /// Per-kind neutral defaults: beta=1 except HI's 50, b=0 except IMQ's 1.
  static KernelSpec defaults(KernelKind kind);

  /// Errors kernels/bad-spec when a relevant hyperparameter violates its
  /// positivity or integrality constraint.
  void validate() const;
};

/// One scalar activation from the neural-consistency table: a named closed
/// form with its hyperparameters baked in.
struct ScalarFn {
  enum class Form {
    Identity,        // t
    Exp,             // exp(t)
    NegExp,          // exp(-t)
    LogSquared,      // log(t)^2
    ExpNegBeta,      // exp(-beta t)
    ExpNegBetaSqrt,  // exp(-beta sqrt(t))
    NegPowHalfP,     // -t^(p/2)
    InvSqrtShift,    // 1/sqrt(t + b^2)
    NegLogPowHalfP,  // -log(t^(p/2) + 1)
    CauchyResponse,  // 1/(1 + t/sigma^2)
    Logistic,        // 1/(1 + exp(-beta t))
    TanhAffine,      // tanh(a t + b)
    PowP,            // t^p
    DoubleExp,       // exp(exp(beta (1 - t)))
    HiUnlog,         // -(1/beta) log(log(t)) + 1
  };

  Form form = Form::Identity;
  double beta = 0.0;
  int p = 0;
  double a = 0.0;
  double b = 0.0;
  double sigma2 = 0.0;

  double operator()(double t) const;
  std::string describe() const;
};

/// The (sigma1, sigma2, sigma3, sigma4) decomposition of a kernel into
/// standard neural units: kappa(u,v) = sigma3(sum_d sigma2(sigma1(u_d) *
/// sigma4(v_d))).
struct SigmaQuad {
  ScalarFn s1, s2, s3, s4;
};

/// The table row for `spec`: exact for every kind; for histogram
/// intersection the composition approaches the closed form as beta grows.
SigmaQuad sigma_quad(const KernelSpec& spec);

/// Closed-form kernel value. Errors: kernels/dim-mismatch on length
/// disagreement; kernels/range-violation when an HI input leaves [0,1].
double kernel_eval(const KernelSpec& spec, std::span<const double> u,
                   std::span<const double> v);

/// The sigma3(sum sigma2(sigma1 * sigma4)) realization. Matches kernel_eval
/// to rounding for every kind except HI, where it converges to kernel_eval
/// as beta grows. The HI dimension term is evaluated through its log-domain
/// equivalent since the literal double exponential overflows for useful
/// beta. Errors: as kernel_eval, plus kernels/activation-overflow naming the
/// offending dimension when an intermediate is non-finite.
double kernel_eval_neural(const KernelSpec& spec, std::span<const double> u,
                          std::span<const double> v);

struct KernelGrads {
  std::vector<double> du;
  std::vector<double> dv;
};

/// Analytic d kappa / du and d kappa / dv. Distance kernels return the zero
/// subgradient at u == v; HI assigns min's derivative to u on ties.
KernelGrads kernel_grads(const KernelSpec& spec, std::span<const double> u,
                         std::span<const double> v);

/// G[i,j] = kernel_eval(spec, X_i, Y_j). Kernel errors are rethrown with the
/// (i, j) location appended.
Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& y);

}  // namespace kgcn
