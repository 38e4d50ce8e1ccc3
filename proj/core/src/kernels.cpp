#include "kgcn/kernels.hpp"

#include <cmath>

namespace kgcn {

namespace {

double ipow(double x, int n) {
  double acc = 1.0;
  for (int i = 0; i < n; ++i) acc *= x;
  return acc;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) acc += u[d] * v[d];
  return acc;
}

double squared_distance(std::span<const double> u, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t d = 0; d < u.size(); ++d) {
    double diff = u[d] - v[d];
    acc += diff * diff;
  }
  return acc;
}

void check_dims(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::Data, "kernels/dim-mismatch",
                "kernel arguments of length " + std::to_string(u.size()) +
                    " and " + std::to_string(v.size()));
  }
}

void check_hi_range(std::span<const double> xs) {
  for (std::size_t d = 0; d < xs.size(); ++d) {
    if (!(xs[d] >= 0.0 && xs[d] <= 1.0)) {
      throw Error(ErrorKind::Data, "kernels/range-violation",
                  "histogram-intersection input " + std::to_string(xs[d]) +
                      " at dimension " + std::to_string(d) +
                      " outside [0,1]");
    }
  }
}

/// Two-term log-sum-exp, max-shifted.
double lse2(double x, double y) {
  double m = x > y ? x : y;
  double n = x > y ? y : x;
  return m + std::log1p(std::exp(n - m));
}

}  // namespace

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Sigmoid: return "sigmoid";
    case KernelKind::Tanh: return "tanh";
    case KernelKind::Gaussian: return "gaussian";
    case KernelKind::Laplacian: return "laplacian";
    case KernelKind::Power: return "power";
    case KernelKind::InverseMultiquadric: return "imq";
    case KernelKind::Log: return "log";
    case KernelKind::Cauchy: return "cauchy";
    case KernelKind::HistogramIntersection: return "hi";
  }
  return "unknown";
}

std::optional<KernelKind> kernel_from_name(std::string_view name) {
  for (KernelKind kind : kAllKernelKinds) {
    if (kernel_name(kind) == name) return kind;
  }
  // Long-form aliases accepted in config files.
  if (name == "poly") return KernelKind::Polynomial;
  if (name == "inverse-multiquadric") return KernelKind::InverseMultiquadric;
  if (name == "histogram-intersection") return KernelKind::HistogramIntersection;
  return std::nullopt;
}

bool is_distance_kernel(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian:
    case KernelKind::Laplacian:
    case KernelKind::Power:
    case KernelKind::InverseMultiquadric:
    case KernelKind::Log:
    case KernelKind::Cauchy:
      return true;
    default:
      return false;
  }
}

bool is_inner_product_kernel(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear:
    case KernelKind::Polynomial:
    case KernelKind::Sigmoid:
    case KernelKind::Tanh:
      return true;
    default:
      return false;
  }
}

KernelSpec KernelSpec::defaults(KernelKind kind) {
  KernelSpec spec;
  spec.kind = kind;
  spec.beta = kind == KernelKind::HistogramIntersection ? 50.0 : 1.0;
  spec.b = kind == KernelKind::InverseMultiquadric ? 1.0 : 0.0;
  return spec;
}

void KernelSpec::validate() const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorKind::Data, "kernels/bad-spec", what);
  };
  switch (kind) {
    case KernelKind::Gaussian:
    case KernelKind::Laplacian:
    case KernelKind::Sigmoid:
    case KernelKind::HistogramIntersection:
      if (!(beta > 0.0)) bad("beta must be positive");
      break;
    case KernelKind::Polynomial:
    case KernelKind::Power:
    case KernelKind::Log:
      if (p < 1) bad("degree p must be >= 1");
      break;
    case KernelKind::InverseMultiquadric:
      if (!(b != 0.0)) bad("offset b must be nonzero");
      break;
    case KernelKind::Cauchy:
      if (!(sigma2 > 0.0)) bad("sigma2 must be positive");
      break;
    case KernelKind::Linear:
    case KernelKind::Tanh:
      break;
  }
}

double ScalarFn::operator()(double t) const {
  switch (form) {
    case Form::Identity: return t;
    case Form::Exp: return std::exp(t);
    case Form::NegExp: return std::exp(-t);
    case Form::LogSquared: {
      double l = std::log(t);
      return l * l;
    }
    case Form::ExpNegBeta: return std::exp(-beta * t);
    case Form::ExpNegBetaSqrt: return std::exp(-beta * std::sqrt(t));
    case Form::NegPowHalfP: return -std::pow(t, 0.5 * p);
    case Form::InvSqrtShift: return 1.0 / std::sqrt(t + b * b);
    case Form::NegLogPowHalfP: return -std::log(std::pow(t, 0.5 * p) + 1.0);
    case Form::CauchyResponse: return 1.0 / (1.0 + t / sigma2);
    case Form::Logistic: return 1.0 / (1.0 + std::exp(-beta * t));
    case Form::TanhAffine: return std::tanh(a * t + b);
    case Form::PowP: return ipow(t, p);
    case Form::DoubleExp: return std::exp(std::exp(beta * (1.0 - t)));
    case Form::HiUnlog: return -(1.0 / beta) * std::log(std::log(t)) + 1.0;
  }
  return t;
}

std::string ScalarFn::describe() const {
  switch (form) {
    case Form::Identity: return "t";
    case Form::Exp: return "exp(t)";
    case Form::NegExp: return "exp(-t)";
    case Form::LogSquared: return "log(t)^2";
    case Form::ExpNegBeta: return "exp(-" + std::to_string(beta) + "*t)";
    case Form::ExpNegBetaSqrt:
      return "exp(-" + std::to_string(beta) + "*sqrt(t))";
    case Form::NegPowHalfP: return "-t^(" + std::to_string(p) + "/2)";
    case Form::InvSqrtShift:
      return "1/sqrt(t+" + std::to_string(b * b) + ")";
    case Form::NegLogPowHalfP:
      return "-log(t^(" + std::to_string(p) + "/2)+1)";
    case Form::CauchyResponse:
      return "1/(1+t/" + std::to_string(sigma2) + ")";
    case Form::Logistic:
      return "1/(1+exp(-" + std::to_string(beta) + "*t))";
    case Form::TanhAffine:
      return "tanh(" + std::to_string(a) + "*t+" + std::to_string(b) + ")";
    case Form::PowP: return "t^" + std::to_string(p);
    case Form::DoubleExp:
      return "exp(exp(" + std::to_string(beta) + "*(1-t)))";
    case Form::HiUnlog:
      return "-(1/" + std::to_string(beta) + ")*log(log(t))+1";
  }
  return "t";
}

SigmaQuad sigma_quad(const KernelSpec& spec) {
  spec.validate();
  using Form = ScalarFn::Form;
  auto fn = [&spec](Form form) {
    ScalarFn f;
    f.form = form;
    f.beta = spec.beta;
    f.p = spec.p;
    f.a = spec.a;
    f.b = spec.b;
    f.sigma2 = spec.sigma2;
    return f;
  };

  SigmaQuad quad{fn(Form::Identity), fn(Form::Identity), fn(Form::Identity),
                 fn(Form::Identity)};
  switch (spec.kind) {
    case KernelKind::Linear:
      break;
    case KernelKind::Polynomial:
      quad.s3 = fn(Form::PowP);
      break;
    case KernelKind::Sigmoid:
      quad.s3 = fn(Form::Logistic);
      break;
    case KernelKind::Tanh:
      quad.s3 = fn(Form::TanhAffine);
      break;
    case KernelKind::Gaussian:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::ExpNegBeta),
              fn(Form::NegExp)};
      break;
    case KernelKind::Laplacian:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::ExpNegBetaSqrt),
              fn(Form::NegExp)};
      break;
    case KernelKind::Power:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::NegPowHalfP),
              fn(Form::NegExp)};
      break;
    case KernelKind::InverseMultiquadric:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::InvSqrtShift),
              fn(Form::NegExp)};
      break;
    case KernelKind::Log:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::NegLogPowHalfP),
              fn(Form::NegExp)};
      break;
    case KernelKind::Cauchy:
      quad = {fn(Form::Exp), fn(Form::LogSquared), fn(Form::CauchyResponse),
              fn(Form::NegExp)};
      break;
    case KernelKind::HistogramIntersection:
      quad = {fn(Form::DoubleExp), fn(Form::HiUnlog), fn(Form::Identity),
              fn(Form::DoubleExp)};
      break;
  }
  return quad;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u,
                   std::span<const double> v) {
  check_dims(u, v);
  spec.validate();
  switch (spec.kind) {
    case KernelKind::Linear:
      return dot(u, v);
    case KernelKind::Polynomial:
      return ipow(dot(u, v), spec.p);
    case KernelKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-spec.beta * dot(u, v)));
    case KernelKind::Tanh:
      return std::tanh(spec.a * dot(u, v) + spec.b);
    case KernelKind::Gaussian:
      return std::exp(-spec.beta * squared_distance(u, v));
    case KernelKind::Laplacian:
      return std::exp(-spec.beta * std::sqrt(squared_distance(u, v)));
    case KernelKind::Power:
      return -std::pow(squared_distance(u, v), 0.5 * spec.p);
    case KernelKind::InverseMultiquadric:
      return 1.0 / std::sqrt(squared_distance(u, v) + spec.b * spec.b);
    case KernelKind::Log:
      return -std::log(std::pow(squared_distance(u, v), 0.5 * spec.p) + 1.0);
    case KernelKind::Cauchy:
      return 1.0 / (1.0 + squared_distance(u, v) / spec.sigma2);
    case KernelKind::HistogramIntersection: {
      check_hi_range(u);
      check_hi_range(v);
      double acc = 0.0;
      for (std::size_t d = 0; d < u.size(); ++d) {
        acc += u[d] < v[d] ? u[d] : v[d];
      }
      return acc;
    }
  }
  throw Error(ErrorKind::Data, "kernels/bad-spec", "unknown kernel kind");
}

double kernel_eval_neural(const KernelSpec& spec, std::span<const double> u,
                          std::span<const double> v) {
  check_dims(u, v);
  spec.validate();
  SigmaQuad quad = sigma_quad(spec);

  double pooled = 0.0;
  if (spec.kind == KernelKind::HistogramIntersection) {
    check_hi_range(u);
    check_hi_range(v);
    // sigma2(sigma1(u_d) * sigma4(v_d)) collapses to
    // 1 - (1/beta) * lse(beta(1-u_d), beta(1-v_d)); the literal double
    // exponential leaves IEEE range for beta beyond ~7.
    for (std::size_t d = 0; d < u.size(); ++d) {
      double term = 1.0 - lse2(spec.beta * (1.0 - u[d]),
                               spec.beta * (1.0 - v[d])) / spec.beta;
      pooled += term;
    }
  } else {
    for (std::size_t d = 0; d < u.size(); ++d) {
      double crossed = quad.s1(u[d]) * quad.s4(v[d]);
      double term = quad.s2(crossed);
      if (!std::isfinite(crossed) || !std::isfinite(term)) {
        throw Error(ErrorKind::Numeric, "kernels/activation-overflow",
                    "non-finite activation at dimension " + std::to_string(d) +
                        " for kernel " + std::string(kernel_name(spec.kind)));
      }
      pooled += term;
    }
  }

  double value = quad.s3(pooled);
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::Numeric, "kernels/activation-overflow",
                "non-finite sigma3 output for kernel " +
                    std::string(kernel_name(spec.kind)));
  }
  return value;
}

KernelGrads kernel_grads(const KernelSpec& spec, std::span<const double> u,
                         std::span<const double> v) {
  check_dims(u, v);
  spec.validate();
  const std::size_t dim = u.size();
  KernelGrads g;
  g.du.assign(dim, 0.0);
  g.dv.assign(dim, 0.0);

  if (is_inner_product_kernel(spec.kind)) {
    double z = dot(u, v);
    double factor = 0.0;
    switch (spec.kind) {
      case KernelKind::Linear:
        factor = 1.0;
        break;
      case KernelKind::Polynomial:
        factor = spec.p * ipow(z, spec.p - 1);
        break;
      case KernelKind::Sigmoid: {
        double k = 1.0 / (1.0 + std::exp(-spec.beta * z));
        factor = spec.beta * k * (1.0 - k);
        break;
      }
      case KernelKind::Tanh: {
        double k = std::tanh(spec.a * z + spec.b);
        factor = spec.a * (1.0 - k * k);
        break;
      }
      default:
        break;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      g.du[d] = factor * v[d];
      g.dv[d] = factor * u[d];
    }
    return g;
  }

  if (spec.kind == KernelKind::HistogramIntersection) {
    check_hi_range(u);
    check_hi_range(v);
    // min's subgradient, ties resolved toward u.
    for (std::size_t d = 0; d < dim; ++d) {
      if (u[d] <= v[d]) {
        g.du[d] = 1.0;
      } else {
        g.dv[d] = 1.0;
      }
    }
    return g;
  }

  // Distance-based kinds: kappa = f(q) with q = ||u-v||^2, so
  // d kappa/du = f'(q) * 2(u-v) and d kappa/dv = -d kappa/du.
  double q = squared_distance(u, v);
  if (q == 0.0) {
    // Zero subgradient at coincident points (non-smooth for Laplacian,
    // Power p<2 and Log p=1; true gradient elsewhere).
    return g;
  }
  double df_dq = 0.0;
  switch (spec.kind) {
    case KernelKind::Gaussian:
      df_dq = -spec.beta * std::exp(-spec.beta * q);
      break;
    case KernelKind::Laplacian: {
      double nrm = std::sqrt(q);
      df_dq = -spec.beta * std::exp(-spec.beta * nrm) / (2.0 * nrm);
      break;
    }
    case KernelKind::Power:
      df_dq = -0.5 * spec.p * std::pow(q, 0.5 * spec.p - 1.0);
      break;
    case KernelKind::InverseMultiquadric: {
      double k = 1.0 / std::sqrt(q + spec.b * spec.b);
      df_dq = -0.5 * k * k * k;
      break;
    }
    case KernelKind::Log: {
      double qp = std::pow(q, 0.5 * spec.p);
      df_dq = -0.5 * spec.p * std::pow(q, 0.5 * spec.p - 1.0) / (qp + 1.0);
      break;
    }
    case KernelKind::Cauchy: {
      double k = 1.0 / (1.0 + q / spec.sigma2);
      df_dq = -k * k / spec.sigma2;
      break;
    }
    default:
      break;
  }
  for (std::size_t d = 0; d < dim; ++d) {
    double glhs = df_dq * 2.0 * (u[d] - v[d]);
    g.du[d] = glhs;
    g.dv[d] = -glhs;
  }
  return g;
}

Matrix gram(const KernelSpec& spec, const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw Error(ErrorKind::Data, "kernels/dim-mismatch",
                "gram inputs with " + std::to_string(x.cols()) + " and " +
                    std::to_string(y.cols()) + " columns");
  }
  Matrix g(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      try {
        g(i, j) = kernel_eval(spec, x.row(i), y.row(j));
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(),
                    e.message() + " at gram entry (" + std::to_string(i) +
                        "," + std::to_string(j) + ")");
      }
    }
  }
  g.ensure_finite("gram");
  return g;
}

}  // namespace kgcn
