#include "kgcn/model.hpp"

#include <algorithm>
#include <cmath>

namespace kgcn {

namespace {

/// Filter responses per node: entry (u, k) = (1/N) sum_i alpha_ki *
/// kappa(s(u), v_ki). Shared by both convolution routes.
Matrix filter_responses(const Matrix& kappa, const FilterBank& bank) {
  const std::size_t n = kappa.rows();
  const std::size_t K = bank.filters;
  const std::size_t N = bank.supports;
  Matrix inner(n, K);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        acc += bank.alphas(k, i) * kappa(u, k * N + i);
      }
      inner(u, k) = acc / static_cast<double>(N);
    }
  }
  return inner;
}

void check_signal_dim(const LabeledGraph& g, std::size_t dim) {
  if (g.signal_dim() != dim) {
    throw Error(ErrorKind::Data, "model/dim-mismatch",
                "graph signals of dimension " +
                    std::to_string(g.signal_dim()) +
                    " against model dimension " + std::to_string(dim));
  }
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

}  // namespace

std::string_view pool_name(Pool p) {
  return p == Pool::Mean ? "mean" : "max";
}

std::optional<Pool> pool_from_name(std::string_view name) {
  if (name == "mean") return Pool::Mean;
  if (name == "max") return Pool::Max;
  return std::nullopt;
}

std::string_view ablation_name(AblationMode mode) {
  switch (mode) {
    case AblationMode::FsvLa: return "fsv_la";
    case AblationMode::LsvFa: return "lsv_fa";
    case AblationMode::LsvLa: return "lsv_la";
  }
  return "unknown";
}

std::optional<AblationMode> ablation_from_name(std::string_view name) {
  if (name == "fsv_la") return AblationMode::FsvLa;
  if (name == "lsv_fa") return AblationMode::LsvFa;
  if (name == "lsv_la" || name == "none") return AblationMode::LsvLa;
  return std::nullopt;
}

void FilterBank::validate() const {
  if (support.rows() != filters * supports) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "support rows " + std::to_string(support.rows()) +
                    " for " + std::to_string(filters) + " filters of " +
                    std::to_string(supports) + " vectors");
  }
  if (alphas.rows() != filters || alphas.cols() != supports) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "alphas " + std::to_string(alphas.rows()) + "x" +
                    std::to_string(alphas.cols()));
  }
  if (filters < 1 || supports < 1 || support.cols() < 1) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "filter bank dimensions must be positive");
  }
  support.ensure_finite("filter bank support");
  alphas.ensure_finite("filter bank alphas");
}

void KgcnModel::validate() const {
  spec.validate();
  bank.validate();
  if (classifier.cols() != bank.filters || classifier.rows() < 1) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "classifier " + std::to_string(classifier.rows()) + "x" +
                    std::to_string(classifier.cols()) + " for " +
                    std::to_string(bank.filters) + " filters");
  }
  classifier.ensure_finite("classifier");
  if (hops < 1) {
    throw Error(ErrorKind::Data, "graph/bad-hop",
                "hop count " + std::to_string(hops) + " must be >= 1");
  }
}

void SgcnModel::validate() const {
  if (weights.rows() < 1 || weights.cols() < 1) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "weights must be nonempty");
  }
  if (classifier.cols() != weights.rows() || classifier.rows() < 1) {
    throw Error(ErrorKind::Data, "model/shape-mismatch",
                "classifier " + std::to_string(classifier.rows()) + "x" +
                    std::to_string(classifier.cols()) + " for " +
                    std::to_string(weights.rows()) + " filters");
  }
  weights.ensure_finite("weights");
  classifier.ensure_finite("classifier");
  if (hops < 1) {
    throw Error(ErrorKind::Data, "graph/bad-hop",
                "hop count " + std::to_string(hops) + " must be >= 1");
  }
}

Matrix kgcn_preactivation(const LabeledGraph& g, const KgcnModel& m) {
  m.validate();
  g.validate();
  check_signal_dim(g, m.bank.signal_dim());
  Matrix kappa = gram(m.spec, g.signals, m.bank.support);
  Matrix inner = filter_responses(kappa, m.bank);
  Matrix ar = hop_adjacency(g.adjacency, m.hops);
  Matrix pre = matmul(ar, inner);
  pre.ensure_finite("kgcn pre-activation");
  return pre;
}

Matrix kgcn_conv(const LabeledGraph& g, const KgcnModel& m) {
  return relu(kgcn_preactivation(g, m));
}

Matrix kgcn_conv_logexp(const LabeledGraph& g, const KgcnModel& m) {
  m.validate();
  g.validate();
  check_signal_dim(g, m.bank.signal_dim());
  const std::size_t n = g.node_count();
  const std::size_t K = m.bank.filters;
  const std::size_t N = m.bank.supports;

  Matrix kappa = gram(m.spec, g.signals, m.bank.support);
  Matrix ar = hop_adjacency(g.adjacency, m.hops);

  // Inner sums without the 1/N factor; positivity is required wherever a
  // node contributes through a nonzero adjacency entry.
  Matrix sums(n, K);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        acc += m.bank.alphas(k, i) * kappa(u, k * N + i);
      }
      sums(u, k) = acc;
    }
  }

  Matrix out(n, K);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      double a = ar(u, v);
      if (a <= 0.0) continue;
      for (std::size_t k = 0; k < K; ++k) {
        double s = sums(v, k);
        if (s <= 0.0) {
          throw Error(ErrorKind::Numeric, "model/log-domain-violation",
                      "inner sum " + std::to_string(s) + " at node " +
                          std::to_string(v) + ", filter " +
                          std::to_string(k) + " is not positive");
        }
        out(u, k) += std::exp(std::log(a) + std::log(s));
      }
    }
  }
  for (double& v : out.data()) v /= static_cast<double>(N);
  out.ensure_finite("kgcn log-exp convolution");
  return out;
}

Matrix sgcn_conv(const Matrix& features, const Matrix& adjacency,
                 const SgcnModel& m) {
  m.validate();
  if (features.rows() != adjacency.rows() ||
      adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorKind::Data, "model/dim-mismatch",
                "features " + std::to_string(features.rows()) +
                    " rows against adjacency " +
                    std::to_string(adjacency.rows()) + "x" +
                    std::to_string(adjacency.cols()));
  }
  if (features.cols() != m.weights.cols()) {
    throw Error(ErrorKind::Data, "model/dim-mismatch",
                "features of dimension " + std::to_string(features.cols()) +
                    " against weights of dimension " +
                    std::to_string(m.weights.cols()));
  }
  Matrix ar = hop_adjacency(adjacency, m.hops);
  Matrix agg = matmul(ar, features);
  Matrix pre = matmul(agg, transpose(m.weights));
  return relu(pre);
}

ReadoutResult readout(const Matrix& conv, const Matrix& classifier,
                      Pool pool) {
  const std::size_t n = conv.rows();
  const std::size_t K = conv.cols();
  if (classifier.cols() != K) {
    throw Error(ErrorKind::Data, "model/dim-mismatch",
                "classifier expects " + std::to_string(classifier.cols()) +
                    " features, convolution produced " + std::to_string(K));
  }
  if (n == 0) {
    throw Error(ErrorKind::Data, "model/dim-mismatch",
                "cannot pool over an empty graph");
  }
  std::vector<double> pooled(K, 0.0);
  if (pool == Pool::Mean) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < K; ++k) pooled[k] += conv(u, k);
    }
    for (double& v : pooled) v /= static_cast<double>(n);
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      double best = conv(0, k);
      for (std::size_t u = 1; u < n; ++u) {
        if (conv(u, k) > best) best = conv(u, k);
      }
      pooled[k] = best;
    }
  }

  ReadoutResult res;
  res.logits.assign(classifier.rows(), 0.0);
  for (std::size_t c = 0; c < classifier.rows(); ++c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += classifier(c, k) * pooled[k];
    res.logits[c] = acc;
  }
  res.probs = softmax_cross_entropy(res.logits, 0).probs;
  return res;
}

ReadoutResult kgcn_forward(const LabeledGraph& g, const KgcnModel& m) {
  return readout(kgcn_conv(g, m), m.classifier, m.pool);
}

ReadoutResult sgcn_forward(const LabeledGraph& g, const KpcaProjector& proj,
                           const SgcnModel& m) {
  g.validate();
  Matrix features = kpca_project_all(proj, g.signals);
  return sgcn_forward_features(features, g.adjacency, m);
}

ReadoutResult sgcn_forward_features(const Matrix& features,
                                    const Matrix& adjacency,
                                    const SgcnModel& m) {
  return readout(sgcn_conv(features, adjacency, m), m.classifier, m.pool);
}

std::size_t param_count(const KgcnModel& m) {
  return m.bank.support.size() + m.bank.alphas.size() + m.classifier.size();
}

std::size_t param_count(const SgcnModel& m) {
  return m.weights.size() + m.classifier.size();
}

KgcnGrads kgcn_backward(const LabeledGraph& g, const KgcnModel& m,
                        int label) {
  m.validate();
  g.validate();
  check_signal_dim(g, m.bank.signal_dim());
  const std::size_t n = g.node_count();
  const std::size_t K = m.bank.filters;
  const std::size_t N = m.bank.supports;
  const std::size_t C = m.classifier.rows();
  const std::size_t D = m.bank.signal_dim();

  Matrix kappa = gram(m.spec, g.signals, m.bank.support);
  Matrix inner = filter_responses(kappa, m.bank);
  Matrix ar = hop_adjacency(g.adjacency, m.hops);
  Matrix pre = matmul(ar, inner);
  Matrix conv = relu(pre);

  std::vector<double> pooled(K, 0.0);
  std::vector<std::size_t> argmax(K, 0);
  if (m.pool == Pool::Mean) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < K; ++k) pooled[k] += conv(u, k);
    }
    for (double& v : pooled) v /= static_cast<double>(n);
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      pooled[k] = conv(0, k);
      for (std::size_t u = 1; u < n; ++u) {
        if (conv(u, k) > pooled[k]) {
          pooled[k] = conv(u, k);
          argmax[k] = u;
        }
      }
    }
  }

  std::vector<double> logits(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      logits[c] += m.classifier(c, k) * pooled[k];
    }
  }
  SoftmaxResult sm = softmax_cross_entropy(logits,
                                           static_cast<std::size_t>(label));

  KgcnGrads grads;
  grads.loss = sm.loss;
  grads.probs = sm.probs;
  grads.support = Matrix(K * N, D);
  grads.alphas = Matrix(K, N);
  grads.classifier = Matrix(C, K);

  std::vector<double> dlogits(C);
  for (std::size_t c = 0; c < C; ++c) {
    dlogits[c] = sm.probs[c] -
                 (c == static_cast<std::size_t>(label) ? 1.0 : 0.0);
  }
  std::vector<double> dpooled(K, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      grads.classifier(c, k) = dlogits[c] * pooled[k];
      dpooled[k] += m.classifier(c, k) * dlogits[c];
    }
  }

  Matrix dpre(n, K);
  if (m.pool == Pool::Mean) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < K; ++k) {
        dpre(u, k) = pre(u, k) > 0.0
                         ? dpooled[k] / static_cast<double>(n)
                         : 0.0;
      }
    }
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t u = argmax[k];
      dpre(u, k) = pre(u, k) > 0.0 ? dpooled[k] : 0.0;
    }
  }

  Matrix dinner = matmul(transpose(ar), dpre);
  const double inv_n_supports = 1.0 / static_cast<double>(N);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      double dalpha = 0.0;
      std::span<const double> v = m.bank.support.row(k * N + i);
      std::span<double> dv = grads.support.row(k * N + i);
      double alpha = m.bank.alphas(k, i);
      for (std::size_t u = 0; u < n; ++u) {
        double w = dinner(u, k) * inv_n_supports;
        if (w == 0.0) continue;
        dalpha += w * kappa(u, k * N + i);
        KernelGrads kg = kernel_grads(m.spec, g.signals.row(u), v);
        for (std::size_t d = 0; d < D; ++d) {
          dv[d] += w * alpha * kg.dv[d];
        }
      }
      grads.alphas(k, i) = dalpha;
    }
  }
  grads.support.ensure_finite("support gradient");
  grads.alphas.ensure_finite("alpha gradient");
  grads.classifier.ensure_finite("classifier gradient");
  return grads;
}

SgcnGrads sgcn_backward(const LabeledGraph& g, const KpcaProjector& proj,
                        const SgcnModel& m, int label) {
  g.validate();
  Matrix features = kpca_project_all(proj, g.signals);
  return sgcn_backward_features(features, g.adjacency, m, label);
}

SgcnGrads sgcn_backward_features(const Matrix& features,
                                 const Matrix& adjacency, const SgcnModel& m,
                                 int label) {
  m.validate();
  const std::size_t n = features.rows();
  const std::size_t K = m.weights.rows();
  const std::size_t H = m.weights.cols();
  const std::size_t C = m.classifier.rows();

  Matrix ar = hop_adjacency(adjacency, m.hops);
  Matrix agg = matmul(ar, features);
  Matrix pre = matmul(agg, transpose(m.weights));
  Matrix conv = relu(pre);

  std::vector<double> pooled(K, 0.0);
  std::vector<std::size_t> argmax(K, 0);
  if (m.pool == Pool::Mean) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < K; ++k) pooled[k] += conv(u, k);
    }
    for (double& v : pooled) v /= static_cast<double>(n);
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      pooled[k] = conv(0, k);
      for (std::size_t u = 1; u < n; ++u) {
        if (conv(u, k) > pooled[k]) {
          pooled[k] = conv(u, k);
          argmax[k] = u;
        }
      }
    }
  }

  std::vector<double> logits(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      logits[c] += m.classifier(c, k) * pooled[k];
    }
  }
  SoftmaxResult sm = softmax_cross_entropy(logits,
                                           static_cast<std::size_t>(label));

  SgcnGrads grads;
  grads.loss = sm.loss;
  grads.probs = sm.probs;
  grads.weights = Matrix(K, H);
  grads.classifier = Matrix(C, K);

  std::vector<double> dlogits(C);
  for (std::size_t c = 0; c < C; ++c) {
    dlogits[c] = sm.probs[c] -
                 (c == static_cast<std::size_t>(label) ? 1.0 : 0.0);
  }
  std::vector<double> dpooled(K, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t k = 0; k < K; ++k) {
      grads.classifier(c, k) = dlogits[c] * pooled[k];
      dpooled[k] += m.classifier(c, k) * dlogits[c];
    }
  }

  Matrix dpre(n, K);
  if (m.pool == Pool::Mean) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t k = 0; k < K; ++k) {
        dpre(u, k) = pre(u, k) > 0.0
                         ? dpooled[k] / static_cast<double>(n)
                         : 0.0;
      }
    }
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      std::size_t u = argmax[k];
      dpre(u, k) = pre(u, k) > 0.0 ? dpooled[k] : 0.0;
    }
  }

  // dW = dpre^T * agg
  grads.weights = matmul(transpose(dpre), agg);
  grads.weights.ensure_finite("weight gradient");
  grads.classifier.ensure_finite("classifier gradient");
  return grads;
}

void apply_ablation_mask(AblationMode mode, KgcnGrads& grads) {
  switch (mode) {
    case AblationMode::FsvLa:
      for (double& v : grads.support.data()) v = 0.0;
      break;
    case AblationMode::LsvFa:
      for (double& v : grads.alphas.data()) v = 0.0;
      break;
    case AblationMode::LsvLa:
      break;
  }
}

KgcnModel init_kgcn(const KernelSpec& spec, std::size_t filters,
                    std::size_t supports, std::size_t classes, int hops,
                    Pool pool, const Matrix& train_signals,
                    std::uint64_t seed) {
  spec.validate();
  if (filters < 1 || supports < 1 || classes < 2) {
    throw Error(ErrorKind::Data, "model/bad-spec",
                "need filters >= 1, supports >= 1, classes >= 2");
  }
  if (train_signals.rows() < 1) {
    throw Error(ErrorKind::Data, "model/bad-spec",
                "need at least one training signal to place support vectors");
  }
  const std::size_t D = train_signals.cols();
  Rng rng(seed);

  KgcnModel m;
  m.spec = spec;
  m.hops = hops;
  m.pool = pool;
  m.bank.filters = filters;
  m.bank.supports = supports;
  m.bank.support = Matrix(filters * supports, D);
  m.bank.alphas = Matrix(filters, supports);
  for (std::size_t rowi = 0; rowi < filters * supports; ++rowi) {
    std::size_t pick = rng.below(static_cast<std::uint32_t>(
        train_signals.rows()));
    for (std::size_t d = 0; d < D; ++d) {
      m.bank.support(rowi, d) = train_signals(pick, d);
    }
  }
  double alpha_std = 1.0 / std::sqrt(static_cast<double>(supports));
  for (double& v : m.bank.alphas.data()) v = rng.normal(0.0, alpha_std);

  double bound = std::sqrt(6.0 / static_cast<double>(filters + classes));
  m.classifier = Matrix(classes, filters);
  for (double& v : m.classifier.data()) v = rng.uniform(-bound, bound);
  m.validate();
  return m;
}

SgcnModel init_sgcn(std::size_t filters, std::size_t feature_dim,
                    std::size_t classes, int hops, Pool pool,
                    std::uint64_t seed) {
  if (filters < 1 || feature_dim < 1 || classes < 2) {
    throw Error(ErrorKind::Data, "model/bad-spec",
                "need filters >= 1, feature_dim >= 1, classes >= 2");
  }
  Rng rng(seed);
  SgcnModel m;
  m.hops = hops;
  m.pool = pool;
  double wbound = std::sqrt(6.0 / static_cast<double>(feature_dim + filters));
  m.weights = Matrix(filters, feature_dim);
  for (double& v : m.weights.data()) v = rng.uniform(-wbound, wbound);
  double cbound = std::sqrt(6.0 / static_cast<double>(filters + classes));
  m.classifier = Matrix(classes, filters);
  for (double& v : m.classifier.data()) v = rng.uniform(-cbound, cbound);
  m.validate();
  return m;
}

}  // namespace kgcn
