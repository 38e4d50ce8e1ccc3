#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "kgcn/graph.hpp"
#include "kgcn/kernels.hpp"
#include "kgcn/kpca.hpp"
#include "kgcn/numcore.hpp"

namespace kgcn {

enum class Pool { Mean, Max };

std::string_view pool_name(Pool p);
std::optional<Pool> pool_from_name(std::string_view name);

/// K convolution filters, each an expansion over N learnable support
/// vectors with learnable mixing weights. `support` is (K*N) x D with
/// filter k occupying rows [k*N, (k+1)*N); `alphas` is K x N.
struct FilterBank {
  std::size_t filters = 0;
  std::size_t supports = 0;
  Matrix support;
  Matrix alphas;

  std::size_t signal_dim() const { return support.cols(); }
  void validate() const;
};

struct KgcnModel {
  KernelSpec spec;
  FilterBank bank;
  Matrix classifier;
  int hops = 1;
  Pool pool = Pool::Mean;

  std::size_t class_count() const { return classifier.rows(); }
  void validate() const;
};

struct SgcnModel {
  Matrix weights;
  Matrix classifier;
  int hops = 1;
  Pool pool = Pool::Mean;

  std::size_t class_count() const { return classifier.rows(); }
  std::size_t feature_dim() const { return weights.cols(); }
  void validate() const;
};

/// Pre-activation node features: entry (u, k) is the A^r-weighted sum over
/// neighbors u' of the filter-k kernel response (1/N) * sum_i alpha_ki *
/// kappa(s(u'), v_ki).
Matrix kgcn_preactivation(const LabeledGraph& g, const KgcnModel& m);

/// ReLU of kgcn_preactivation.
Matrix kgcn_conv(const LabeledGraph& g, const KgcnModel& m);

/// The same pre-activation computed by crossing exp and log: masked sum of
/// exp(log A^r[u,u'] + log sum_i alpha_ki kappa) over nonzero A^r entries,
/// divided by N. Requires every contributing inner sum to be positive
/// ("model/log-domain-violation" otherwise).
Matrix kgcn_conv_logexp(const LabeledGraph& g, const KgcnModel& m);

/// ReLU( (A^r * features) * weights^T ) for the KPCA-feature baseline.
Matrix sgcn_conv(const Matrix& features, const Matrix& adjacency,
                 const SgcnModel& m);

struct ReadoutResult {
  std::vector<double> logits;
  std::vector<double> probs;
};

/// Pools node features over nodes (mean or max), applies the bias-free
/// classifier and softmax.
ReadoutResult readout(const Matrix& conv, const Matrix& classifier,
                      Pool pool);

ReadoutResult kgcn_forward(const LabeledGraph& g, const KgcnModel& m);
ReadoutResult sgcn_forward(const LabeledGraph& g, const KpcaProjector& proj,
                           const SgcnModel& m);

/// sgcn_forward with the KPCA projection already applied; lets callers cache
/// per-graph features across epochs since the projector never trains.
ReadoutResult sgcn_forward_features(const Matrix& features,
                                    const Matrix& adjacency,
                                    const SgcnModel& m);

/// (D+1)*N*K + C*K for KGCN; H*K + C*K for SGCN.
std::size_t param_count(const KgcnModel& m);
std::size_t param_count(const SgcnModel& m);

struct KgcnGrads {
  Matrix support;
  Matrix alphas;
  Matrix classifier;
  double loss = 0.0;
  std::vector<double> probs;
};

struct SgcnGrads {
  Matrix weights;
  Matrix classifier;
  double loss = 0.0;
  std::vector<double> probs;
};

/// Analytic gradient of the softmax cross-entropy loss at `label` with
/// respect to every learnable parameter. ReLU uses subgradient 0 at 0; max
/// pooling routes gradient to the lowest argmax node index.
KgcnGrads kgcn_backward(const LabeledGraph& g, const KgcnModel& m, int label);
SgcnGrads sgcn_backward(const LabeledGraph& g, const KpcaProjector& proj,
                        const SgcnModel& m, int label);
SgcnGrads sgcn_backward_features(const Matrix& features,
                                 const Matrix& adjacency, const SgcnModel& m,
                                 int label);

enum class AblationMode { FsvLa, LsvFa, LsvLa };

std::string_view ablation_name(AblationMode mode);
std::optional<AblationMode> ablation_from_name(std::string_view name);

/// Zeroes the gradient of the frozen parameter group: support vectors under
/// FsvLa, mixing weights under LsvFa, nothing under LsvLa. The classifier
/// always trains.
void apply_ablation_mask(AblationMode mode, KgcnGrads& grads);

/// Support vectors are drawn uniformly from the training signal rows,
/// alphas from Normal(0, 1/N), the classifier from
/// Uniform(-sqrt(6/(K+C)), +sqrt(6/(K+C))). Deterministic given the seed.
KgcnModel init_kgcn(const KernelSpec& spec, std::size_t filters,
                    std::size_t supports, std::size_t classes, int hops,
                    Pool pool, const Matrix& train_signals,
                    std::uint64_t seed);

SgcnModel init_sgcn(std::size_t filters, std::size_t feature_dim,
                    std::size_t classes, int hops, Pool pool,
                    std::uint64_t seed);

}  // namespace kgcn
