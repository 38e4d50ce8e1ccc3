#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgcn/kpca.hpp"
#include "kgcn/model.hpp"
#include "kgcn/skeleton.hpp"

namespace kgcn {

struct TrainConfig {
  double lr0 = 0.01;
  double momentum = 0.9;
  std::size_t batch = 50;
  std::size_t epochs = 3000;
  std::uint64_t seed = 0;
  AblationMode ablation = AblationMode::LsvLa;
  // Zero means "derive from lr0": [lr0/100, lr0*100].
  double lr_min = 0.0;
  double lr_max = 0.0;

  double min_rate() const { return lr_min > 0.0 ? lr_min : lr0 / 100.0; }
  double max_rate() const { return lr_max > 0.0 ? lr_max : lr0 * 100.0; }
  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;

  bool operator==(const EpochStats&) const = default;
};

/// velocity' = momentum * velocity - nu * grads; params += velocity'.
void sgd_momentum_step(Matrix& params, const Matrix& grads, Matrix& velocity,
                       double nu, double momentum);

/// One geometric learning-rate update per epoch: the loss-change speed
/// s_t = |L_t - L_{t-1}| rising means nu shrinks by 0.99, otherwise it grows
/// by 1/0.99; always clamped to [lo, hi]. Fewer than 3 recorded losses leave
/// nu unchanged.
double adaptive_lr(double nu, const std::vector<double>& losses, double lo,
                   double hi);

struct EvalResult {
  double macro_accuracy = 0.0;
  double micro_accuracy = 0.0;
  std::vector<double> per_class;
  std::vector<std::size_t> class_counts;
  Matrix confusion;
};

/// Macro accuracy = mean per-class recall over classes present in the
/// selection; argmax ties resolve to the lowest class index.
EvalResult evaluate(
    const std::function<std::vector<double>(const LabeledGraph&)>& probs_fn,
    const GraphDataset& dataset, const std::vector<std::size_t>& indices,
    std::size_t classes);
EvalResult evaluate(const KgcnModel& m, const GraphDataset& dataset,
                    const std::vector<std::size_t>& indices);
EvalResult evaluate(const SgcnModel& m, const KpcaProjector& proj,
                    const GraphDataset& dataset,
                    const std::vector<std::size_t>& indices);

struct TrainSetup {
  KernelSpec kernel;
  std::size_t filters = 5;
  std::size_t supports = 4;
  int hops = 1;
  Pool pool = Pool::Mean;
  /// Min-max scale signals into [0,1] (stats from the training split).
  /// Default on: kernel responses are scale-sensitive, and histogram
  /// intersection is undefined outside the unit box.
  bool normalize = true;
  TrainConfig train;
};

/// Full optimizer state, sufficient to continue training bit-exactly: the
/// per-epoch shuffle stream is derived from (seed, epoch), so nothing about
/// the random state itself needs persisting.
struct KgcnTrainState {
  KgcnModel model;
  std::optional<NormStats> norm;
  Matrix vel_support;
  Matrix vel_alphas;
  Matrix vel_classifier;
  double nu = 0.0;
  std::size_t epoch = 0;
  std::vector<EpochStats> history;
};

struct SgcnTrainState {
  SgcnModel model;
  KpcaProjector projector;
  std::optional<NormStats> norm;
  Matrix vel_weights;
  Matrix vel_classifier;
  double nu = 0.0;
  std::size_t epoch = 0;
  std::vector<EpochStats> history;
};

/// Stacks the signal rows of the selected graphs (training nodes).
Matrix collect_signals(const GraphDataset& dataset,
                       const std::vector<std::size_t>& indices);

KgcnTrainState init_kgcn_state(const GraphDataset& dataset,
                               const std::vector<std::size_t>& train_idx,
                               const TrainSetup& setup);

/// Runs epochs [state.epoch, target) in place. Deterministic given the
/// setup seed; resuming from a checkpoint at any epoch reproduces the
/// uninterrupted history exactly.
void train_kgcn_epochs(KgcnTrainState& state, const GraphDataset& dataset,
                       const std::vector<std::size_t>& train_idx,
                       const std::vector<std::size_t>& test_idx,
                       const TrainSetup& setup, std::size_t target_epochs);

/// Fresh end-to-end run: init + train to setup.train.epochs.
KgcnTrainState train_kgcn(const GraphDataset& dataset,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& test_idx,
                          const TrainSetup& setup);

/// SGCN baseline: KPCA projector fitted on (subsampled) training node
/// signals, then the linear filter bank trains on the fixed features.
SgcnTrainState init_sgcn_state(const GraphDataset& dataset,
                               const std::vector<std::size_t>& train_idx,
                               const TrainSetup& setup, std::size_t kpca_dim,
                               std::size_t max_anchors);

void train_sgcn_epochs(SgcnTrainState& state, const GraphDataset& dataset,
                       const std::vector<std::size_t>& train_idx,
                       const std::vector<std::size_t>& test_idx,
                       const TrainSetup& setup, std::size_t target_epochs);

SgcnTrainState train_sgcn(const GraphDataset& dataset,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& test_idx,
                          const TrainSetup& setup, std::size_t kpca_dim,
                          std::size_t max_anchors);

/// Trains once per ablation mode from identical initialization (same seed)
/// and reports each mode's final test macro accuracy.
std::map<AblationMode, double> ablate(const GraphDataset& dataset,
                                      const std::vector<std::size_t>& train_idx,
                                      const std::vector<std::size_t>& test_idx,
                                      const TrainSetup& setup);

}  // namespace kgcn
