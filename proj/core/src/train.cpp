#include "kgcn/train.hpp"

#include <algorithm>
#include <cmath>

namespace kgcn {

namespace {

void scale_in_place(Matrix& m, double s) {
  for (double& v : m.data()) v *= s;
}

void add_in_place(Matrix& dst, const Matrix& src) {
  if (dst.rows() != src.rows() || dst.cols() != src.cols()) {
    throw Error(ErrorKind::Data, "train/shape-mismatch",
                "gradient accumulator shape mismatch");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst.data()[i] += src.data()[i];
  }
}

std::size_t argmax_lowest(const std::vector<double>& xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

GraphDataset normalized_copy(const GraphDataset& dataset,
                             const NormStats& stats) {
  GraphDataset out = dataset;
  normalize_dataset(out, stats);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (momentum < 0.0 || momentum >= 1.0) {
    throw Error(ErrorKind::Data, "train/bad-config",
                "momentum " + std::to_string(momentum) +
                    " outside [0, 1)");
  }
  if (batch < 1) {
    throw Error(ErrorKind::Data, "train/bad-config", "batch must be >= 1");
  }
  if (!(lr0 > 0.0)) {
    throw Error(ErrorKind::Data, "train/bad-config",
                "lr0 must be positive");
  }
  if (lr0 < min_rate() || lr0 > max_rate()) {
    throw Error(ErrorKind::Data, "train/bad-config",
                "lr0 " + std::to_string(lr0) + " outside bounds [" +
                    std::to_string(min_rate()) + ", " +
                    std::to_string(max_rate()) + "]");
  }
}

void sgd_momentum_step(Matrix& params, const Matrix& grads, Matrix& velocity,
                       double nu, double momentum) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      params.rows() != velocity.rows() ||
      params.cols() != velocity.cols()) {
    throw Error(ErrorKind::Data, "train/shape-mismatch",
                "parameters, gradients and velocity must share a shape");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity.data()[i] = momentum * velocity.data()[i] -
                         nu * grads.data()[i];
    params.data()[i] += velocity.data()[i];
  }
}

double adaptive_lr(double nu, const std::vector<double>& losses, double lo,
                   double hi) {
  if (lo > hi) {
    throw Error(ErrorKind::Data, "train/bad-config",
                "learning-rate bounds are inverted");
  }
  if (losses.size() < 3) return std::clamp(nu, lo, hi);
  std::size_t t = losses.size() - 1;
  double speed = std::abs(losses[t] - losses[t - 1]);
  double prev_speed = std::abs(losses[t - 1] - losses[t - 2]);
  double next = speed > prev_speed ? nu * 0.99 : nu / 0.99;
  return std::clamp(next, lo, hi);
}

EvalResult evaluate(
    const std::function<std::vector<double>(const LabeledGraph&)>& probs_fn,
    const GraphDataset& dataset, const std::vector<std::size_t>& indices,
    std::size_t classes) {
  if (indices.empty()) {
    throw Error(ErrorKind::Data, "train/empty-split",
                "cannot evaluate an empty selection");
  }
  EvalResult res;
  res.per_class.assign(classes, 0.0);
  res.class_counts.assign(classes, 0);
  res.confusion = Matrix(classes, classes);

  for (std::size_t idx : indices) {
    const LabeledGraph& g = dataset.graphs[idx];
    if (g.label < 0 || static_cast<std::size_t>(g.label) >= classes) {
      throw Error(ErrorKind::Data, "train/bad-label",
                  "label " + std::to_string(g.label) + " outside [0, " +
                      std::to_string(classes) + ")");
    }
    std::vector<double> probs = probs_fn(g);
    std::size_t pred = argmax_lowest(probs);
    res.confusion(static_cast<std::size_t>(g.label), pred) += 1.0;
    ++res.class_counts[static_cast<std::size_t>(g.label)];
  }

  double macro_sum = 0.0;
  std::size_t present = 0;
  double correct = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    correct += res.confusion(c, c);
    if (res.class_counts[c] > 0) {
      res.per_class[c] = res.confusion(c, c) /
                         static_cast<double>(res.class_counts[c]);
      macro_sum += res.per_class[c];
      ++present;
    }
  }
  res.macro_accuracy = present > 0 ? macro_sum /
                                         static_cast<double>(present)
                                   : 0.0;
  res.micro_accuracy = correct / static_cast<double>(indices.size());
  return res;
}

EvalResult evaluate(const KgcnModel& m, const GraphDataset& dataset,
                    const std::vector<std::size_t>& indices) {
  return evaluate(
      [&m](const LabeledGraph& g) { return kgcn_forward(g, m).probs; },
      dataset, indices, m.class_count());
}

EvalResult evaluate(const SgcnModel& m, const KpcaProjector& proj,
                    const GraphDataset& dataset,
                    const std::vector<std::size_t>& indices) {
  return evaluate(
      [&m, &proj](const LabeledGraph& g) {
        return sgcn_forward(g, proj, m).probs;
      },
      dataset, indices, m.class_count());
}

Matrix collect_signals(const GraphDataset& dataset,
                       const std::vector<std::size_t>& indices) {
  if (indices.empty()) {
    throw Error(ErrorKind::Data, "train/empty-split",
                "no graphs selected");
  }
  std::size_t dim = dataset.graphs[indices[0]].signal_dim();
  std::size_t total = 0;
  for (std::size_t idx : indices) {
    if (idx >= dataset.graphs.size()) {
      throw Error(ErrorKind::Data, "skeleton/unknown-id",
                  "index " + std::to_string(idx) + " out of range");
    }
    if (dataset.graphs[idx].signal_dim() != dim) {
      throw Error(ErrorKind::Data, "graph/shape-mismatch",
                  "signal dimension varies across the dataset");
    }
    total += dataset.graphs[idx].node_count();
  }
  Matrix out(total, dim);
  std::size_t row = 0;
  for (std::size_t idx : indices) {
    const Matrix& sig = dataset.graphs[idx].signals;
    for (std::size_t i = 0; i < sig.rows(); ++i, ++row) {
      for (std::size_t d = 0; d < dim; ++d) out(row, d) = sig(i, d);
    }
  }
  return out;
}

KgcnTrainState init_kgcn_state(const GraphDataset& dataset,
                               const std::vector<std::size_t>& train_idx,
                               const TrainSetup& setup) {
  setup.train.validate();
  std::size_t classes = dataset.class_count();

  KgcnTrainState state;
  if (setup.normalize) {
    state.norm = fit_minmax(dataset, train_idx);
  }
  Matrix signals =
      state.norm ? collect_signals(normalized_copy(dataset, *state.norm),
                                   train_idx)
                 : collect_signals(dataset, train_idx);
  state.model = init_kgcn(setup.kernel, setup.filters, setup.supports,
                          classes, setup.hops, setup.pool, signals,
                          setup.train.seed);
  state.vel_support = Matrix(state.model.bank.support.rows(),
                             state.model.bank.support.cols());
  state.vel_alphas = Matrix(state.model.bank.alphas.rows(),
                            state.model.bank.alphas.cols());
  state.vel_classifier = Matrix(state.model.classifier.rows(),
                                state.model.classifier.cols());
  state.nu = setup.train.lr0;
  state.epoch = 0;
  return state;
}

void train_kgcn_epochs(KgcnTrainState& state, const GraphDataset& dataset,
                       const std::vector<std::size_t>& train_idx,
                       const std::vector<std::size_t>& test_idx,
                       const TrainSetup& setup, std::size_t target_epochs) {
  const TrainConfig& cfg = setup.train;
  cfg.validate();
  if (train_idx.empty()) {
    throw Error(ErrorKind::Data, "train/empty-split",
                "training split is empty");
  }

  std::vector<double> losses;
  losses.reserve(state.history.size() + target_epochs);
  for (const EpochStats& s : state.history) losses.push_back(s.loss);

  std::vector<std::size_t> order;
  for (std::size_t epoch = state.epoch; epoch < target_epochs; ++epoch) {
    order = train_idx;
    Rng shuffle_rng(mix_seed(cfg.seed, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t stop = std::min(order.size(), start + cfg.batch);
      Matrix gsum_support(state.model.bank.support.rows(),
                          state.model.bank.support.cols());
      Matrix gsum_alphas(state.model.bank.alphas.rows(),
                         state.model.bank.alphas.cols());
      Matrix gsum_classifier(state.model.classifier.rows(),
                             state.model.classifier.cols());
      for (std::size_t b = start; b < stop; ++b) {
        const LabeledGraph& g = dataset.graphs[order[b]];
        KgcnGrads grads = kgcn_backward(g, state.model, g.label);
        if (!std::isfinite(grads.loss)) {
          throw Error(ErrorKind::Numeric, "train/diverged",
                      "non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += grads.loss;
        add_in_place(gsum_support, grads.support);
        add_in_place(gsum_alphas, grads.alphas);
        add_in_place(gsum_classifier, grads.classifier);
      }
      double inv = 1.0 / static_cast<double>(stop - start);
      scale_in_place(gsum_support, inv);
      scale_in_place(gsum_alphas, inv);
      scale_in_place(gsum_classifier, inv);

      KgcnGrads masked;
      masked.support = std::move(gsum_support);
      masked.alphas = std::move(gsum_alphas);
      masked.classifier = std::move(gsum_classifier);
      apply_ablation_mask(cfg.ablation, masked);

      sgd_momentum_step(state.model.bank.support, masked.support,
                        state.vel_support, state.nu, cfg.momentum);
      sgd_momentum_step(state.model.bank.alphas, masked.alphas,
                        state.vel_alphas, state.nu, cfg.momentum);
      sgd_momentum_step(state.model.classifier, masked.classifier,
                        state.vel_classifier, state.nu, cfg.momentum);

      // Histogram intersection only accepts inputs in the unit box, so
      // learned support vectors take projected steps: clamp back into
      // [0,1] after each update.
      if (setup.kernel.kind == KernelKind::HistogramIntersection) {
        Matrix& sup = state.model.bank.support;
        for (std::size_t r = 0; r < sup.rows(); ++r)
          for (double& x : sup.row(r)) x = std::clamp(x, 0.0, 1.0);
      }
    }

    double epoch_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::Numeric, "train/diverged",
                  "non-finite loss at epoch " + std::to_string(epoch));
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = epoch_loss;
    stats.lr = state.nu;
    stats.train_acc = evaluate(state.model, dataset, train_idx)
                          .macro_accuracy;
    stats.test_acc = test_idx.empty()
                         ? 0.0
                         : evaluate(state.model, dataset, test_idx)
                               .macro_accuracy;
    state.history.push_back(stats);
    losses.push_back(epoch_loss);
    state.nu = adaptive_lr(state.nu, losses, cfg.min_rate(),
                           cfg.max_rate());
    state.epoch = epoch + 1;
  }
}

KgcnTrainState train_kgcn(const GraphDataset& dataset,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& test_idx,
                          const TrainSetup& setup) {
  KgcnTrainState state = init_kgcn_state(dataset, train_idx, setup);
  if (state.norm) {
    GraphDataset scaled = normalized_copy(dataset, *state.norm);
    train_kgcn_epochs(state, scaled, train_idx, test_idx, setup,
                      setup.train.epochs);
  } else {
    train_kgcn_epochs(state, dataset, train_idx, test_idx, setup,
                      setup.train.epochs);
  }
  return state;
}

SgcnTrainState init_sgcn_state(const GraphDataset& dataset,
                               const std::vector<std::size_t>& train_idx,
                               const TrainSetup& setup, std::size_t kpca_dim,
                               std::size_t max_anchors) {
  setup.train.validate();
  std::size_t classes = dataset.class_count();

  SgcnTrainState state;
  if (setup.normalize) {
    state.norm = fit_minmax(dataset, train_idx);
  }
  Matrix signals =
      state.norm ? collect_signals(normalized_copy(dataset, *state.norm),
                                   train_idx)
                 : collect_signals(dataset, train_idx);
  Matrix anchors = subsample_rows(signals, max_anchors, setup.train.seed);
  state.projector = kpca_fit(setup.kernel, anchors, kpca_dim);
  state.model = init_sgcn(setup.filters, kpca_dim, classes, setup.hops,
                          setup.pool, setup.train.seed);
  state.vel_weights = Matrix(state.model.weights.rows(),
                             state.model.weights.cols());
  state.vel_classifier = Matrix(state.model.classifier.rows(),
                                state.model.classifier.cols());
  state.nu = setup.train.lr0;
  state.epoch = 0;
  return state;
}

void train_sgcn_epochs(SgcnTrainState& state, const GraphDataset& dataset,
                       const std::vector<std::size_t>& train_idx,
                       const std::vector<std::size_t>& test_idx,
                       const TrainSetup& setup, std::size_t target_epochs) {
  const TrainConfig& cfg = setup.train;
  cfg.validate();
  if (train_idx.empty()) {
    throw Error(ErrorKind::Data, "train/empty-split",
                "training split is empty");
  }

  // The projector never trains, so per-graph features are fixed across
  // epochs; project every graph once.
  std::vector<Matrix> features(dataset.graphs.size());
  std::vector<bool> have(dataset.graphs.size(), false);
  auto feature_of = [&](std::size_t idx) -> const Matrix& {
    if (!have[idx]) {
      features[idx] = kpca_project_all(state.projector,
                                       dataset.graphs[idx].signals);
      have[idx] = true;
    }
    return features[idx];
  };

  auto probs_by_index = [&](std::size_t idx) {
    return sgcn_forward_features(feature_of(idx),
                                 dataset.graphs[idx].adjacency,
                                 state.model)
        .probs;
  };
  std::size_t classes = state.model.class_count();
  auto eval_indices = [&](const std::vector<std::size_t>& idx) {
    double macro_sum = 0.0;
    std::vector<double> per_class(classes, 0.0);
    std::vector<std::size_t> counts(classes, 0);
    std::vector<std::size_t> hits(classes, 0);
    for (std::size_t i : idx) {
      std::vector<double> probs = probs_by_index(i);
      std::size_t label = static_cast<std::size_t>(dataset.graphs[i].label);
      std::size_t pred = argmax_lowest(probs);
      ++counts[label];
      if (pred == label) ++hits[label];
    }
    std::size_t present = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (counts[c] > 0) {
        macro_sum += static_cast<double>(hits[c]) /
                     static_cast<double>(counts[c]);
        ++present;
      }
    }
    return present > 0 ? macro_sum / static_cast<double>(present) : 0.0;
  };

  std::vector<double> losses;
  for (const EpochStats& s : state.history) losses.push_back(s.loss);

  std::vector<std::size_t> order;
  for (std::size_t epoch = state.epoch; epoch < target_epochs; ++epoch) {
    order = train_idx;
    Rng shuffle_rng(mix_seed(cfg.seed, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t stop = std::min(order.size(), start + cfg.batch);
      Matrix gsum_weights(state.model.weights.rows(),
                          state.model.weights.cols());
      Matrix gsum_classifier(state.model.classifier.rows(),
                             state.model.classifier.cols());
      for (std::size_t b = start; b < stop; ++b) {
        std::size_t idx = order[b];
        const LabeledGraph& g = dataset.graphs[idx];
        SgcnGrads grads = sgcn_backward_features(feature_of(idx),
                                                 g.adjacency, state.model,
                                                 g.label);
        if (!std::isfinite(grads.loss)) {
          throw Error(ErrorKind::Numeric, "train/diverged",
                      "non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += grads.loss;
        add_in_place(gsum_weights, grads.weights);
        add_in_place(gsum_classifier, grads.classifier);
      }
      double inv = 1.0 / static_cast<double>(stop - start);
      scale_in_place(gsum_weights, inv);
      scale_in_place(gsum_classifier, inv);

      sgd_momentum_step(state.model.weights, gsum_weights,
                        state.vel_weights, state.nu, cfg.momentum);
      sgd_momentum_step(state.model.classifier, gsum_classifier,
                        state.vel_classifier, state.nu, cfg.momentum);
    }

    double epoch_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::Numeric, "train/diverged",
                  "non-finite loss at epoch " + std::to_string(epoch));
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = epoch_loss;
    stats.lr = state.nu;
    stats.train_acc = eval_indices(train_idx);
    stats.test_acc = test_idx.empty() ? 0.0 : eval_indices(test_idx);
    state.history.push_back(stats);
    losses.push_back(epoch_loss);
    state.nu = adaptive_lr(state.nu, losses, cfg.min_rate(),
                           cfg.max_rate());
    state.epoch = epoch + 1;
  }
}

SgcnTrainState train_sgcn(const GraphDataset& dataset,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& test_idx,
                          const TrainSetup& setup, std::size_t kpca_dim,
                          std::size_t max_anchors) {
  SgcnTrainState state = init_sgcn_state(dataset, train_idx, setup, kpca_dim,
                                         max_anchors);
  if (state.norm) {
    GraphDataset scaled = normalized_copy(dataset, *state.norm);
    train_sgcn_epochs(state, scaled, train_idx, test_idx, setup,
                      setup.train.epochs);
  } else {
    train_sgcn_epochs(state, dataset, train_idx, test_idx, setup,
                      setup.train.epochs);
  }
  return state;
}

std::map<AblationMode, double> ablate(
    const GraphDataset& dataset, const std::vector<std::size_t>& train_idx,
    const std::vector<std::size_t>& test_idx, const TrainSetup& setup) {
  std::map<AblationMode, double> table;
  for (AblationMode mode : {AblationMode::FsvLa, AblationMode::LsvFa,
                            AblationMode::LsvLa}) {
    TrainSetup run = setup;
    run.train.ablation = mode;
    KgcnTrainState state = train_kgcn(dataset, train_idx, test_idx, run);
    table[mode] = state.history.empty() ? 0.0
                                        : state.history.back().test_acc;
  }
  return table;
}

}  // namespace kgcn
