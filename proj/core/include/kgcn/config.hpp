#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgcn/kernels.hpp"
#include "kgcn/model.hpp"
#include "kgcn/skeleton.hpp"
#include "kgcn/train.hpp"

namespace kgcn {

/// Union of every module's configuration, assembled from a JSON config file
/// plus dotted-path overrides. Unknown keys are rejected; `seed` is the one
/// mandatory key.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out;

  KernelSpec kernel = KernelSpec::defaults(KernelKind::Gaussian);

  bool self_loops = true;
  int hops = 1;

  std::size_t chunks = 8;
  Topology topology = Topology::SkeletonTree;
  std::size_t persons = 2;
  std::size_t joints = 15;

  std::size_t kpca_dim = 16;
  std::size_t kpca_max_anchors = 2000;

  std::string model_kind = "kgcn";
  std::size_t filters = 5;
  std::size_t supports = 4;
  std::optional<int> model_r;
  Pool pool = Pool::Mean;

  TrainConfig train;
  std::string resume;

  std::string data_kind = "synth";
  std::string data_path;
  std::string split_path;
  std::size_t classes = 4;
  std::size_t samples_per_class = 0;
  std::size_t train_per_class = 50;
  std::size_t test_per_class = 25;
  /// Min-max per-dimension scaling fitted on the training split. Kernel
  /// responses are scale-sensitive, so this is on by default; histogram
  /// intersection additionally requires it (forced on).
  bool normalize = true;

  std::string sweep_filters = "1,5,10";
  std::string sweep_supports = "1,4,8";

  /// model.r wins when given, otherwise graph.hops.
  int effective_hops() const { return model_r ? *model_r : hops; }

  TrainSetup to_setup() const;

  /// Fully resolved nested echo, written into every run's output directory.
  nlohmann::json to_json() const;
};

/// Builds a RunConfig from the config file contents plus (key, value)
/// overrides where keys are dotted paths. Values are parsed as JSON when
/// possible and fall back to strings. Unknown keys raise "cli/unknown-key";
/// a missing seed raises "cli/missing-seed".
RunConfig parse_run_config(
    const nlohmann::json& file,
    const std::vector<std::pair<std::string, std::string>>& overrides);

/// "1,5,10" -> {1, 5, 10}; raises "cli/bad-value" on junk.
std::vector<std::size_t> parse_count_list(const std::string& text);

}  // namespace kgcn
