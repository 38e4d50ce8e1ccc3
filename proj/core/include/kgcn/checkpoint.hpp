#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "kgcn/kpca.hpp"
#include "kgcn/skeleton.hpp"
#include "kgcn/train.hpp"

namespace kgcn {

inline constexpr int kCheckpointVersion = 1;

/// The one persistent container: trained models with their optimizer and
/// schedule state, standalone projectors, and inline datasets all share it.
/// Top-level JSON keys: version, config, model, optimizer, schedule, epoch,
/// history, and optionally dataset.
struct Checkpoint {
  int version = kCheckpointVersion;
  nlohmann::json config = nlohmann::json::object();
  std::optional<KgcnTrainState> kgcn;
  std::optional<SgcnTrainState> sgcn;
  std::optional<KpcaProjector> projector;
  std::optional<GraphDataset> dataset;
};

/// Atomic write (temp file, then rename). Doubles survive the round trip
/// bit-exactly.
void save_checkpoint(const Checkpoint& ck, const std::string& path);

/// Errors: "train/corrupt-checkpoint" on unreadable or malformed content,
/// "train/unsupported-version" on a version this build does not know.
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace kgcn
