#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgcn/graph.hpp"
#include "kgcn/numcore.hpp"

namespace kgcn {

/// A multi-person joint-coordinate sequence. coords is a flat
/// T x P x J x 3 array, frame-major, then person, then joint, with
/// (x, y, z) innermost.
struct SkeletonSequence {
  std::size_t frames = 0;
  std::size_t persons = 2;
  std::size_t joints = 15;
  std::vector<double> coords;
  int label = 0;
  std::string id;

  double at(std::size_t t, std::size_t p, std::size_t j,
            std::size_t axis) const {
    return coords[((t * persons + p) * joints + j) * 3 + axis];
  }
  double& at(std::size_t t, std::size_t p, std::size_t j, std::size_t axis) {
    return coords[((t * persons + p) * joints + j) * 3 + axis];
  }

  void validate() const;
};

enum class Topology { SkeletonTree, FullyConnected };

std::string_view topology_name(Topology t);
std::optional<Topology> topology_from_name(std::string_view name);

/// Parses comma-separated rows "frame_index, x, y, z, ..." with
/// persons*joints*3 coordinates per row. Rows are reordered by frame index.
SkeletonSequence parse_sbu(std::istream& in, std::size_t persons = 2,
                           std::size_t joints = 15);

/// Splits a T x 3 trajectory into `chunks` equal time slices (frame t goes
/// to chunk floor(t*chunks/T)) and concatenates per-chunk coordinate means.
/// A chunk left empty by short trajectories inherits the nearest preceding
/// chunk's mean. Result length is exactly 3*chunks.
std::vector<double> temporal_chunk(const Matrix& trajectory,
                                   std::size_t chunks);

/// One node per (person, joint) trajectory, person-major. Node signals are
/// temporal_chunk descriptors; adjacency follows the topology, with optional
/// self-loops, row-normalized.
LabeledGraph build_graph(const SkeletonSequence& seq, std::size_t chunks,
                         Topology topology, bool self_loops = true);

struct GraphDataset {
  std::vector<LabeledGraph> graphs;
  std::vector<std::string> ids;

  std::size_t size() const { return graphs.size(); }
  std::size_t class_count() const;
};

/// Seeded synthetic two-person action dataset: each class is a distinct
/// smooth sinusoidal motion pattern over a common humanoid rest pose, plus
/// small coordinate noise. Samples are emitted class-major with ids
/// "synth-c<label>-s<index>".
GraphDataset synth_dataset(std::size_t classes, std::size_t samples_per_class,
                           std::uint64_t seed, std::size_t chunks = 8,
                           Topology topology = Topology::SkeletonTree,
                           bool self_loops = true);

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Split matching synth_dataset ids: per class, the first train_per_class
/// samples train and the next test_per_class test.
Split synth_split(std::size_t classes, std::size_t train_per_class,
                  std::size_t test_per_class);

/// Plain-text split format: "[train]" / "[test]" section headers, one id
/// per line, blank lines ignored.
Split load_split(std::istream& in);
void save_split(const Split& split, std::ostream& out);

/// Maps ids to dataset indices; unknown ids raise "skeleton/unknown-id".
std::vector<std::size_t> resolve_ids(const GraphDataset& dataset,
                                     const std::vector<std::string>& ids);

/// Per-dimension affine map fitted on training signals only.
struct NormStats {
  std::vector<double> lo;
  std::vector<double> hi;
};

NormStats fit_minmax(const GraphDataset& dataset,
                     const std::vector<std::size_t>& indices);

/// Maps x to (x-lo)/(hi-lo), clamped to [0,1]; constant dimensions map
/// to 0.5. Training signals land in [0,1] exactly; out-of-range test values
/// are clamped so histogram-intersection stays in domain.
Matrix apply_minmax(const NormStats& stats, const Matrix& signals);
void normalize_dataset(GraphDataset& dataset, const NormStats& stats);

/// Loads a directory tree of sequence files: one subdirectory per class
/// (sorted name order gives the label index), one parseable text file per
/// sequence, id "<class-dir>/<file-stem>".
GraphDataset load_sbu_dir(const std::string& root, std::size_t persons,
                          std::size_t joints, std::size_t chunks,
                          Topology topology, bool self_loops = true);

}  // namespace kgcn
