#include "kgcn/skeleton.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

namespace kgcn {

namespace {

// SBU joint order: head, neck, torso, then left/right arm (shoulder, elbow,
// hand) and left/right leg (hip, knee, foot).
constexpr std::size_t kSbuJoints = 15;
constexpr std::size_t kTorsoJoint = 2;
constexpr std::pair<std::size_t, std::size_t> kBoneEdges[] = {
    {0, 1},  {1, 2},   {1, 3},   {3, 4},   {4, 5},   {1, 6},  {6, 7},
    {7, 8},  {2, 9},   {9, 10},  {10, 11}, {2, 12},  {12, 13}, {13, 14}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(),
                                   value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::Data, "skeleton/parse-error",
                "non-numeric field '" + std::string(field) + "' on line " +
                    std::to_string(line_no));
  }
  return value;
}

}  // namespace

void SkeletonSequence::validate() const {
  if (frames < 1) {
    throw Error(ErrorKind::Data, "skeleton/empty-sequence",
                "sequence '" + id + "' has no frames");
  }
  if (coords.size() != frames * persons * joints * 3) {
    throw Error(ErrorKind::Data, "skeleton/bad-record",
                "coordinate count " + std::to_string(coords.size()) +
                    " does not match " + std::to_string(frames) + "x" +
                    std::to_string(persons) + "x" + std::to_string(joints) +
                    "x3");
  }
  for (double c : coords) {
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::Numeric, "skeleton/non-finite",
                  "non-finite coordinate in sequence '" + id + "'");
    }
  }
}

std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::SkeletonTree: return "skeleton_tree";
    case Topology::FullyConnected: return "fully_connected";
  }
  return "unknown";
}

std::optional<Topology> topology_from_name(std::string_view name) {
  if (name == "skeleton_tree" || name == "tree") {
    return Topology::SkeletonTree;
  }
  if (name == "fully_connected" || name == "full") {
    return Topology::FullyConnected;
  }
  return std::nullopt;
}

SkeletonSequence parse_sbu(std::istream& in, std::size_t persons,
                           std::size_t joints) {
  const std::size_t values_per_row = persons * joints * 3;
  struct Row {
    double index;
    std::vector<double> values;
  };
  std::vector<Row> rows;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(rest);
        break;
      }
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != values_per_row + 1) {
      throw Error(ErrorKind::Data, "skeleton/bad-record",
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(values_per_row + 1));
    }
    Row row;
    row.index = parse_field(fields[0], line_no);
    row.values.reserve(values_per_row);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      row.values.push_back(parse_field(fields[f], line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorKind::Data, "skeleton/empty-sequence",
                "input contains no frames");
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.index < b.index; });

  SkeletonSequence seq;
  seq.frames = rows.size();
  seq.persons = persons;
  seq.joints = joints;
  seq.coords.reserve(rows.size() * values_per_row);
  for (const Row& row : rows) {
    seq.coords.insert(seq.coords.end(), row.values.begin(), row.values.end());
  }
  seq.validate();
  return seq;
}

std::vector<double> temporal_chunk(const Matrix& trajectory,
                                   std::size_t chunks) {
  if (trajectory.cols() != 3) {
    throw Error(ErrorKind::Data, "skeleton/bad-record",
                "trajectory must have 3 columns, got " +
                    std::to_string(trajectory.cols()));
  }
  const std::size_t frames = trajectory.rows();
  if (frames < 1 || chunks < 1) {
    throw Error(ErrorKind::Data, "skeleton/bad-record",
                "need at least one frame and one chunk");
  }
  std::vector<double> sums(chunks * 3, 0.0);
  std::vector<std::size_t> counts(chunks, 0);
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t c = t * chunks / frames;
    for (std::size_t a = 0; a < 3; ++a) sums[c * 3 + a] += trajectory(t, a);
    ++counts[c];
  }
  std::vector<double> out(chunks * 3, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    if (counts[c] > 0) {
      for (std::size_t a = 0; a < 3; ++a) {
        out[c * 3 + a] = sums[c * 3 + a] / static_cast<double>(counts[c]);
      }
    } else {
      // Frame 0 always lands in chunk 0, so c > 0 here.
      for (std::size_t a = 0; a < 3; ++a) {
        out[c * 3 + a] = out[(c - 1) * 3 + a];
      }
    }
  }
  return out;
}

LabeledGraph build_graph(const SkeletonSequence& seq, std::size_t chunks,
                         Topology topology, bool self_loops) {
  seq.validate();
  const std::size_t P = seq.persons;
  const std::size_t J = seq.joints;
  const std::size_t n = P * J;

  LabeledGraph g;
  g.label = seq.label;
  g.signals = Matrix(n, chunks * 3);
  g.node_names.reserve(n);
  Matrix trajectory(seq.frames, 3);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t t = 0; t < seq.frames; ++t) {
        for (std::size_t a = 0; a < 3; ++a) {
          trajectory(t, a) = seq.at(t, p, j, a);
        }
      }
      std::vector<double> desc = temporal_chunk(trajectory, chunks);
      std::size_t node = p * J + j;
      for (std::size_t d = 0; d < desc.size(); ++d) g.signals(node, d) = desc[d];
      g.node_names.push_back("p" + std::to_string(p) + "-j" +
                             std::to_string(j));
    }
  }

  Matrix edges(n, n);
  switch (topology) {
    case Topology::SkeletonTree: {
      if (J != kSbuJoints) {
        throw Error(ErrorKind::Data, "skeleton/bad-topology",
                    "skeleton tree needs " + std::to_string(kSbuJoints) +
                        " joints, got " + std::to_string(J));
      }
      for (std::size_t p = 0; p < P; ++p) {
        for (auto [a, b] : kBoneEdges) {
          edges(p * J + a, p * J + b) = 1.0;
          edges(p * J + b, p * J + a) = 1.0;
        }
      }
      // Chain consecutive persons through their torso joints.
      for (std::size_t p = 0; p + 1 < P; ++p) {
        std::size_t a = p * J + kTorsoJoint;
        std::size_t b = (p + 1) * J + kTorsoJoint;
        edges(a, b) = 1.0;
        edges(b, a) = 1.0;
      }
      break;
    }
    case Topology::FullyConnected:
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j) edges(i, j) = 1.0;
        }
      }
      break;
  }
  if (self_loops) edges = add_self_loops(edges);
  g.adjacency = row_normalize(edges);
  g.validate();
  return g;
}

std::size_t GraphDataset::class_count() const {
  int max_label = -1;
  for (const LabeledGraph& g : graphs) max_label = std::max(max_label, g.label);
  return static_cast<std::size_t>(max_label + 1);
}

GraphDataset synth_dataset(std::size_t classes, std::size_t samples_per_class,
                           std::uint64_t seed, std::size_t chunks,
                           Topology topology, bool self_loops) {
  if (classes < 2) {
    throw Error(ErrorKind::Data, "skeleton/bad-spec",
                "need at least 2 classes, got " + std::to_string(classes));
  }
  constexpr std::size_t P = 2;
  constexpr std::size_t J = kSbuJoints;
  // Rest pose roughly centered in [-1,1]^3, y up.
  constexpr double kPose[J][3] = {
      {0.00, 0.90, 0.0},   {0.00, 0.70, 0.0},   {0.00, 0.45, 0.0},
      {-0.20, 0.65, 0.0},  {-0.35, 0.45, 0.0},  {-0.45, 0.25, 0.0},
      {0.20, 0.65, 0.0},   {0.35, 0.45, 0.0},   {0.45, 0.25, 0.0},
      {-0.12, 0.20, 0.0},  {-0.14, -0.10, 0.0}, {-0.16, -0.40, 0.0},
      {0.12, 0.20, 0.0},   {0.14, -0.10, 0.0},  {0.16, -0.40, 0.0}};
  // Motion carries the class; the rest pose is scenery. Keeping the pose
  // small relative to the unit wave amplitude keeps class-irrelevant
  // variance from dominating the descriptors.
  constexpr double kPoseScale = 0.12;

  GraphDataset out;
  out.graphs.reserve(classes * samples_per_class);
  out.ids.reserve(classes * samples_per_class);
  Rng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;

  // Every class mixes the same bank of motion primitives (distinct temporal
  // frequencies, kept below the chunk sampling limit so temporal averaging
  // does not erase them). Class identity is a two-hot blend over the bank:
  // class pairs then differ along at least two independent motion axes, and
  // the low floor keeps off-pattern responses alive without letting any two
  // classes look alike.
  constexpr std::size_t M = 4;
  constexpr double kFreq[M] = {1.0, 1.6, 2.3, 3.1};
  auto blend = [](std::size_t c, std::size_t m) {
    std::size_t hot1 = c % M;
    std::size_t hot2 = (c + 1 + (c / M) % (M - 1)) % M;
    return 0.1 + 0.8 * ((m == hot1 || m == hot2) ? 1.0 : 0.0);
  };

  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < samples_per_class; ++s) {
      std::size_t frames = 40 + rng.below(21);
      double amp_jitter = rng.uniform(0.85, 1.15);
      double phase_jitter[M];
      double freq_jitter[M];
      for (std::size_t m = 0; m < M; ++m) {
        phase_jitter[m] = rng.uniform(-0.25, 0.25);
        freq_jitter[m] = rng.uniform(-0.1, 0.1);
      }
      // Per-joint gain scatter, fixed over time within a sample. Spreads the
      // nodes of one graph around the class pattern so downstream responses
      // vary within a graph instead of moving in lockstep.
      std::vector<double> joint_gain(P * J);
      for (double& g : joint_gain) g = rng.uniform(0.7, 1.3);

      SkeletonSequence seq;
      seq.frames = frames;
      seq.persons = P;
      seq.joints = J;
      seq.label = static_cast<int>(c);
      seq.id = "synth-c" + std::to_string(c) + "-s" + std::to_string(s);
      seq.coords.resize(frames * P * J * 3);

      for (std::size_t t = 0; t < frames; ++t) {
        double tau = static_cast<double>(t) / static_cast<double>(frames);
        for (std::size_t p = 0; p < P; ++p) {
          double side = p == 0 ? -0.1 : 0.1;
          for (std::size_t j = 0; j < J; ++j) {
            double wx = 0.0, wy = 0.0, wz = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
              // Spatial deployment of each primitive: a smooth per-joint
              // weight and a per-primitive direction.
              double weight =
                  0.7 + 0.3 * std::sin((static_cast<double>(j) + 1.0) *
                                       (1.7 * static_cast<double>(m) + 0.9));
              double phase = 0.9 * static_cast<double>(m) +
                             0.05 * static_cast<double>(j) + phase_jitter[m];
              double w = blend(c, m) * weight *
                         std::sin(two_pi * (kFreq[m] + freq_jitter[m]) * tau +
                                  phase);
              double angle = 0.5 * static_cast<double>(m) +
                             0.1 * static_cast<double>(j) +
                             0.15 * static_cast<double>(p);
              wx += w * std::cos(angle);
              wy += w * std::sin(angle);
              wz += 0.5 * w * std::sin(1.1 * static_cast<double>(m) +
                                       0.07 * static_cast<double>(j));
            }
            double gain = amp_jitter * joint_gain[p * J + j];
            seq.at(t, p, j, 0) = kPoseScale * kPose[j][0] + side + gain * wx +
                                 rng.normal(0.0, 0.03);
            seq.at(t, p, j, 1) = kPoseScale * kPose[j][1] + gain * wy +
                                 rng.normal(0.0, 0.03);
            seq.at(t, p, j, 2) = kPoseScale * kPose[j][2] + gain * wz +
                                 rng.normal(0.0, 0.03);
          }
        }
      }
      out.graphs.push_back(build_graph(seq, chunks, topology, self_loops));
      out.ids.push_back(seq.id);
    }
  }
  return out;
}

Split synth_split(std::size_t classes, std::size_t train_per_class,
                  std::size_t test_per_class) {
  Split split;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < train_per_class; ++s) {
      split.train.push_back("synth-c" + std::to_string(c) + "-s" +
                            std::to_string(s));
    }
    for (std::size_t s = 0; s < test_per_class; ++s) {
      split.test.push_back("synth-c" + std::to_string(c) + "-s" +
                           std::to_string(train_per_class + s));
    }
  }
  return split;
}

Split load_split(std::istream& in) {
  Split split;
  std::vector<std::string>* target = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    if (sv == "[train]") {
      target = &split.train;
    } else if (sv == "[test]") {
      target = &split.test;
    } else if (sv.front() == '[') {
      throw Error(ErrorKind::Data, "skeleton/bad-split",
                  "unknown section '" + std::string(sv) + "' on line " +
                      std::to_string(line_no));
    } else if (target == nullptr) {
      throw Error(ErrorKind::Data, "skeleton/bad-split",
                  "id before any section header on line " +
                      std::to_string(line_no));
    } else {
      target->emplace_back(sv);
    }
  }
  return split;
}

void save_split(const Split& split, std::ostream& out) {
  out << "[train]\n";
  for (const std::string& id : split.train) out << id << "\n";
  out << "[test]\n";
  for (const std::string& id : split.test) out << id << "\n";
}

std::vector<std::size_t> resolve_ids(const GraphDataset& dataset,
                                     const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = std::find(dataset.ids.begin(), dataset.ids.end(), id);
    if (it == dataset.ids.end()) {
      throw Error(ErrorKind::Data, "skeleton/unknown-id",
                  "id '" + id + "' not in dataset");
    }
    out.push_back(static_cast<std::size_t>(it - dataset.ids.begin()));
  }
  return out;
}

NormStats fit_minmax(const GraphDataset& dataset,
                     const std::vector<std::size_t>& indices) {
  if (indices.empty()) {
    throw Error(ErrorKind::Data, "skeleton/empty-split",
                "cannot fit normalization on an empty index set");
  }
  const std::size_t dim = dataset.graphs[indices[0]].signal_dim();
  NormStats stats;
  stats.lo.assign(dim, std::numeric_limits<double>::infinity());
  stats.hi.assign(dim, -std::numeric_limits<double>::infinity());
  for (std::size_t idx : indices) {
    if (idx >= dataset.graphs.size()) {
      throw Error(ErrorKind::Data, "skeleton/unknown-id",
                  "index " + std::to_string(idx) + " out of range");
    }
    const Matrix& sig = dataset.graphs[idx].signals;
    if (sig.cols() != dim) {
      throw Error(ErrorKind::Data, "graph/shape-mismatch",
                  "signal dimension varies across the dataset");
    }
    for (std::size_t i = 0; i < sig.rows(); ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        stats.lo[d] = std::min(stats.lo[d], sig(i, d));
        stats.hi[d] = std::max(stats.hi[d], sig(i, d));
      }
    }
  }
  return stats;
}

Matrix apply_minmax(const NormStats& stats, const Matrix& signals) {
  if (signals.cols() != stats.lo.size()) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                "signals have " + std::to_string(signals.cols()) +
                    " dimensions, stats " + std::to_string(stats.lo.size()));
  }
  Matrix out(signals.rows(), signals.cols());
  for (std::size_t i = 0; i < signals.rows(); ++i) {
    for (std::size_t d = 0; d < signals.cols(); ++d) {
      double span = stats.hi[d] - stats.lo[d];
      if (span <= 0.0) {
        out(i, d) = 0.5;
      } else {
        double v = (signals(i, d) - stats.lo[d]) / span;
        out(i, d) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

void normalize_dataset(GraphDataset& dataset, const NormStats& stats) {
  for (LabeledGraph& g : dataset.graphs) {
    g.signals = apply_minmax(stats, g.signals);
  }
}

GraphDataset load_sbu_dir(const std::string& root, std::size_t persons,
                          std::size_t joints, std::size_t chunks,
                          Topology topology, bool self_loops) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::Data, "skeleton/bad-path",
                "'" + root + "' is not a directory");
  }
  std::vector<std::string> class_dirs;
  for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) {
      class_dirs.push_back(entry.path().filename().string());
    }
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) {
    throw Error(ErrorKind::Data, "skeleton/bad-path",
                "no class subdirectories under '" + root + "'");
  }

  GraphDataset out;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    fs::path dir = fs::path(root) / class_dirs[c];
    std::vector<fs::path> files;
    for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      std::ifstream in(file);
      if (!in) {
        throw Error(ErrorKind::Data, "skeleton/bad-path",
                    "cannot open '" + file.string() + "'");
      }
      SkeletonSequence seq;
      try {
        seq = parse_sbu(in, persons, joints);
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(),
                    std::string(e.what()) + " in '" + file.string() + "'");
      }
      seq.label = static_cast<int>(c);
      seq.id = class_dirs[c] + "/" + file.stem().string();
      out.graphs.push_back(build_graph(seq, chunks, topology, self_loops));
      out.ids.push_back(seq.id);
    }
  }
  return out;
}

}  // namespace kgcn
