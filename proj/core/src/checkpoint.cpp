#include "kgcn/checkpoint.hpp"

#include <filesystem>
#include <fstream>

namespace kgcn {

using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorKind::Data, "train/corrupt-checkpoint", what);
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) corrupt(std::string("missing key '") + key + "'");
  return *it;
}

json kernel_to_json(const KernelSpec& spec) {
  return json{{"kind", std::string(kernel_name(spec.kind))},
              {"beta", spec.beta},
              {"p", spec.p},
              {"a", spec.a},
              {"b", spec.b},
              {"sigma2", spec.sigma2}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec spec;
  try {
    auto kind = kernel_from_name(field(j, "kind").get<std::string>());
    if (!kind) corrupt("unknown kernel kind");
    spec.kind = *kind;
    spec.beta = field(j, "beta").get<double>();
    spec.p = field(j, "p").get<int>();
    spec.a = field(j, "a").get<double>();
    spec.b = field(j, "b").get<double>();
    spec.sigma2 = field(j, "sigma2").get<double>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad kernel spec: ") + e.what());
  }
  return spec;
}

json norm_to_json(const NormStats& stats) {
  return json{{"lo", stats.lo}, {"hi", stats.hi}};
}

NormStats norm_from_json(const json& j) {
  NormStats stats;
  try {
    stats.lo = field(j, "lo").get<std::vector<double>>();
    stats.hi = field(j, "hi").get<std::vector<double>>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad normalization stats: ") + e.what());
  }
  if (stats.lo.size() != stats.hi.size()) {
    corrupt("normalization bounds of different lengths");
  }
  return stats;
}

json projector_to_json(const KpcaProjector& proj) {
  return json{{"kernel", kernel_to_json(proj.spec)},
              {"anchors", matrix_to_json(proj.anchors)},
              {"gram_col_mean", proj.gram_col_mean},
              {"gram_total_mean", proj.gram_total_mean},
              {"axes", matrix_to_json(proj.axes)},
              {"eigvals", proj.eigvals}};
}

KpcaProjector projector_from_json(const json& j) {
  KpcaProjector proj;
  try {
    proj.spec = kernel_from_json(field(j, "kernel"));
    proj.anchors = matrix_from_json(field(j, "anchors"));
    proj.gram_col_mean =
        field(j, "gram_col_mean").get<std::vector<double>>();
    proj.gram_total_mean = field(j, "gram_total_mean").get<double>();
    proj.axes = matrix_from_json(field(j, "axes"));
    proj.eigvals = field(j, "eigvals").get<std::vector<double>>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad projector: ") + e.what());
  }
  return proj;
}

json history_to_json(const std::vector<EpochStats>& history) {
  json arr = json::array();
  for (const EpochStats& s : history) {
    arr.push_back(json{{"epoch", s.epoch},
                       {"loss", s.loss},
                       {"lr", s.lr},
                       {"train_acc", s.train_acc},
                       {"test_acc", s.test_acc}});
  }
  return arr;
}

std::vector<EpochStats> history_from_json(const json& j) {
  std::vector<EpochStats> history;
  if (!j.is_array()) corrupt("history must be an array");
  try {
    for (const json& row : j) {
      EpochStats s;
      s.epoch = field(row, "epoch").get<std::size_t>();
      s.loss = field(row, "loss").get<double>();
      s.lr = field(row, "lr").get<double>();
      s.train_acc = field(row, "train_acc").get<double>();
      s.test_acc = field(row, "test_acc").get<double>();
      history.push_back(s);
    }
  } catch (const json::exception& e) {
    corrupt(std::string("bad history row: ") + e.what());
  }
  return history;
}

json graph_to_json(const LabeledGraph& g) {
  json j{{"signals", matrix_to_json(g.signals)},
         {"adjacency", matrix_to_json(g.adjacency)},
         {"label", g.label}};
  if (!g.node_names.empty()) j["node_names"] = g.node_names;
  return j;
}

LabeledGraph graph_from_json(const json& j) {
  LabeledGraph g;
  try {
    g.signals = matrix_from_json(field(j, "signals"));
    g.adjacency = matrix_from_json(field(j, "adjacency"));
    g.label = field(j, "label").get<int>();
    if (j.contains("node_names")) {
      g.node_names = j["node_names"].get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    corrupt(std::string("bad graph: ") + e.what());
  }
  return g;
}

json dataset_to_json(const GraphDataset& ds) {
  json graphs = json::array();
  for (const LabeledGraph& g : ds.graphs) graphs.push_back(graph_to_json(g));
  return json{{"graphs", std::move(graphs)}, {"ids", ds.ids}};
}

GraphDataset dataset_from_json(const json& j) {
  GraphDataset ds;
  const json& graphs = field(j, "graphs");
  if (!graphs.is_array()) corrupt("dataset graphs must be an array");
  for (const json& g : graphs) ds.graphs.push_back(graph_from_json(g));
  try {
    ds.ids = field(j, "ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad dataset ids: ") + e.what());
  }
  if (ds.ids.size() != ds.graphs.size()) {
    corrupt("dataset ids and graphs differ in count");
  }
  return ds;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  try {
    rows = field(j, "rows").get<std::size_t>();
    cols = field(j, "cols").get<std::size_t>();
    data = field(j, "data").get<std::vector<double>>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad matrix: ") + e.what());
  }
  if (data.size() != rows * cols) {
    corrupt("matrix data length does not match rows*cols");
  }
  return Matrix(rows, cols, std::move(data));
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json j;
  j["version"] = ck.version;
  j["config"] = ck.config;
  j["model"] = nullptr;
  j["optimizer"] = nullptr;
  j["schedule"] = nullptr;
  j["epoch"] = 0;
  j["history"] = json::array();

  if (ck.kgcn) {
    const KgcnTrainState& s = *ck.kgcn;
    json model{{"kind", "kgcn"},
               {"kernel", kernel_to_json(s.model.spec)},
               {"hops", s.model.hops},
               {"pool", std::string(pool_name(s.model.pool))},
               {"bank",
                json{{"filters", s.model.bank.filters},
                     {"supports", s.model.bank.supports},
                     {"support", matrix_to_json(s.model.bank.support)},
                     {"alphas", matrix_to_json(s.model.bank.alphas)}}},
               {"classifier", matrix_to_json(s.model.classifier)}};
    if (s.norm) model["normalization"] = norm_to_json(*s.norm);
    j["model"] = std::move(model);
    j["optimizer"] =
        json{{"velocities",
              json{{"support", matrix_to_json(s.vel_support)},
                   {"alphas", matrix_to_json(s.vel_alphas)},
                   {"classifier", matrix_to_json(s.vel_classifier)}}}};
    j["schedule"] = json{{"nu", s.nu}};
    j["epoch"] = s.epoch;
    j["history"] = history_to_json(s.history);
  } else if (ck.sgcn) {
    const SgcnTrainState& s = *ck.sgcn;
    json model{{"kind", "sgcn"},
               {"hops", s.model.hops},
               {"pool", std::string(pool_name(s.model.pool))},
               {"weights", matrix_to_json(s.model.weights)},
               {"classifier", matrix_to_json(s.model.classifier)},
               {"projector", projector_to_json(s.projector)}};
    if (s.norm) model["normalization"] = norm_to_json(*s.norm);
    j["model"] = std::move(model);
    j["optimizer"] =
        json{{"velocities",
              json{{"weights", matrix_to_json(s.vel_weights)},
                   {"classifier", matrix_to_json(s.vel_classifier)}}}};
    j["schedule"] = json{{"nu", s.nu}};
    j["epoch"] = s.epoch;
    j["history"] = history_to_json(s.history);
  } else if (ck.projector) {
    j["model"] = json{{"kind", "projector"},
                      {"projector", projector_to_json(*ck.projector)}};
  }
  if (ck.dataset) j["dataset"] = dataset_to_json(*ck.dataset);

  std::filesystem::path target(path);
  std::filesystem::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::Data, "train/io-error",
                  "cannot write '" + temp.string() + "'");
    }
    out << j.dump(1) << "\n";
    if (!out) {
      throw Error(ErrorKind::Data, "train/io-error",
                  "short write to '" + temp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    throw Error(ErrorKind::Data, "train/io-error",
                "cannot rename '" + temp.string() + "' to '" +
                    target.string() + "': " + ec.message());
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Data, "train/corrupt-checkpoint",
                "cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    corrupt(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) corrupt("top level is not an object");

  int version = 0;
  try {
    version = field(j, "version").get<int>();
  } catch (const json::exception& e) {
    corrupt(std::string("bad version: ") + e.what());
  }
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::Data, "train/unsupported-version",
                "checkpoint version " + std::to_string(version) +
                    ", this build reads version " +
                    std::to_string(kCheckpointVersion));
  }

  Checkpoint ck;
  ck.version = version;
  ck.config = j.contains("config") ? j["config"] : json::object();

  const json& model = field(j, "model");
  if (model.is_object()) {
    std::string kind;
    try {
      kind = field(model, "kind").get<std::string>();
    } catch (const json::exception& e) {
      corrupt(std::string("bad model kind: ") + e.what());
    }
    if (kind == "kgcn") {
      KgcnTrainState s;
      s.model.spec = kernel_from_json(field(model, "kernel"));
      const json& bank = field(model, "bank");
      try {
        s.model.hops = field(model, "hops").get<int>();
        auto pool = pool_from_name(field(model, "pool").get<std::string>());
        if (!pool) corrupt("unknown pool");
        s.model.pool = *pool;
        s.model.bank.filters = field(bank, "filters").get<std::size_t>();
        s.model.bank.supports = field(bank, "supports").get<std::size_t>();
      } catch (const json::exception& e) {
        corrupt(std::string("bad model fields: ") + e.what());
      }
      s.model.bank.support = matrix_from_json(field(bank, "support"));
      s.model.bank.alphas = matrix_from_json(field(bank, "alphas"));
      s.model.classifier = matrix_from_json(field(model, "classifier"));
      if (model.contains("normalization")) {
        s.norm = norm_from_json(model["normalization"]);
      }
      const json& vel = field(field(j, "optimizer"), "velocities");
      s.vel_support = matrix_from_json(field(vel, "support"));
      s.vel_alphas = matrix_from_json(field(vel, "alphas"));
      s.vel_classifier = matrix_from_json(field(vel, "classifier"));
      try {
        s.nu = field(field(j, "schedule"), "nu").get<double>();
        s.epoch = field(j, "epoch").get<std::size_t>();
      } catch (const json::exception& e) {
        corrupt(std::string("bad schedule: ") + e.what());
      }
      s.history = history_from_json(field(j, "history"));
      ck.kgcn = std::move(s);
    } else if (kind == "sgcn") {
      SgcnTrainState s;
      try {
        s.model.hops = field(model, "hops").get<int>();
        auto pool = pool_from_name(field(model, "pool").get<std::string>());
        if (!pool) corrupt("unknown pool");
        s.model.pool = *pool;
      } catch (const json::exception& e) {
        corrupt(std::string("bad model fields: ") + e.what());
      }
      s.model.weights = matrix_from_json(field(model, "weights"));
      s.model.classifier = matrix_from_json(field(model, "classifier"));
      s.projector = projector_from_json(field(model, "projector"));
      if (model.contains("normalization")) {
        s.norm = norm_from_json(model["normalization"]);
      }
      const json& vel = field(field(j, "optimizer"), "velocities");
      s.vel_weights = matrix_from_json(field(vel, "weights"));
      s.vel_classifier = matrix_from_json(field(vel, "classifier"));
      try {
        s.nu = field(field(j, "schedule"), "nu").get<double>();
        s.epoch = field(j, "epoch").get<std::size_t>();
      } catch (const json::exception& e) {
        corrupt(std::string("bad schedule: ") + e.what());
      }
      s.history = history_from_json(field(j, "history"));
      ck.sgcn = std::move(s);
    } else if (kind == "projector") {
      ck.projector = projector_from_json(field(model, "projector"));
    } else {
      corrupt("unknown model kind '" + kind + "'");
    }
  }
  if (j.contains("dataset") && !j["dataset"].is_null()) {
    ck.dataset = dataset_from_json(j["dataset"]);
  }
  return ck;
}

}  // namespace kgcn
