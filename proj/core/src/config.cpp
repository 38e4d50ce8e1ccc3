#include "kgcn/config.hpp"

#include <charconv>
#include <map>

namespace kgcn {

using nlohmann::json;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Usage, "cli/bad-value",
              "config key '" + key + "': " + why);
}

void flatten(const json& node, const std::string& prefix,
             std::map<std::string, json>& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      flatten(it.value(), key, out);
    }
  } else {
    out[prefix] = node;
  }
}

class KeyBag {
 public:
  explicit KeyBag(std::map<std::string, json> entries)
      : entries_(std::move(entries)) {}

  std::optional<json> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    json value = std::move(it->second);
    entries_.erase(it);
    return value;
  }

  double take_double(const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (!v->is_number()) bad_value(key, "expected a number");
    return v->get<double>();
  }

  std::size_t take_count(const std::string& key, std::size_t fallback,
                         std::size_t min_value = 0) {
    auto v = take(key);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      bad_value(key, "expected a nonnegative integer");
    }
    auto n = v->get<std::size_t>();
    if (n < min_value) {
      bad_value(key, "must be at least " + std::to_string(min_value));
    }
    return n;
  }

  int take_int(const std::string& key, int fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) bad_value(key, "expected an integer");
    return v->get<int>();
  }

  bool take_bool(const std::string& key, bool fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (!v->is_boolean()) bad_value(key, "expected true or false");
    return v->get<bool>();
  }

  std::string take_string(const std::string& key,
                          const std::string& fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (!v->is_string()) bad_value(key, "expected a string");
    return v->get<std::string>();
  }

  /// Count lists ("1,5,10") arrive as strings, but a single count may come
  /// through an override as a bare integer; accept both.
  std::string take_counts(const std::string& key, const std::string& fallback) {
    auto v = take(key);
    if (!v) return fallback;
    if (v->is_number_integer() && v->get<long long>() >= 1) {
      return std::to_string(v->get<long long>());
    }
    if (!v->is_string()) {
      bad_value(key, "expected a count list like \"1,5,10\"");
    }
    return v->get<std::string>();
  }

  const std::map<std::string, json>& rest() const { return entries_; }

 private:
  std::map<std::string, json> entries_;
};

}  // namespace

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view item(text.data() + pos,
                          (comma == std::string::npos ? text.size() : comma) -
                              pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    unsigned long long value = 0;
    auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size() || value < 1) {
      throw Error(ErrorKind::Usage, "cli/bad-value",
                  "expected a comma-separated list of positive integers, "
                  "got '" + text + "'");
    }
    out.push_back(static_cast<std::size_t>(value));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) {
    throw Error(ErrorKind::Usage, "cli/bad-value", "empty count list");
  }
  return out;
}

TrainSetup RunConfig::to_setup() const {
  TrainSetup setup;
  setup.kernel = kernel;
  setup.filters = filters;
  setup.supports = supports;
  setup.hops = effective_hops();
  setup.pool = pool;
  setup.normalize = normalize;
  setup.train = train;
  return setup;
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["out"] = out;
  j["kernel"] = {{"kind", std::string(kernel_name(kernel.kind))},
                 {"beta", kernel.beta},
                 {"p", kernel.p},
                 {"a", kernel.a},
                 {"b", kernel.b},
                 {"sigma2", kernel.sigma2}};
  j["graph"] = {{"self_loops", self_loops}, {"hops", hops}};
  j["skeleton"] = {{"chunks", chunks},
                   {"topology", std::string(topology_name(topology))},
                   {"persons", persons},
                   {"joints", joints}};
  j["kpca"] = {{"H", kpca_dim}, {"max_anchors", kpca_max_anchors}};
  j["model"] = {{"kind", model_kind},
                {"K", filters},
                {"N", supports},
                {"r", effective_hops()},
                {"pool", std::string(pool_name(pool))}};
  j["train"] = {{"lr0", train.lr0},
                {"momentum", train.momentum},
                {"batch", train.batch},
                {"epochs", train.epochs},
                {"ablation", std::string(ablation_name(train.ablation))},
                {"lr_min", train.min_rate()},
                {"lr_max", train.max_rate()},
                {"resume", resume}};
  j["data"] = {{"kind", data_kind},
               {"path", data_path},
               {"split", split_path},
               {"classes", classes},
               {"samples_per_class", samples_per_class},
               {"train_per_class", train_per_class},
               {"test_per_class", test_per_class},
               {"normalize", normalize}};
  j["sweep"] = {{"K", sweep_filters}, {"N", sweep_supports}};
  return j;
}

RunConfig parse_run_config(
    const json& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  if (!file.is_object() && !file.is_null()) {
    throw Error(ErrorKind::Usage, "cli/bad-config",
                "config file must hold a JSON object");
  }
  std::map<std::string, json> entries;
  if (file.is_object()) flatten(file, "", entries);
  for (const auto& [key, text] : overrides) {
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;  // bare words are strings
    }
    entries[key] = std::move(value);
  }
  KeyBag bag(std::move(entries));

  RunConfig cfg;

  auto seed_value = bag.take("seed");
  if (!seed_value) {
    throw Error(ErrorKind::Usage, "cli/missing-seed",
                "config must provide an integer 'seed'");
  }
  if (!seed_value->is_number_integer() && !seed_value->is_number_unsigned()) {
    bad_value("seed", "expected an integer");
  }
  cfg.seed = seed_value->get<std::uint64_t>();
  cfg.out = bag.take_string("out", "");

  std::string kind_name = bag.take_string("kernel.kind", "gaussian");
  auto kind = kernel_from_name(kind_name);
  if (!kind) bad_value("kernel.kind", "unknown kernel '" + kind_name + "'");
  cfg.kernel = KernelSpec::defaults(*kind);
  cfg.kernel.beta = bag.take_double("kernel.beta", cfg.kernel.beta);
  cfg.kernel.p = bag.take_int("kernel.p", cfg.kernel.p);
  cfg.kernel.a = bag.take_double("kernel.a", cfg.kernel.a);
  cfg.kernel.b = bag.take_double("kernel.b", cfg.kernel.b);
  cfg.kernel.sigma2 = bag.take_double("kernel.sigma2", cfg.kernel.sigma2);
  try {
    cfg.kernel.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Usage, "cli/bad-value", e.what());
  }

  cfg.self_loops = bag.take_bool("graph.self_loops", cfg.self_loops);
  cfg.hops = bag.take_int("graph.hops", cfg.hops);
  if (cfg.hops < 1) bad_value("graph.hops", "must be >= 1");

  cfg.chunks = bag.take_count("skeleton.chunks", cfg.chunks, 1);
  std::string topo_name =
      bag.take_string("skeleton.topology",
                      std::string(topology_name(cfg.topology)));
  auto topo = topology_from_name(topo_name);
  if (!topo) {
    bad_value("skeleton.topology", "unknown topology '" + topo_name + "'");
  }
  cfg.topology = *topo;
  cfg.persons = bag.take_count("skeleton.persons", cfg.persons, 1);
  cfg.joints = bag.take_count("skeleton.joints", cfg.joints, 1);

  cfg.kpca_dim = bag.take_count("kpca.H", cfg.kpca_dim, 1);
  cfg.kpca_max_anchors =
      bag.take_count("kpca.max_anchors", cfg.kpca_max_anchors, 2);

  cfg.model_kind = bag.take_string("model.kind", cfg.model_kind);
  if (cfg.model_kind != "kgcn" && cfg.model_kind != "sgcn") {
    bad_value("model.kind", "expected kgcn or sgcn");
  }
  cfg.filters = bag.take_count("model.K", cfg.filters, 1);
  cfg.supports = bag.take_count("model.N", cfg.supports, 1);
  if (auto r = bag.take("model.r")) {
    if (!r->is_number_integer()) bad_value("model.r", "expected an integer");
    cfg.model_r = r->get<int>();
    if (*cfg.model_r < 1) bad_value("model.r", "must be >= 1");
  }
  std::string pool_text =
      bag.take_string("model.pool", std::string(pool_name(cfg.pool)));
  auto pool = pool_from_name(pool_text);
  if (!pool) bad_value("model.pool", "expected mean or max");
  cfg.pool = *pool;

  cfg.train.lr0 = bag.take_double("train.lr0", cfg.train.lr0);
  cfg.train.momentum = bag.take_double("train.momentum", cfg.train.momentum);
  cfg.train.batch = bag.take_count("train.batch", cfg.train.batch, 1);
  cfg.train.epochs = bag.take_count("train.epochs", cfg.train.epochs);
  std::string ablation_text =
      bag.take_string("train.ablation",
                      std::string(ablation_name(cfg.train.ablation)));
  auto mode = ablation_from_name(ablation_text);
  if (!mode) {
    bad_value("train.ablation", "expected fsv_la, lsv_fa or lsv_la");
  }
  cfg.train.ablation = *mode;
  cfg.train.lr_min = bag.take_double("train.lr_min", cfg.train.lr_min);
  cfg.train.lr_max = bag.take_double("train.lr_max", cfg.train.lr_max);
  cfg.train.seed = cfg.seed;
  cfg.resume = bag.take_string("train.resume", cfg.resume);
  try {
    cfg.train.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Usage, "cli/bad-value", e.what());
  }

  cfg.data_kind = bag.take_string("data.kind", cfg.data_kind);
  if (cfg.data_kind != "synth" && cfg.data_kind != "sbu" &&
      cfg.data_kind != "container") {
    bad_value("data.kind", "expected synth, sbu or container");
  }
  cfg.data_path = bag.take_string("data.path", cfg.data_path);
  cfg.split_path = bag.take_string("data.split", cfg.split_path);
  cfg.classes = bag.take_count("data.classes", cfg.classes, 2);
  cfg.samples_per_class =
      bag.take_count("data.samples_per_class", cfg.samples_per_class);
  cfg.train_per_class =
      bag.take_count("data.train_per_class", cfg.train_per_class, 1);
  cfg.test_per_class =
      bag.take_count("data.test_per_class", cfg.test_per_class);
  cfg.normalize = bag.take_bool("data.normalize", cfg.normalize);
  // Histogram intersection is only defined on [0,1]; normalization is not
  // optional there.
  if (cfg.kernel.kind == KernelKind::HistogramIntersection) {
    cfg.normalize = true;
  }

  cfg.sweep_filters = bag.take_counts("sweep.K", cfg.sweep_filters);
  cfg.sweep_supports = bag.take_counts("sweep.N", cfg.sweep_supports);
  parse_count_list(cfg.sweep_filters);
  parse_count_list(cfg.sweep_supports);

  if (!bag.rest().empty()) {
    std::string keys;
    for (const auto& [key, value] : bag.rest()) {
      if (!keys.empty()) keys += ", ";
      keys += key;
    }
    throw Error(ErrorKind::Usage, "cli/unknown-key",
                "unknown config keys: " + keys);
  }
  return cfg;
}

}  // namespace kgcn
