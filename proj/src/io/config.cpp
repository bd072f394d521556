// Copyright 2026 The dpzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpzero/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "dpzero/errors.hpp"

namespace dpzero {

namespace {

// Typed access to one JSON object with error paths and unknown-key checks.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where(), "expected an object");
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::int64_t positive(const std::string& key, std::int64_t fallback) {
    const std::int64_t v = integer(key, fallback);
    if (v <= 0) throw ConfigError(at(key), "must be a positive integer");
    return v;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(at(key), "expected a nonnegative integer seed");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  template <typename Parse>
  auto choice(const std::string& key, const std::string& fallback, Parse parse,
              const char* options) {
    const std::string name = text(key, fallback);
    auto value = parse(name);
    if (!value) throw ConfigError(at(key), "unknown value \"" + name + "\"; expected " + options);
    return *value;
  }

  // Sub-object, or an empty object when absent.
  Json section(const std::string& key) {
    if (!has(key)) return Json::object();
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

NetworkSpec parse_network(Fields& f) {
  NetworkSpec net;
  const Index input = f.positive("input_dim", 0);
  net.tokens = f.positive("tokens", 1);
  net.loss = f.choice("loss", "squared_error", parse_loss, "squared_error or cross_entropy");
  if (!f.has("layers")) throw ConfigError(f.at("layers"), "required");
  const Json& layers = f.raw("layers");
  if (!layers.is_array() || layers.empty()) {
    throw ConfigError(f.at("layers"), "expected a non-empty array");
  }
  Index d_in = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Fields lf(layers[l], indexed(f.at("layers"), l));
    LayerSpec layer;
    layer.d_in = d_in;
    layer.d_out = lf.positive("out", 0);
    layer.activation =
        lf.choice("activation", "identity", parse_activation, "identity, relu or tanh");
    layer.train_weight = lf.boolean("train_weight", true);
    layer.train_bias = lf.boolean("train_bias", true);
    lf.finish();
    net.layers.push_back(layer);
    d_in = layer.d_out;
  }
  return net;
}

std::vector<double> parse_thresholds(Fields& f) {
  if (!f.has("R")) return {1.0};
  const Json& r = f.raw("R");
  std::vector<double> out;
  if (r.is_number()) {
    out.push_back(r.get<double>());
  } else if (r.is_array() && !r.empty()) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r[i].is_number()) throw ConfigError(indexed(f.at("R"), i), "expected a number");
      out.push_back(r[i].get<double>());
    }
  } else {
    throw ConfigError(f.at("R"), "expected a number or a non-empty array of numbers");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0)) throw ConfigError(indexed(f.at("R"), i), "thresholds must be positive");
  }
  return out;
}

ClipPlan parse_clipping(Fields& f, const NetworkSpec& net) {
  const Partition partition = f.choice("partition", "layer-wise", parse_partition,
                                       "all-layer, layer-wise or custom");
  const ClipFunction fn = f.choice("function", "vanilla", parse_clip_function,
                                   "vanilla or automatic");
  const double gamma = f.number("gamma", 0.01);
  if (!(gamma >= 0)) throw ConfigError(f.at("gamma"), "must be >= 0");
  std::vector<double> r = parse_thresholds(f);

  Index trainable_layers = 0;
  for (const auto& layer : net.layers) trainable_layers += layer.trainable() ? 1 : 0;

  ClipPlan plan;
  switch (partition) {
    case Partition::AllLayer:
      if (r.size() != 1) throw ConfigError(f.at("R"), "all-layer clipping takes one threshold");
      plan = ClipPlan::all_layer(net, fn, r.front(), gamma);
      break;
    case Partition::LayerWise:
      if (r.size() != 1 && static_cast<Index>(r.size()) != trainable_layers) {
        throw ConfigError(f.at("R"), "layer-wise clipping takes one threshold or one per "
                                     "trainable layer (" + std::to_string(trainable_layers) + ")");
      }
      plan = ClipPlan::layer_wise(net, fn, r, gamma);
      break;
    case Partition::Custom: {
      if (!f.has("groups")) throw ConfigError(f.at("groups"), "required for custom partitions");
      const Json& groups = f.raw("groups");
      if (!groups.is_array() || groups.size() != net.layers.size()) {
        throw ConfigError(f.at("groups"), "expected one group index per layer");
      }
      plan.partition = Partition::Custom;
      plan.function = fn;
      plan.gamma = gamma;
      plan.thresholds = r;
      for (std::size_t l = 0; l < groups.size(); ++l) {
        if (!groups[l].is_number_integer()) {
          throw ConfigError(indexed(f.at("groups"), l), "expected an integer");
        }
        plan.group_of_layer.push_back(groups[l].get<int>());
      }
      try {
        plan.validate(net);
      } catch (const ContractViolation& e) {
        throw ConfigError(f.at("groups"), e.what());
      }
      break;
    }
  }
  return plan;
}

template <typename Fn>
void as_config_error(const std::string& path, Fn fn) {
  try {
    fn();
  } catch (const ContractViolation& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const Json& j, std::uint64_t default_seed) {
  Fields top(j, "");
  RunConfig cfg;
  cfg.seed = top.seed("seed", default_seed);
  cfg.steps = static_cast<std::uint64_t>(top.positive("steps", 1));
  TrainingSetup& s = cfg.setup;

  {
    Json section = top.section("network");
    if (section.empty()) throw ConfigError("network", "required");
    Fields f(section, "network");
    s.network = parse_network(f);
    cfg.init_seed = f.seed("init_seed", cfg.seed);
    f.finish();
  }
  {
    Json section = top.section("data");
    Fields f(section, "data");
    s.micro_batch = f.positive("micro_batch", 1);
    s.accumulation = static_cast<int>(f.positive("accumulation", 1));
    s.data_seed = f.seed("seed", cfg.seed);
    f.finish();
  }
  {
    Json section = top.section("shard");
    Fields f(section, "shard");
    const auto stage = stage_from_int(static_cast<int>(f.integer("stage", 0)));
    if (!stage) throw ConfigError("shard.stage", "expected 0, 1, 2 or 3");
    s.stage = *stage;
    s.workers = static_cast<int>(f.positive("workers", 1));
    f.finish();
  }
  {
    Json section = top.section("clipping");
    Fields f(section, "clipping");
    s.clip = parse_clipping(f, s.network);
    f.finish();
  }
  {
    Json section = top.section("noise");
    Fields f(section, "noise");
    s.noise.sigma = f.number("sigma", 0.0);
    if (!(s.noise.sigma >= 0)) throw ConfigError("noise.sigma", "must be >= 0");
    s.noise.mode = f.choice("mode", "shared", parse_noise_mode, "shared or independent");
    s.noise.sensitivity = f.number("sensitivity", s.clip.sensitivity());
    if (!(s.noise.sensitivity > 0)) throw ConfigError("noise.sensitivity", "must be positive");
    s.noise.seed = f.seed("seed", cfg.seed);
    f.finish();
  }
  {
    Json section = top.section("optimizer");
    Fields f(section, "optimizer");
    OptimizerSpec& o = s.optimizer;
    o.kind = f.choice("kind", "sgd", parse_optimizer, "sgd, adam or adamw");
    o.lr = f.number("lr", o.lr);
    o.beta1 = f.number("beta1", o.beta1);
    o.beta2 = f.number("beta2", o.beta2);
    o.eps = f.number("eps", o.eps);
    o.weight_decay = f.number("weight_decay", o.weight_decay);
    as_config_error("optimizer", [&] { o.validate(); });
    f.finish();
  }
  {
    Json section = top.section("amp");
    Fields f(section, "amp");
    s.amp.variant = f.choice("variant", "dp-1346", parse_variant,
                             "std-136, std-12356, dp-123456, dp-1234s56, dp-1346 or dp-12346");
    s.amp.scale = f.number("scale", 1.0);
    as_config_error("amp.scale", [&] { s.amp.validate(); });
    s.precision = f.choice("precision", "f64", parse_precision, "f64, f64-audit, f32, f16 or bf16");
    f.finish();
  }
  s.checkpointing = top.boolean("checkpointing", false);
  top.finish();

  as_config_error("config", [&] { s.validate(); });
  return cfg;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path, std::uint64_t default_seed) {
  return parse_run_config(read_json_file(path), default_seed);
}

Json to_json(const RunConfig& cfg) {
  const TrainingSetup& s = cfg.setup;
  Json layers = Json::array();
  for (const LayerSpec& l : s.network.layers) {
    layers.push_back({{"out", l.d_out},
                      {"activation", to_string(l.activation)},
                      {"train_weight", l.train_weight},
                      {"train_bias", l.train_bias}});
  }
  Json clipping = {{"partition", to_string(s.clip.partition)},
                   {"function", to_string(s.clip.function)},
                   {"R", s.clip.thresholds},
                   {"gamma", s.clip.gamma}};
  if (s.clip.partition == Partition::Custom) clipping["groups"] = s.clip.group_of_layer;

  Json j;
  j["network"] = {{"input_dim", s.network.input_dim()},
                  {"tokens", s.network.tokens},
                  {"loss", to_string(s.network.loss)},
                  {"init_seed", cfg.init_seed},
                  {"layers", layers}};
  j["data"] = {{"micro_batch", s.micro_batch},
               {"accumulation", s.accumulation},
               {"seed", s.data_seed}};
  j["shard"] = {{"stage", static_cast<int>(s.stage)}, {"workers", s.workers}};
  j["clipping"] = clipping;
  j["noise"] = {{"sigma", s.noise.sigma},
                {"mode", to_string(s.noise.mode)},
                {"sensitivity", s.noise.sensitivity},
                {"seed", s.noise.seed}};
  j["optimizer"] = {{"kind", to_string(s.optimizer.kind)},
                    {"lr", s.optimizer.lr},
                    {"beta1", s.optimizer.beta1},
                    {"beta2", s.optimizer.beta2},
                    {"eps", s.optimizer.eps},
                    {"weight_decay", s.optimizer.weight_decay}};
  j["amp"] = {{"variant", to_string(s.amp.variant)},
              {"scale", s.amp.scale},
              {"precision", to_string(s.precision)}};
  j["checkpointing"] = s.checkpointing;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  return j;
}

namespace {

CostInputs parse_cost_row(const Json& j, const std::string& path) {
  Fields f(j, path);
  CostInputs in;
  in.batch = f.number("batch", in.batch);
  in.tokens = f.number("tokens", in.tokens);
  in.psi_model = f.number("psi_model", in.psi_model);
  in.psi_train = f.number("psi_train", in.psi_model);
  in.workers = static_cast<int>(f.positive("workers", in.workers));
  const auto stage = stage_from_int(static_cast<int>(f.integer("stage", 0)));
  if (!stage) throw ConfigError(f.at("stage"), "expected 0, 1, 2 or 3");
  in.stage = *stage;
  in.dp_enabled = f.boolean("dp_enabled", in.dp_enabled);
  in.dp_overhead_coeff = f.number("dp_overhead_coeff", in.dp_overhead_coeff);
  in.checkpointing = f.boolean("checkpointing", in.checkpointing);
  in.attention_coeff = f.number("attention_coeff", in.attention_coeff);
  in.bandwidth.intra_node_gbps = f.number("intra_node_gbps", in.bandwidth.intra_node_gbps);
  in.bandwidth.inter_node_gbps = f.number("inter_node_gbps", in.bandwidth.inter_node_gbps);
  in.bandwidth.workers_per_node =
      static_cast<int>(f.positive("workers_per_node", in.bandwidth.workers_per_node));
  in.bytes_per_element = static_cast<int>(f.positive("bytes_per_element", in.bytes_per_element));
  in.peft = f.boolean("peft", in.peft);
  in.accumulation = static_cast<int>(f.positive("accumulation", in.accumulation));
  in.optimizer_states = static_cast<int>(f.positive("optimizer_states", in.optimizer_states));
  in.flops_per_second = f.number("flops_per_second", in.flops_per_second);
  in.memory_budget_bytes = f.number("memory_budget_bytes", in.memory_budget_bytes);
  f.finish();
  as_config_error(path.empty() ? "config" : path, [&] { in.validate(); });
  return in;
}

}  // namespace

std::vector<CostInputs> parse_cost_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected an object");
  Json base = j;
  std::vector<std::pair<std::string, Json>> axes;
  if (j.contains("sweep")) {
    base.erase("sweep");
    const Json& sweep = j.at("sweep");
    if (!sweep.is_object()) throw ConfigError("sweep", "expected an object of value lists");
    for (const auto& item : sweep.items()) {
      if (!item.value().is_array() || item.value().empty()) {
        throw ConfigError("sweep." + item.key(), "expected a non-empty array");
      }
      axes.emplace_back(item.key(), item.value());
    }
  }

  std::vector<CostInputs> rows;
  std::vector<std::size_t> pos(axes.size(), 0);
  for (;;) {
    Json row = base;
    std::string path;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      row[axes[a].first] = axes[a].second[pos[a]];
    }
    if (!axes.empty()) path = "sweep row " + std::to_string(rows.size());
    rows.push_back(parse_cost_row(row, path));

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < axes[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) return rows;
    }
    if (axes.empty()) return rows;
  }
}

std::vector<CostInputs> load_cost_config(const std::filesystem::path& path) {
  return parse_cost_config(read_json_file(path));
}

}  // namespace dpzero
