#include "simmst/runconfig.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "simmst/error.hpp"

namespace simmst {

using nlohmann::json;
using nlohmann::ordered_json;

size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

enum class KeyKind { kInt, kUint, kFloat, kBool, kString, kIntArray };

struct KeySpec {
  const char* name;
  KeyKind kind;
  std::function<void(RunConfig&, const json&)> apply;
};

int64_t as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer() || v.is_boolean())
    throw ConfigError("config key '" + key + "' expects an integer");
  return v.get<int64_t>();
}

uint64_t as_uint(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0)
    return static_cast<uint64_t>(v.get<int64_t>());
  throw ConfigError("config key '" + key + "' expects a non-negative integer");
}

double as_float(const std::string& key, const json& v) {
  if (!v.is_number() || v.is_boolean())
    throw ConfigError("config key '" + key + "' expects a number");
  return v.get<double>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean())
    throw ConfigError("config key '" + key + "' expects true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string())
    throw ConfigError("config key '" + key + "' expects a string");
  return v.get<std::string>();
}

std::vector<int64_t> as_int_array(const std::string& key, const json& v) {
  if (!v.is_array())
    throw ConfigError("config key '" + key + "' expects an array of integers");
  std::vector<int64_t> out;
  for (const json& e : v) out.push_back(as_int(key, e));
  return out;
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"hidden_dim", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.hidden_dim = as_int("hidden_dim", v); }},
      {"embed_dim", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.embed_dim = as_int("embed_dim", v); }},
      {"num_layers", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.num_layers = as_int("num_layers", v); }},
      {"topk", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.topk = as_int("topk", v); }},
      {"history_len", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.history_len = as_int("history_len", v); }},
      {"horizon", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.horizon = as_int("horizon", v); }},
      {"tdl_kind", KeyKind::kString,
       [](RunConfig& c, const json& v) { c.tdl_kind = as_string("tdl_kind", v); }},
      {"enable_tdl", KeyKind::kBool,
       [](RunConfig& c, const json& v) { c.enable_tdl = as_bool("enable_tdl", v); }},
      {"enable_csrl", KeyKind::kBool,
       [](RunConfig& c, const json& v) { c.enable_csrl = as_bool("enable_csrl", v); }},
      {"enable_ccl", KeyKind::kBool,
       [](RunConfig& c, const json& v) { c.enable_ccl = as_bool("enable_ccl", v); }},
      {"share_projections", KeyKind::kBool,
       [](RunConfig& c, const json& v) {
         c.share_projections = as_bool("share_projections", v);
       }},
      {"zero_cross_relations", KeyKind::kBool,
       [](RunConfig& c, const json& v) {
         c.zero_cross_relations = as_bool("zero_cross_relations", v);
       }},
      {"temporal_lengths", KeyKind::kIntArray,
       [](RunConfig& c, const json& v) {
         c.temporal_lengths = as_int_array("temporal_lengths", v);
       }},
      {"learning_rate", KeyKind::kFloat,
       [](RunConfig& c, const json& v) {
         c.learning_rate = as_float("learning_rate", v);
       }},
      {"batch_size", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.batch_size = as_int("batch_size", v); }},
      {"max_epochs", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.max_epochs = as_int("max_epochs", v); }},
      {"patience", KeyKind::kInt,
       [](RunConfig& c, const json& v) { c.patience = as_int("patience", v); }},
      {"beta1", KeyKind::kFloat,
       [](RunConfig& c, const json& v) { c.beta1 = as_float("beta1", v); }},
      {"beta2", KeyKind::kFloat,
       [](RunConfig& c, const json& v) { c.beta2 = as_float("beta2", v); }},
      {"eps", KeyKind::kFloat,
       [](RunConfig& c, const json& v) { c.eps = as_float("eps", v); }},
      {"clip_norm", KeyKind::kFloat,
       [](RunConfig& c, const json& v) { c.clip_norm = as_float("clip_norm", v); }},
      {"dataset", KeyKind::kString,
       [](RunConfig& c, const json& v) { c.dataset = as_string("dataset", v); }},
      {"output_dir", KeyKind::kString,
       [](RunConfig& c, const json& v) { c.output_dir = as_string("output_dir", v); }},
      {"seed", KeyKind::kUint,
       [](RunConfig& c, const json& v) { c.seed = as_uint("seed", v); }},
      {"horizon_steps", KeyKind::kIntArray,
       [](RunConfig& c, const json& v) {
         c.horizon_steps = as_int_array("horizon_steps", v);
       }},
  };
  return table;
}

const KeySpec& lookup_key(const std::string& name) {
  const KeySpec* best = nullptr;
  size_t best_dist = std::numeric_limits<size_t>::max();
  for (const KeySpec& spec : key_table()) {
    if (spec.name == name) return spec;
    size_t d = edit_distance(name, spec.name);
    if (d < best_dist) {
      best_dist = d;
      best = &spec;
    }
  }
  std::string msg = "unknown config key '" + name + "'";
  if (best != nullptr && best_dist <= 3)
    msg += " (did you mean '" + std::string(best->name) + "'?)";
  throw ConfigError(msg);
}

int64_t parse_int_text(const std::string& key, const std::string& text) {
  size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ConfigError("override for '" + key + "' is not an integer: '" +
                      text + "'");
  return v;
}

double parse_float_text(const std::string& key, const std::string& text) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ConfigError("override for '" + key + "' is not a number: '" + text +
                      "'");
  return v;
}

// Converts an override's textual value into the JSON shape the key expects,
// so file values and overrides flow through the same typed setters.
json override_to_json(const KeySpec& spec, const std::string& text) {
  switch (spec.kind) {
    case KeyKind::kInt:
      return json(parse_int_text(spec.name, text));
    case KeyKind::kUint: {
      int64_t v = parse_int_text(spec.name, text);
      if (v < 0)
        throw ConfigError("override for '" + std::string(spec.name) +
                          "' must be non-negative: '" + text + "'");
      return json(static_cast<uint64_t>(v));
    }
    case KeyKind::kFloat:
      return json(parse_float_text(spec.name, text));
    case KeyKind::kBool: {
      if (text == "true" || text == "1") return json(true);
      if (text == "false" || text == "0") return json(false);
      throw ConfigError("override for '" + std::string(spec.name) +
                        "' is not a boolean: '" + text + "'");
    }
    case KeyKind::kString:
      return json(text);
    case KeyKind::kIntArray: {
      json arr = json::array();
      if (text.empty()) return arr;  // empty list clears the value
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ','))
        arr.push_back(parse_int_text(spec.name, item));
      return arr;
    }
  }
  throw ContractError("unhandled config key kind");
}

}  // namespace

void RunConfig::validate() const {
  train_config().validate();
  // Reuse the model-side rules with placeholder dataset dimensions; topk is
  // matched by the node count so only genuine problems surface here.
  model_config(1, std::max<int64_t>(topk, 1), 1);
  if (horizon_steps.empty())
    throw ConfigError("horizon_steps must name at least one step");
  for (int64_t s : horizon_steps)
    if (s < 1 || s > horizon)
      throw ConfigError("horizon step " + std::to_string(s) +
                        " is outside [1, " + std::to_string(horizon) + "]");
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = learning_rate;
  t.batch_size = batch_size;
  t.max_epochs = max_epochs;
  t.patience = patience;
  t.beta1 = beta1;
  t.beta2 = beta2;
  t.eps = eps;
  t.clip_norm = clip_norm;
  t.seed = seed;
  return t;
}

SimMstConfig RunConfig::model_config(int64_t num_modes, int64_t num_nodes,
                                     int64_t channels) const {
  SimMstConfig m;
  m.num_modes = num_modes;
  m.num_nodes = num_nodes;
  m.history_len = history_len;
  m.horizon = horizon;
  m.channels = channels;
  m.hidden_dim = hidden_dim;
  m.embed_dim = embed_dim;
  m.num_layers = num_layers;
  m.topk = std::min(topk, num_nodes);
  m.tdl_kind = tdl_kind_from_name(tdl_kind);
  m.enable_tdl = enable_tdl;
  m.enable_csrl = enable_csrl;
  m.enable_ccl = enable_ccl;
  m.share_projections = share_projections;
  m.zero_cross_relations = zero_cross_relations;
  m.temporal_lengths = temporal_lengths;
  m.validate();
  return m;
}

std::string RunConfig::to_json_text() const {
  ordered_json j;
  j["hidden_dim"] = hidden_dim;
  j["embed_dim"] = embed_dim;
  j["num_layers"] = num_layers;
  j["topk"] = topk;
  j["history_len"] = history_len;
  j["horizon"] = horizon;
  j["tdl_kind"] = tdl_kind;
  j["enable_tdl"] = enable_tdl;
  j["enable_csrl"] = enable_csrl;
  j["enable_ccl"] = enable_ccl;
  j["share_projections"] = share_projections;
  j["zero_cross_relations"] = zero_cross_relations;
  j["temporal_lengths"] = temporal_lengths;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["clip_norm"] = clip_norm;
  j["dataset"] = dataset;
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  j["horizon_steps"] = horizon_steps;
  return j.dump(2) + "\n";
}

std::vector<int64_t> default_horizon_steps(int64_t horizon) {
  std::vector<int64_t> steps;
  for (int64_t s : {int64_t{3}, int64_t{6}, int64_t{12}})
    if (s <= horizon) steps.push_back(s);
  if (steps.empty() || steps.back() != horizon) steps.push_back(horizon);
  return steps;
}

RunConfig parse_run_config_text(const std::string& json_text,
                                const ConfigOverrides& overrides) {
  RunConfig cfg;
  bool steps_touched = false;
  if (!json_text.empty()) {
    json parsed;
    try {
      parsed = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") +
                        e.what());
    }
    if (!parsed.is_object())
      throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : parsed.items()) {
      const KeySpec& spec = lookup_key(key);
      spec.apply(cfg, value);
      if (std::string(spec.name) == "horizon_steps") steps_touched = true;
    }
  }
  for (const auto& [key, text] : overrides) {
    const KeySpec& spec = lookup_key(key);
    spec.apply(cfg, override_to_json(spec, text));
    if (std::string(spec.name) == "horizon_steps") steps_touched = true;
  }
  // Explicit values are taken as given (and validated); an explicit empty
  // list re-derives from the horizon.
  cfg.horizon_steps_explicit = steps_touched && !cfg.horizon_steps.empty();
  if (!cfg.horizon_steps_explicit)
    cfg.horizon_steps = default_horizon_steps(cfg.horizon);
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(const std::string& file_path,
                           const ConfigOverrides& overrides) {
  std::string text;
  if (!file_path.empty()) {
    std::ifstream in(file_path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + file_path);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    // Empty text is the no-config sentinel; a named file must hold JSON.
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw ConfigError("config file is empty: " + file_path);
  }
  return parse_run_config_text(text, overrides);
}

}  // namespace simmst
