#include "simmst/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "simmst/error.hpp"

namespace simmst {

namespace {

constexpr char kMagic[8] = {'S', 'I', 'M', 'M', 'S', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void write_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError(path + ": truncated checkpoint");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t read_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw IoError(path + ": truncated checkpoint");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string read_bytes(std::istream& in, size_t len, const std::string& path) {
  std::string s(len, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(len)))
    throw IoError(path + ": truncated checkpoint");
  return s;
}

}  // namespace

std::string config_to_json_text(const SimMstConfig& cfg) {
  nlohmann::ordered_json j;
  j["num_modes"] = cfg.num_modes;
  j["num_nodes"] = cfg.num_nodes;
  j["history_len"] = cfg.history_len;
  j["horizon"] = cfg.horizon;
  j["channels"] = cfg.channels;
  j["hidden_dim"] = cfg.hidden_dim;
  j["embed_dim"] = cfg.embed_dim;
  j["num_layers"] = cfg.num_layers;
  j["topk"] = cfg.topk;
  j["tdl_kind"] = tdl_kind_name(cfg.tdl_kind);
  j["enable_tdl"] = cfg.enable_tdl;
  j["enable_csrl"] = cfg.enable_csrl;
  j["enable_ccl"] = cfg.enable_ccl;
  j["share_projections"] = cfg.share_projections;
  j["zero_cross_relations"] = cfg.zero_cross_relations;
  j["temporal_lengths"] = cfg.temporal_lengths;
  return j.dump();
}

SimMstConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key))
      throw ConfigError(std::string("config JSON: missing key '") + key + "'");
    return j.at(key);
  };
  auto geti = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_number_integer())
      throw ConfigError(std::string("config JSON: key '") + key +
                        "' must be an integer");
    return v.get<int64_t>();
  };
  auto getb = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_boolean())
      throw ConfigError(std::string("config JSON: key '") + key +
                        "' must be a boolean");
    return v.get<bool>();
  };
  SimMstConfig cfg;
  cfg.num_modes = geti("num_modes");
  cfg.num_nodes = geti("num_nodes");
  cfg.history_len = geti("history_len");
  cfg.horizon = geti("horizon");
  cfg.channels = geti("channels");
  cfg.hidden_dim = geti("hidden_dim");
  cfg.embed_dim = geti("embed_dim");
  cfg.num_layers = geti("num_layers");
  cfg.topk = geti("topk");
  {
    const auto& v = need("tdl_kind");
    if (!v.is_string())
      throw ConfigError("config JSON: key 'tdl_kind' must be a string");
    cfg.tdl_kind = tdl_kind_from_name(v.get<std::string>());
  }
  cfg.enable_tdl = getb("enable_tdl");
  cfg.enable_csrl = getb("enable_csrl");
  cfg.enable_ccl = getb("enable_ccl");
  cfg.share_projections = getb("share_projections");
  cfg.zero_cross_relations = getb("zero_cross_relations");
  {
    const auto& v = need("temporal_lengths");
    if (!v.is_array())
      throw ConfigError("config JSON: key 'temporal_lengths' must be an array");
    cfg.temporal_lengths.clear();
    for (const auto& item : v) {
      if (!item.is_number_integer())
        throw ConfigError("config JSON: temporal_lengths must hold integers");
      cfg.temporal_lengths.push_back(item.get<int64_t>());
    }
  }
  cfg.validate();
  return cfg;
}

void save_checkpoint(const SimMstModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  std::string cfg = config_to_json_text(model.config());
  write_u32(out, static_cast<uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  const auto& params = model.parameters();
  write_u64(out, params.size());
  for (const auto& [name, tensor] : params) {
    write_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<uint32_t>(tensor.ndim()));
    for (int64_t d = 0; d < tensor.ndim(); ++d)
      write_u64(out, static_cast<uint64_t>(tensor.dim(d)));
    out.write(reinterpret_cast<const char*>(tensor.values().data()),
              static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
  }
  if (!out) throw IoError("short write to " + path);
}

SimMstModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError(path + ": not a model checkpoint (bad magic)");
  uint32_t version = read_u32(in, path);
  if (version != kVersion)
    throw IoError(path + ": unsupported checkpoint version " +
                  std::to_string(version));
  uint32_t cfg_len = read_u32(in, path);
  SimMstConfig cfg = config_from_json_text(read_bytes(in, cfg_len, path));

  SimMstModel model(cfg, 0);
  const auto& params = model.parameters();
  uint64_t count = read_u64(in, path);
  if (count != params.size())
    throw IoError(path + ": holds " + std::to_string(count) +
                  " parameters, config implies " +
                  std::to_string(params.size()));
  for (const auto& [name, tensor] : params) {
    uint32_t name_len = read_u32(in, path);
    std::string got = read_bytes(in, name_len, path);
    if (got != name)
      throw IoError(path + ": parameter '" + got + "' does not match expected '" +
                    name + "'");
    uint32_t rank = read_u32(in, path);
    if (rank != static_cast<uint32_t>(tensor.ndim()))
      throw IoError(path + ": parameter '" + name + "' has rank " +
                    std::to_string(rank) + ", expected " +
                    std::to_string(tensor.ndim()));
    for (int64_t d = 0; d < tensor.ndim(); ++d) {
      uint64_t dim = read_u64(in, path);
      if (dim != static_cast<uint64_t>(tensor.dim(d)))
        throw IoError(path + ": parameter '" + name + "' has dim " +
                      std::to_string(dim) + " at axis " + std::to_string(d) +
                      ", expected " + std::to_string(tensor.dim(d)));
    }
    Tensor t = tensor;
    if (!in.read(reinterpret_cast<char*>(t.values_mut().data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(double))))
      throw IoError(path + ": truncated checkpoint");
  }
  return model;
}

}  // namespace simmst
