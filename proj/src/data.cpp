#include "simmst/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "simmst/rng.hpp"

namespace simmst {

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b, r = a % b;
  return (r != 0 && (r < 0) != (b < 0)) ? q - 1 : q;
}

int64_t floor_mod(int64_t a, int64_t b) { return a - floor_div(a, b) * b; }

bool is_leap(int64_t y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int64_t y, int m) {
  static const int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

}  // namespace

int64_t days_from_civil(int64_t y, int m, int d) {
  y -= m <= 2;
  const int64_t era = floor_div(y, 400);
  const int64_t yoe = y - era * 400;                                 // [0, 399]
  const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
  const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;         // [0, 146096]
  return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int64_t& year, int& month, int& day) {
  z += 719468;
  const int64_t era = floor_div(z, 146097);
  const int64_t doe = z - era * 146097;                              // [0, 146096]
  const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = yoe + era * 400;
  const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);       // [0, 365]
  const int64_t mp = (5 * doy + 2) / 153;                            // [0, 11]
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = y + (month <= 2);
}

Timestamp parse_iso8601(const std::string& text) {
  auto fail = [&]() -> Timestamp {
    throw ConfigError("timestamp '" + text +
                      "' is not of the form YYYY-MM-DDTHH:MM");
  };
  if (text.size() != 16) return fail();
  for (size_t i = 0; i < 16; ++i) {
    char c = text[i];
    bool sep = i == 4 || i == 7 || i == 10 || i == 13;
    if (sep) {
      char want = i == 10 ? 'T' : (i == 13 ? ':' : '-');
      if (c != want) return fail();
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return fail();
    }
  }
  auto num = [&](size_t pos, size_t len) {
    return std::stoll(text.substr(pos, len));
  };
  Timestamp ts;
  ts.year = num(0, 4);
  ts.month = static_cast<int>(num(5, 2));
  ts.day = static_cast<int>(num(8, 2));
  ts.hour = static_cast<int>(num(11, 2));
  ts.minute = static_cast<int>(num(14, 2));
  if (ts.month < 1 || ts.month > 12 || ts.day < 1 ||
      ts.day > days_in_month(ts.year, ts.month) || ts.hour > 23 ||
      ts.minute > 59)
    throw ConfigError("timestamp '" + text + "' is not a real calendar time");
  return ts;
}

std::string format_iso8601(const Timestamp& ts) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02d:%02d",
                static_cast<long long>(ts.year), ts.month, ts.day, ts.hour,
                ts.minute);
  return buf;
}

int64_t timestamp_minutes(const Timestamp& ts) {
  return days_from_civil(ts.year, ts.month, ts.day) * 1440 + ts.hour * 60 +
         ts.minute;
}

Timestamp add_minutes(const Timestamp& ts, int64_t minutes) {
  int64_t total = timestamp_minutes(ts) + minutes;
  int64_t days = floor_div(total, 1440);
  int64_t rem = total - days * 1440;
  Timestamp out;
  civil_from_days(days, out.year, out.month, out.day);
  out.hour = static_cast<int>(rem / 60);
  out.minute = static_cast<int>(rem % 60);
  return out;
}

int64_t tod_slot(int64_t abs_minutes) { return floor_mod(abs_minutes, 1440) / 30; }

int64_t dow_from_minutes(int64_t abs_minutes) {
  // 1970-01-01 was a Thursday; Monday indexes 0.
  return floor_mod(floor_div(abs_minutes, 1440) + 3, 7);
}

int64_t MultiModeDataset::offset(int64_t m, int64_t n, int64_t t,
                                 int64_t c) const {
  if (m < 0 || m >= num_modes || n < 0 || n >= num_nodes || t < 0 ||
      t >= num_steps || c < 0 || c >= num_channels)
    throw ContractError("dataset index (" + std::to_string(m) + "," +
                        std::to_string(n) + "," + std::to_string(t) + "," +
                        std::to_string(c) + ") out of range");
  return ((m * num_nodes + n) * num_steps + t) * num_channels + c;
}

double MultiModeDataset::at(int64_t m, int64_t n, int64_t t, int64_t c) const {
  return values[offset(m, n, t, c)];
}

double& MultiModeDataset::at(int64_t m, int64_t n, int64_t t, int64_t c) {
  return values[offset(m, n, t, c)];
}

int64_t MultiModeDataset::tod_index(int64_t t) const {
  return tod_slot(timestamp_minutes(start) + t * step_minutes);
}

int64_t MultiModeDataset::dow_index(int64_t t) const {
  return dow_from_minutes(timestamp_minutes(start) + t * step_minutes);
}

Tensor MultiModeDataset::mode_window(int64_t m, int64_t t0, int64_t len) const {
  if (m < 0 || m >= num_modes)
    throw ContractError("mode index " + std::to_string(m) + " out of range");
  if (len < 1 || t0 < 0 || t0 + len > num_steps)
    throw ContractError("window [" + std::to_string(t0) + "," +
                        std::to_string(t0 + len) + ") exceeds " +
                        std::to_string(num_steps) + " steps");
  std::vector<double> out(num_nodes * len * num_channels);
  size_t k = 0;
  for (int64_t n = 0; n < num_nodes; ++n)
    for (int64_t t = t0; t < t0 + len; ++t)
      for (int64_t c = 0; c < num_channels; ++c)
        out[k++] = values[((m * num_nodes + n) * num_steps + t) * num_channels + c];
  return Tensor({num_nodes, len, num_channels}, std::move(out));
}

void MultiModeDataset::validate() const {
  auto positive = [](int64_t v, const char* name) {
    if (v < 1)
      throw IoError(std::string("dataset ") + name + " must be >= 1, got " +
                    std::to_string(v));
  };
  positive(num_modes, "num_modes");
  positive(num_nodes, "num_nodes");
  positive(num_steps, "num_steps");
  positive(num_channels, "num_channels");
  positive(step_minutes, "step_minutes");
  if (1440 % step_minutes != 0)
    throw IoError("dataset step_minutes " + std::to_string(step_minutes) +
                  " does not divide a day");
  if (static_cast<int64_t>(mode_names.size()) != num_modes)
    throw IoError("dataset lists " + std::to_string(mode_names.size()) +
                  " mode names for " + std::to_string(num_modes) + " modes");
  if (static_cast<int64_t>(channel_names.size()) != num_channels)
    throw IoError("dataset lists " + std::to_string(channel_names.size()) +
                  " channel names for " + std::to_string(num_channels) +
                  " channels");
  int64_t want = num_modes * num_nodes * num_steps * num_channels;
  if (static_cast<int64_t>(values.size()) != want)
    throw IoError("dataset holds " + std::to_string(values.size()) +
                  " values, shape needs " + std::to_string(want));
  for (int64_t m = 0; m < num_modes; ++m)
    for (int64_t n = 0; n < num_nodes; ++n)
      for (int64_t t = 0; t < num_steps; ++t)
        for (int64_t c = 0; c < num_channels; ++c) {
          double v = values[((m * num_nodes + n) * num_steps + t) * num_channels + c];
          if (!std::isfinite(v))
            throw IoError("mode '" + mode_names[m] + "' has a non-finite value at node " +
                          std::to_string(n) + ", time " + std::to_string(t) +
                          ", channel " + std::to_string(c));
        }
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const json& require_key(const json& meta, const std::string& key) {
  if (!meta.contains(key))
    throw IoError("metadata.json: missing key '" + key + "'");
  return meta.at(key);
}

int64_t require_int(const json& meta, const std::string& key) {
  const json& v = require_key(meta, key);
  if (!v.is_number_integer())
    throw IoError("metadata.json: key '" + key + "' must be an integer");
  return v.get<int64_t>();
}

std::vector<std::string> require_names(const json& meta,
                                       const std::string& key) {
  const json& v = require_key(meta, key);
  if (!v.is_array())
    throw IoError("metadata.json: key '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      throw IoError("metadata.json: key '" + key + "' must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

void load_mode_bin(MultiModeDataset& ds, int64_t m,
                   const std::filesystem::path& path) {
  int64_t cells = ds.num_nodes * ds.num_steps * ds.num_channels;
  auto bytes = std::filesystem::file_size(path);
  if (bytes != static_cast<uintmax_t>(cells) * sizeof(double))
    throw IoError(path.string() + " holds " + std::to_string(bytes) +
                  " bytes, expected " + std::to_string(cells * sizeof(double)));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(ds.values.data() + m * cells),
          cells * sizeof(double));
  if (!in) throw IoError("short read from " + path.string());
}

void load_mode_csv(MultiModeDataset& ds, int64_t m,
                   const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "node,time_index,channel,value")
    throw IoError(path.string() +
                  ": expected header 'node,time_index,channel,value'");
  int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    int64_t nums[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, field, ','))
        throw IoError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 4 comma-separated fields");
      try {
        nums[i] = std::stoll(field);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(lineno) +
                      ": '" + field + "' is not an integer");
      }
    }
    if (!std::getline(row, field))
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": expected 4 comma-separated fields");
    double value;
    try {
      value = std::stod(field);
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": '" +
                    field + "' is not a number");
    }
    if (nums[0] < 0 || nums[0] >= ds.num_nodes || nums[1] < 0 ||
        nums[1] >= ds.num_steps || nums[2] < 0 || nums[2] >= ds.num_channels)
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": index out of range for the declared shape");
    ds.at(m, nums[0], nums[1], nums[2]) = value;
  }
}

}  // namespace

MultiModeDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  fs::path meta_path = root / "metadata.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open " + meta_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::parse_error& e) {
    throw IoError(meta_path.string() + ": " + e.what());
  }
  int64_t version = require_int(meta, "version");
  if (version != 1)
    throw IoError("metadata.json: unsupported version " +
                  std::to_string(version));
  MultiModeDataset ds;
  ds.num_modes = require_int(meta, "num_modes");
  ds.num_nodes = require_int(meta, "num_nodes");
  ds.num_steps = require_int(meta, "num_steps");
  ds.num_channels = require_int(meta, "num_channels");
  ds.mode_names = require_names(meta, "mode_names");
  ds.channel_names = require_names(meta, "channel_names");
  const json& ts = require_key(meta, "start_timestamp");
  if (!ts.is_string())
    throw IoError("metadata.json: key 'start_timestamp' must be a string");
  ds.start = parse_iso8601(ts.get<std::string>());
  ds.step_minutes = require_int(meta, "step_minutes");
  if (ds.num_modes < 1 || ds.num_nodes < 1 || ds.num_steps < 1 ||
      ds.num_channels < 1 || ds.step_minutes < 1)
    throw IoError("metadata.json: declared dimensions must all be >= 1");
  if (static_cast<int64_t>(ds.mode_names.size()) != ds.num_modes)
    throw IoError("metadata.json: mode_names lists " +
                  std::to_string(ds.mode_names.size()) + " names for " +
                  std::to_string(ds.num_modes) + " modes");

  ds.values.assign(
      ds.num_modes * ds.num_nodes * ds.num_steps * ds.num_channels,
      std::numeric_limits<double>::quiet_NaN());
  for (int64_t m = 0; m < ds.num_modes; ++m) {
    fs::path bin = root / (ds.mode_names[m] + ".bin");
    fs::path csv = root / (ds.mode_names[m] + ".csv");
    if (fs::exists(bin))
      load_mode_bin(ds, m, bin);
    else if (fs::exists(csv))
      load_mode_csv(ds, m, csv);
    else
      throw IoError("mode '" + ds.mode_names[m] + "' has neither " +
                    bin.string() + " nor " + csv.string());
  }
  ds.validate();
  return ds;
}

void save_dataset(const MultiModeDataset& ds, const std::string& dir) {
  ds.validate();
  namespace fs = std::filesystem;
  fs::path root(dir);
  fs::create_directories(root);
  ordered_json meta;
  meta["version"] = 1;
  meta["num_modes"] = ds.num_modes;
  meta["num_nodes"] = ds.num_nodes;
  meta["num_steps"] = ds.num_steps;
  meta["num_channels"] = ds.num_channels;
  meta["mode_names"] = ds.mode_names;
  meta["channel_names"] = ds.channel_names;
  meta["start_timestamp"] = format_iso8601(ds.start);
  meta["step_minutes"] = ds.step_minutes;
  {
    std::ofstream out(root / "metadata.json");
    if (!out) throw IoError("cannot write " + (root / "metadata.json").string());
    out << meta.dump(2) << '\n';
  }
  int64_t cells = ds.num_nodes * ds.num_steps * ds.num_channels;
  for (int64_t m = 0; m < ds.num_modes; ++m) {
    fs::path bin = root / (ds.mode_names[m] + ".bin");
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw IoError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(ds.values.data() + m * cells),
              cells * sizeof(double));
    if (!out) throw IoError("short write to " + bin.string());
  }
}

SplitRanges chronological_split(int64_t num_steps, int64_t history_len,
                                int64_t horizon) {
  if (num_steps < 1) throw ConfigError("split needs at least one step");
  int64_t t1 = 7 * num_steps / 10;    // floor(0.7 T)
  int64_t t2 = 17 * num_steps / 20;   // floor(0.85 T)
  SplitRanges s{{0, t1}, {t1, t2}, {t2, num_steps}};
  int64_t need = history_len + horizon;
  auto check = [&](const IndexRange& r, const char* name) {
    if (r.size() < need)
      throw ConfigError(std::string(name) + " split holds " +
                        std::to_string(r.size()) + " steps, needs at least " +
                        std::to_string(need));
  };
  check(s.train, "train");
  check(s.val, "val");
  check(s.test, "test");
  return s;
}

std::vector<WindowSample> make_windows(const MultiModeDataset& ds,
                                       IndexRange range, int64_t history_len,
                                       int64_t horizon) {
  if (range.begin < 0 || range.end > ds.num_steps || range.begin > range.end)
    throw ContractError("window range [" + std::to_string(range.begin) + "," +
                        std::to_string(range.end) + ") exceeds the dataset");
  if (history_len < 1 || horizon < 1)
    throw ContractError("history and horizon must be >= 1");
  std::vector<WindowSample> out;
  for (int64_t s = range.begin; s + history_len + horizon <= range.end; ++s) {
    WindowSample w;
    for (int64_t m = 0; m < ds.num_modes; ++m) {
      w.history.push_back(ds.mode_window(m, s, history_len));
      w.target.push_back(ds.mode_window(m, s + history_len, horizon));
    }
    w.anchor = s + history_len - 1;
    w.tod = ds.tod_index(w.anchor);
    w.dow = ds.dow_index(w.anchor);
    out.push_back(std::move(w));
  }
  return out;
}

void Scaler::fit(const MultiModeDataset& ds, IndexRange range) {
  if (range.begin < 0 || range.end > ds.num_steps || range.size() < 1)
    throw ContractError("scaler range [" + std::to_string(range.begin) + "," +
                        std::to_string(range.end) + ") is empty or exceeds the dataset");
  num_modes_ = ds.num_modes;
  num_channels_ = ds.num_channels;
  mean_.assign(num_modes_ * num_channels_, 0.0);
  std_.assign(num_modes_ * num_channels_, 0.0);
  double count = static_cast<double>(ds.num_nodes * range.size());
  for (int64_t m = 0; m < num_modes_; ++m)
    for (int64_t c = 0; c < num_channels_; ++c) {
      double sum = 0.0, sum_sq = 0.0;
      for (int64_t n = 0; n < ds.num_nodes; ++n)
        for (int64_t t = range.begin; t < range.end; ++t) {
          double v = ds.at(m, n, t, c);
          sum += v;
          sum_sq += v * v;
        }
      double mu = sum / count;
      double var = std::max(0.0, sum_sq / count - mu * mu);
      mean_[m * num_channels_ + c] = mu;
      std_[m * num_channels_ + c] = std::max(std::sqrt(var), 1e-8);
    }
}

MultiModeDataset Scaler::transform(const MultiModeDataset& ds) const {
  if (!fitted()) throw ContractError("scaler used before fit");
  if (ds.num_modes != num_modes_ || ds.num_channels != num_channels_)
    throw ContractError("scaler fitted for " + std::to_string(num_modes_) +
                        " modes / " + std::to_string(num_channels_) +
                        " channels, dataset differs");
  MultiModeDataset out = ds;
  for (int64_t m = 0; m < ds.num_modes; ++m)
    for (int64_t n = 0; n < ds.num_nodes; ++n)
      for (int64_t t = 0; t < ds.num_steps; ++t)
        for (int64_t c = 0; c < ds.num_channels; ++c) {
          double& v = out.at(m, n, t, c);
          v = (v - mean(m, c)) / stddev(m, c);
        }
  return out;
}

Tensor Scaler::invert(const Tensor& x, int64_t mode) const {
  if (!fitted()) throw ContractError("scaler used before fit");
  if (mode < 0 || mode >= num_modes_)
    throw ContractError("scaler mode index out of range");
  if (x.dim(-1) != num_channels_)
    throw DimensionError("invert expects " + std::to_string(num_channels_) +
                         " channels on the last axis, got " +
                         shape_to_string(x.shape()));
  std::vector<double> out(x.values());
  for (size_t i = 0; i < out.size(); ++i) {
    int64_t c = static_cast<int64_t>(i) % num_channels_;
    out[i] = out[i] * stddev(mode, c) + mean(mode, c);
  }
  return Tensor(x.shape(), std::move(out));
}

double Scaler::mean(int64_t mode, int64_t channel) const {
  return mean_.at(mode * num_channels_ + channel);
}

double Scaler::stddev(int64_t mode, int64_t channel) const {
  return std_.at(mode * num_channels_ + channel);
}

void Scaler::restore(int64_t modes, int64_t channels,
                     std::vector<double> means, std::vector<double> stddevs) {
  if (modes < 1 || channels < 1 ||
      means.size() != static_cast<size_t>(modes * channels) ||
      stddevs.size() != means.size())
    throw ContractError("scaler restore sizes do not match");
  num_modes_ = modes;
  num_channels_ = channels;
  mean_ = std::move(means);
  std_ = std::move(stddevs);
}

MultiModeDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_modes < 1 || spec.num_nodes < 1 || spec.num_steps < 1 ||
      spec.num_channels < 1 || spec.step_minutes < 1)
    throw ConfigError("synthetic spec dimensions must all be >= 1");
  if (1440 % spec.step_minutes != 0)
    throw ConfigError("synthetic step_minutes must divide a day");
  std::vector<int64_t> coupling_of(spec.num_modes, -1);
  int64_t pad = 0;
  for (size_t k = 0; k < spec.couplings.size(); ++k) {
    const CouplingSpec& c = spec.couplings[k];
    if (c.source < 0 || c.source >= spec.num_modes || c.target < 0 ||
        c.target >= spec.num_modes)
      throw ConfigError("coupling references a mode outside the mode range");
    if (c.source == c.target)
      throw ConfigError("coupling source and target must differ");
    if (c.lag < 0 || c.lag >= spec.num_steps)
      throw ConfigError("coupling lag " + std::to_string(c.lag) +
                        " must lie in [0, " + std::to_string(spec.num_steps) +
                        ")");
    if (!std::isfinite(c.gain)) throw ConfigError("coupling gain must be finite");
    if (coupling_of[c.target] != -1)
      throw ConfigError("mode " + std::to_string(c.target) +
                        " is targeted by more than one coupling");
    coupling_of[c.target] = static_cast<int64_t>(k);
    pad = std::max(pad, c.lag);
  }
  for (const CouplingSpec& c : spec.couplings)
    if (coupling_of[c.source] != -1)
      throw ConfigError("mode " + std::to_string(c.source) +
                        " cannot both drive and be driven");

  const int64_t M = spec.num_modes, N = spec.num_nodes, T = spec.num_steps;
  const int64_t C = spec.num_channels;
  MultiModeDataset ds;
  ds.num_modes = M;
  ds.num_nodes = N;
  ds.num_steps = T;
  ds.num_channels = C;
  for (int64_t m = 0; m < M; ++m) ds.mode_names.push_back("mode" + std::to_string(m));
  for (int64_t c = 0; c < C; ++c) ds.channel_names.push_back("ch" + std::to_string(c));
  ds.start = spec.start;
  ds.step_minutes = spec.step_minutes;
  ds.values.assign(M * N * T * C, 0.0);

  Rng rng(spec.seed);
  const double kTwoPi = 6.283185307179586476925286766559;
  // Padded driver series so lagged couplings see real pre-history values.
  std::vector<std::vector<double>> padded(M);  // [n][c][t] flattened
  std::vector<std::vector<double>> amps(M);    // [n][c]
  for (int64_t m = 0; m < M; ++m) {
    if (coupling_of[m] != -1) continue;  // driven modes drawn afterwards
    padded[m].resize(N * C * (pad + T));
    amps[m].resize(N * C);
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        double amp = rng.uniform(0.5, 2.0);
        double phase = rng.uniform(0.0, kTwoPi);
        amps[m][n * C + c] = amp;
        double e = 0.0;
        for (int64_t t = 0; t < pad + T; ++t) {
          e = 0.6 * e + 0.25 * rng.normal();
          double real_t = static_cast<double>(t - pad);
          double base = amp * (1.1 + std::sin(kTwoPi * real_t / 48.0 + phase));
          double v = std::max(0.0, base + e);
          padded[m][(n * C + c) * (pad + T) + t] = v;
          if (t >= pad) ds.at(m, n, t - pad, c) = v;
        }
      }
  }
  for (int64_t m = 0; m < M; ++m) {
    if (coupling_of[m] == -1) continue;
    const CouplingSpec& cp = spec.couplings[coupling_of[m]];
    const std::vector<double>& src = padded[cp.source];
    for (int64_t n = 0; n < N; ++n)
      for (int64_t c = 0; c < C; ++c) {
        double sigma = cp.noise >= 0.0
                           ? cp.noise
                           : 0.15 * std::abs(cp.gain) * amps[cp.source][n * C + c];
        for (int64_t t = 0; t < T; ++t) {
          double lagged = src[(n * C + c) * (pad + T) + (t + pad - cp.lag)];
          double v = cp.gain * lagged + sigma * rng.normal();
          ds.at(m, n, t, c) = std::max(0.0, v);
        }
      }
  }
  return ds;
}

}  // namespace simmst
