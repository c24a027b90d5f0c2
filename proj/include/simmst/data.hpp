#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simmst/error.hpp"
#include "simmst/tensor.hpp"

namespace simmst {

// Proleptic Gregorian day count relative to 1970-01-01 (a Thursday).
int64_t days_from_civil(int64_t year, int month, int day);
void civil_from_days(int64_t days, int64_t& year, int& month, int& day);

struct Timestamp {
  int64_t year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;

  bool operator==(const Timestamp&) const = default;
};

// Strict "YYYY-MM-DDTHH:MM". Throws ConfigError on malformed input or an
// impossible calendar date.
Timestamp parse_iso8601(const std::string& text);
std::string format_iso8601(const Timestamp& ts);

// Minutes since 1970-01-01T00:00.
int64_t timestamp_minutes(const Timestamp& ts);
Timestamp add_minutes(const Timestamp& ts, int64_t minutes);

// 48 half-hour slots per day and Monday-based weekday, both from an absolute
// minute count (floored for dates before the epoch).
int64_t tod_slot(int64_t abs_minutes);
int64_t dow_from_minutes(int64_t abs_minutes);

// Aligned multi-mode series: every mode shares the node count, time axis,
// channel count, and timestamp grid. Values are laid out mode-major:
// ((m * N + n) * T + t) * C + c.
struct MultiModeDataset {
  int64_t num_modes = 0;
  int64_t num_nodes = 0;
  int64_t num_steps = 0;
  int64_t num_channels = 0;
  std::vector<std::string> mode_names;
  std::vector<std::string> channel_names;
  Timestamp start;
  int64_t step_minutes = 30;
  std::vector<double> values;

  int64_t offset(int64_t m, int64_t n, int64_t t, int64_t c) const;
  double at(int64_t m, int64_t n, int64_t t, int64_t c) const;
  double& at(int64_t m, int64_t n, int64_t t, int64_t c);

  int64_t tod_index(int64_t t) const;
  int64_t dow_index(int64_t t) const;

  // [N, len, C] slice of one mode starting at time t0.
  Tensor mode_window(int64_t m, int64_t t0, int64_t len) const;

  // Throws IoError naming the first offending dimension, name list, or
  // non-finite cell.
  void validate() const;
};

// Directory layout: metadata.json plus one <mode_name>.bin (f64 little-endian,
// node-major [N, T, C]) per mode. A <mode_name>.csv with header
// node,time_index,channel,value is accepted instead and converted on load.
MultiModeDataset load_dataset(const std::string& dir);
void save_dataset(const MultiModeDataset& ds, const std::string& dir);

struct IndexRange {
  int64_t begin = 0;
  int64_t end = 0;
  int64_t size() const { return end - begin; }
};

struct SplitRanges {
  IndexRange train, val, test;
};

// 70/15/15 chronological split by floor; every split must fit at least one
// history+horizon window.
SplitRanges chronological_split(int64_t num_steps, int64_t history_len,
                                int64_t horizon);

struct WindowSample {
  std::vector<Tensor> history;  // per mode [N, W, C]
  std::vector<Tensor> target;   // per mode [N, H, C]
  int64_t anchor = 0;           // last observed step
  int64_t tod = 0;
  int64_t dow = 0;
};

// Every window fully inside [range.begin, range.end): history [s, s+W),
// target [s+W, s+W+H).
std::vector<WindowSample> make_windows(const MultiModeDataset& ds,
                                       IndexRange range, int64_t history_len,
                                       int64_t horizon);

// Per-(mode, channel) z-score fitted on a time range, population standard
// deviation floored at 1e-8.
class Scaler {
 public:
  void fit(const MultiModeDataset& ds, IndexRange range);
  MultiModeDataset transform(const MultiModeDataset& ds) const;
  // x * std + mean over the channel axis (last) of one mode's tensor.
  Tensor invert(const Tensor& x, int64_t mode) const;
  double mean(int64_t mode, int64_t channel) const;
  double stddev(int64_t mode, int64_t channel) const;
  bool fitted() const { return num_modes_ > 0; }

  int64_t num_modes() const { return num_modes_; }
  int64_t num_channels() const { return num_channels_; }
  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& stddevs() const { return std_; }
  void restore(int64_t modes, int64_t channels, std::vector<double> means,
               std::vector<double> stddevs);

 private:
  int64_t num_modes_ = 0;
  int64_t num_channels_ = 0;
  std::vector<double> mean_, std_;
};

// Driven mode targets receive gain * source(t - lag) plus Gaussian noise,
// clamped at zero. noise < 0 selects 0.15 * |gain| * (source node amplitude).
struct CouplingSpec {
  int64_t source = 0;
  int64_t target = 1;
  int64_t lag = 0;
  double gain = 1.0;
  double noise = -1.0;
};

struct SyntheticSpec {
  int64_t num_modes = 2;
  int64_t num_nodes = 8;
  int64_t num_steps = 400;
  int64_t num_channels = 1;
  int64_t step_minutes = 30;
  Timestamp start{2024, 1, 1, 0, 0};
  std::vector<CouplingSpec> couplings;
  uint64_t seed = 0;
};

// Driver modes carry a daily sinusoid (random per-node amplitude and phase)
// plus AR(1) noise, clamped at zero. Modes named as coupling targets carry
// only the lagged, scaled source signal plus noise. Bitwise reproducible for
// a fixed spec.
MultiModeDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace simmst
