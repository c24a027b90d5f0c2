#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simmst/error.hpp"

namespace simmst {

// Mean absolute error over aligned arrays. Arrays must be nonempty and of
// equal length.
double mae(const std::vector<double>& pred, const std::vector<double>& truth);

// Root mean squared error, same contract as mae.
double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

// Pearson correlation of one series. nullopt when truth is constant; exactly
// 0 when only pred is constant. Constancy is max == min, which is immune to
// accumulation rounding.
std::optional<double> pearson(const std::vector<double>& pred,
                              const std::vector<double>& truth);

// Mean per-series Pearson correlation. Values are sample-major:
// v[s * num_series + p] is series p at sample s. Series with constant truth
// are excluded; nullopt when no series qualifies.
std::optional<double> mean_series_corr(const std::vector<double>& pred,
                                       const std::vector<double>& truth,
                                       int64_t num_series);

struct MetricEntry {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> corr;
};

// Per-mode, per-horizon-step metric grid plus a pooled all-steps row per
// mode. Horizon steps are 1-based.
struct MetricTable {
  std::vector<std::string> mode_names;
  std::vector<std::map<int64_t, MetricEntry>> per_step;  // [mode][step]
  std::vector<MetricEntry> pooled;                       // [mode], all steps

  // Header mode,horizon,mae,rmse,corr; one row per step then an "all" row
  // per mode. Missing correlations print as nan.
  std::string to_csv() const;
};

}  // namespace simmst
