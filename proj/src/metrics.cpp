#include "simmst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace simmst {

namespace {

void check_pair(const std::vector<double>& pred,
                const std::vector<double>& truth, const char* who) {
  if (pred.empty())
    throw ContractError(std::string(who) + ": empty input");
  if (pred.size() != truth.size())
    throw ContractError(std::string(who) + ": size mismatch " +
                        std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()));
}

bool is_constant(const std::vector<double>& v, size_t stride, size_t offset,
                 size_t count) {
  double lo = v[offset], hi = v[offset];
  for (size_t i = 1; i < count; ++i) {
    double x = v[offset + i * stride];
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return lo == hi;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, "mae");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, "rmse");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

std::optional<double> pearson(const std::vector<double>& pred,
                              const std::vector<double>& truth) {
  check_pair(pred, truth, "pearson");
  size_t n = pred.size();
  if (is_constant(truth, 1, 0, n)) return std::nullopt;
  if (is_constant(pred, 1, 0, n)) return 0.0;
  double mp = 0.0, mt = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mp += pred[i];
    mt += truth[i];
  }
  mp /= static_cast<double>(n);
  mt /= static_cast<double>(n);
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dp = pred[i] - mp, dt = truth[i] - mt;
    cov += dp * dt;
    vp += dp * dp;
    vt += dt * dt;
  }
  return cov / (std::sqrt(vp) * std::sqrt(vt));
}

std::optional<double> mean_series_corr(const std::vector<double>& pred,
                                       const std::vector<double>& truth,
                                       int64_t num_series) {
  check_pair(pred, truth, "mean_series_corr");
  if (num_series < 1 ||
      pred.size() % static_cast<size_t>(num_series) != 0)
    throw ContractError("mean_series_corr: " + std::to_string(pred.size()) +
                        " values do not tile " + std::to_string(num_series) +
                        " series");
  size_t samples = pred.size() / static_cast<size_t>(num_series);
  double sum = 0.0;
  int64_t used = 0;
  std::vector<double> p(samples), t(samples);
  for (int64_t s = 0; s < num_series; ++s) {
    for (size_t i = 0; i < samples; ++i) {
      p[i] = pred[i * num_series + s];
      t[i] = truth[i * num_series + s];
    }
    auto r = pearson(p, t);
    if (!r) continue;  // constant truth series carries no signal
    sum += *r;
    ++used;
  }
  if (used == 0) return std::nullopt;
  return sum / static_cast<double>(used);
}

std::string MetricTable::to_csv() const {
  std::ostringstream os;
  os << "mode,horizon,mae,rmse,corr\n";
  for (size_t m = 0; m < mode_names.size(); ++m) {
    auto row = [&](const std::string& horizon, const MetricEntry& e) {
      os << mode_names[m] << ',' << horizon << ',' << format_value(e.mae)
         << ',' << format_value(e.rmse) << ','
         << (e.corr ? format_value(*e.corr) : "nan") << '\n';
    };
    if (m < per_step.size())
      for (const auto& [step, entry] : per_step[m])
        row(std::to_string(step), entry);
    if (m < pooled.size()) row("all", pooled[m]);
  }
  return os.str();
}

}  // namespace simmst
