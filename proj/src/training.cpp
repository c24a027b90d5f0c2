#include "simmst/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "simmst/rng.hpp"

namespace simmst {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (patience > max_epochs)
    throw ConfigError("patience " + std::to_string(patience) +
                      " exceeds max_epochs " + std::to_string(max_epochs));
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("adam betas must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be positive");
}

AdamState::AdamState(const std::vector<std::pair<std::string, Tensor>>& params,
                     const TrainConfig& cfg)
    : params_(params), cfg_(cfg) {
  cfg_.validate();
  for (const auto& [name, t] : params_) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

void AdamState::clip_gradients() {
  if (cfg_.clip_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& [name, t] : params_) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  double norm = std::sqrt(sq);
  if (norm <= cfg_.clip_norm) return;
  double factor = cfg_.clip_norm / norm;
  for (auto& [name, t] : params_) {
    if (!t.has_grad()) continue;
    Tensor tensor = t;
    for (double& g : tensor.grad_mut()) g *= factor;
  }
}

void AdamState::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& [name, tensor] = params_[i];
    Tensor t = tensor;
    auto& values = t.values_mut();
    const bool has_grad = t.has_grad();
    const std::vector<double>* grad = has_grad ? &t.grad() : nullptr;
    for (size_t k = 0; k < values.size(); ++k) {
      double g = has_grad ? (*grad)[k] : 0.0;
      if (!std::isfinite(g))
        throw ContractError("gradient for '" + name + "' is non-finite");
      m_[i][k] = cfg_.beta1 * m_[i][k] + (1.0 - cfg_.beta1) * g;
      v_[i][k] = cfg_.beta2 * v_[i][k] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m_[i][k] / bc1;
      double vhat = v_[i][k] / bc2;
      values[k] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    t.zero_grad();
  }
}

Tensor mae_loss(const Tensor& pred, const Tensor& truth) {
  if (pred.shape() != truth.shape())
    throw DimensionError("loss shapes differ: " + shape_to_string(pred.shape()) +
                         " vs " + shape_to_string(truth.shape()));
  return sum_all(abs(sub(pred, truth)));
}

Tensor mae_loss(const std::vector<Tensor>& pred,
                const std::vector<Tensor>& truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw DimensionError("loss needs matching nonempty mode lists");
  Tensor acc;
  for (size_t m = 0; m < pred.size(); ++m) {
    Tensor l = mae_loss(pred[m], truth[m]);
    acc = acc.defined() ? add(acc, l) : l;
  }
  return acc;
}

std::string history_to_log(const std::vector<EpochRecord>& history) {
  std::string out;
  char buf[160];
  for (const EpochRecord& r : history) {
    std::snprintf(buf, sizeof(buf), "%lld %.17g %.17g %.17g\n",
                  static_cast<long long>(r.epoch), r.train_loss, r.val_loss,
                  r.wall_ms);
    out += buf;
  }
  return out;
}

double dataset_loss(const SimMstModel& model,
                    const std::vector<WindowSample>& windows) {
  if (windows.empty()) throw ContractError("loss over an empty window set");
  double sum = 0.0;
  for (const WindowSample& w : windows) {
    auto preds = model.forward(w.history, w.tod, w.dow);
    sum += mae_loss(preds, w.target).scalar_value();
  }
  return sum / static_cast<double>(windows.size());
}

namespace {

std::vector<std::vector<double>> snapshot_params(const SimMstModel& model) {
  std::vector<std::vector<double>> snap;
  for (const auto& [name, t] : model.parameters()) snap.push_back(t.values());
  return snap;
}

void restore_params(SimMstModel& model,
                    const std::vector<std::vector<double>>& snap) {
  const auto& params = model.parameters();
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].second;
    t.values_mut() = snap[i];
  }
}

}  // namespace

TrainResult train(SimMstModel& model,
                  const std::vector<WindowSample>& train_windows,
                  const std::vector<WindowSample>& val_windows,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_windows.empty() || val_windows.empty())
    throw ConfigError("training needs nonempty train and val window sets");

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  auto best_snap = snapshot_params(model);  // last good checkpoint
  AdamState adam(model.parameters(), cfg);
  Rng rng(cfg.seed);
  std::vector<size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const int64_t n = static_cast<int64_t>(train_windows.size());
  int64_t since_improvement = 0;

  for (int64_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss_sum = 0.0;
    bool bad = false;
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      int64_t stop = std::min(n, start + cfg.batch_size);
      model.zero_grads();
      double batch_value;
      {
        Tape tape;
        TapeScope scope(tape);
        Tensor acc;
        for (int64_t k = start; k < stop; ++k) {
          const WindowSample& w = train_windows[order[k]];
          auto preds = model.forward(w.history, w.tod, w.dow);
          Tensor l = mae_loss(preds, w.target);
          acc = acc.defined() ? add(acc, l) : l;
        }
        Tensor mean_loss = scale(acc, 1.0 / static_cast<double>(stop - start));
        batch_value = mean_loss.scalar_value();
        if (!std::isfinite(batch_value)) {
          bad = true;
          break;
        }
        tape.backward(mean_loss);
      }
      adam.clip_gradients();
      adam.step();
      epoch_loss_sum += batch_value * static_cast<double>(stop - start);
    }
    if (bad) {
      result.aborted_non_finite = true;
      break;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss_sum / static_cast<double>(n);
    rec.val_loss = dataset_loss(model, val_windows);
    if (!std::isfinite(rec.val_loss)) {
      result.aborted_non_finite = true;
      break;
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      best_snap = snapshot_params(model);
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (since_improvement > cfg.patience) break;
  }

  restore_params(model, best_snap);
  result.steps_taken = adam.steps_taken();
  return result;
}

MetricTable metric_table_from_predictions(
    const std::vector<std::vector<Tensor>>& preds,
    const std::vector<std::vector<Tensor>>& truths,
    const std::vector<std::string>& mode_names,
    const std::vector<int64_t>& horizon_steps) {
  if (preds.empty() || preds.size() != truths.size())
    throw ContractError("prediction and truth window lists must match");
  const int64_t num_modes = static_cast<int64_t>(mode_names.size());
  const int64_t num_windows = static_cast<int64_t>(preds.size());
  if (static_cast<int64_t>(preds[0].size()) != num_modes)
    throw ContractError("per-window mode count does not match mode_names");
  const Shape& shape = preds[0][0].shape();  // [N, H, C]
  const int64_t nodes = shape[0], horizon = shape[1], channels = shape[2];
  for (int64_t s : horizon_steps)
    if (s < 1 || s > horizon)
      throw ConfigError("horizon step " + std::to_string(s) +
                        " outside [1, " + std::to_string(horizon) + "]");

  MetricTable table;
  table.mode_names = mode_names;
  table.per_step.resize(num_modes);
  table.pooled.resize(num_modes);
  const int64_t series = nodes * channels;
  for (int64_t m = 0; m < num_modes; ++m) {
    for (int64_t s : horizon_steps) {
      std::vector<double> p, t;
      p.reserve(num_windows * series);
      t.reserve(num_windows * series);
      for (int64_t w = 0; w < num_windows; ++w)
        for (int64_t node = 0; node < nodes; ++node)
          for (int64_t c = 0; c < channels; ++c) {
            int64_t idx = (node * horizon + (s - 1)) * channels + c;
            p.push_back(preds[w][m].values()[idx]);
            t.push_back(truths[w][m].values()[idx]);
          }
      MetricEntry e;
      e.mae = mae(p, t);
      e.rmse = rmse(p, t);
      e.corr = mean_series_corr(p, t, series);
      table.per_step[m][s] = e;
    }
    // Pooled row: every horizon step of every window counts as one sample of
    // its (node, channel) series.
    std::vector<double> p, t;
    p.reserve(num_windows * horizon * series);
    t.reserve(num_windows * horizon * series);
    for (int64_t w = 0; w < num_windows; ++w)
      for (int64_t h = 0; h < horizon; ++h)
        for (int64_t node = 0; node < nodes; ++node)
          for (int64_t c = 0; c < channels; ++c) {
            int64_t idx = (node * horizon + h) * channels + c;
            p.push_back(preds[w][m].values()[idx]);
            t.push_back(truths[w][m].values()[idx]);
          }
    MetricEntry e;
    e.mae = mae(p, t);
    e.rmse = rmse(p, t);
    e.corr = mean_series_corr(p, t, series);
    table.pooled[m] = e;
  }
  return table;
}

EvaluateResult evaluate(const SimMstModel& model,
                        const std::vector<WindowSample>& windows,
                        const Scaler& scaler,
                        const std::vector<std::string>& mode_names,
                        const std::vector<int64_t>& horizon_steps) {
  if (windows.empty()) throw ContractError("evaluate needs at least one window");
  const int64_t num_modes = model.config().num_modes;
  if (static_cast<int64_t>(mode_names.size()) != num_modes)
    throw ContractError("evaluate got " + std::to_string(mode_names.size()) +
                        " mode names for " + std::to_string(num_modes) +
                        " modes");
  for (int64_t s : horizon_steps)
    if (s < 1 || s > model.config().horizon)
      throw ConfigError("horizon step " + std::to_string(s) + " outside [1, " +
                        std::to_string(model.config().horizon) + "]");

  EvaluateResult result;
  result.num_windows = static_cast<int64_t>(windows.size());
  std::vector<std::vector<Tensor>> preds_raw, truths_raw;
  double loss_sum = 0.0;
  for (const WindowSample& w : windows) {
    auto preds = model.forward(w.history, w.tod, w.dow);
    loss_sum += mae_loss(preds, w.target).scalar_value();
    std::vector<Tensor> pr, tr;
    for (int64_t m = 0; m < num_modes; ++m) {
      pr.push_back(scaler.invert(preds[m], m));
      tr.push_back(scaler.invert(w.target[m], m));
    }
    preds_raw.push_back(std::move(pr));
    truths_raw.push_back(std::move(tr));
  }
  result.loss = loss_sum / static_cast<double>(windows.size());
  result.table = metric_table_from_predictions(preds_raw, truths_raw,
                                               mode_names, horizon_steps);
  return result;
}

std::vector<std::pair<std::string, SimMstConfig>> ablation_variants(
    const SimMstConfig& base) {
  std::vector<std::pair<std::string, SimMstConfig>> out;
  out.emplace_back("full", base);
  SimMstConfig no_tdl = base;
  no_tdl.enable_tdl = false;
  out.emplace_back("no_tdl", no_tdl);
  SimMstConfig no_csrl = base;
  no_csrl.enable_csrl = false;
  out.emplace_back("no_csrl", no_csrl);
  SimMstConfig no_ccl = base;
  no_ccl.enable_ccl = false;
  out.emplace_back("no_ccl", no_ccl);
  return out;
}

}  // namespace simmst
