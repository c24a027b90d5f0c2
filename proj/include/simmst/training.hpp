#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "simmst/data.hpp"
#include "simmst/metrics.hpp"
#include "simmst/model.hpp"

namespace simmst {

struct TrainConfig {
  double learning_rate = 0.001;
  int64_t batch_size = 128;
  int64_t max_epochs = 1000;
  int64_t patience = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // <= 0 disables gradient clipping
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Adam with bias correction over a model's parameter registry. step() reads
// the accumulated gradients, updates the parameters in place, and clears the
// gradients. A non-finite gradient raises ContractError naming the parameter.
class AdamState {
 public:
  AdamState(const std::vector<std::pair<std::string, Tensor>>& params,
            const TrainConfig& cfg);
  void step();
  // Scales all gradients by clip_norm / ||g|| when the global norm exceeds
  // clip_norm. No-op when clipping is disabled.
  void clip_gradients();
  int64_t steps_taken() const { return t_; }

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<std::vector<double>> m_, v_;
  TrainConfig cfg_;
  int64_t t_ = 0;
};

// Sum over modes, nodes, horizon steps, and channels of |pred - truth| for
// one sample. The batch mean is taken by the caller.
Tensor mae_loss(const Tensor& pred, const Tensor& truth);
Tensor mae_loss(const std::vector<Tensor>& pred,
                const std::vector<Tensor>& truth);

struct EpochRecord {
  int64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int64_t best_epoch = 0;  // 0 when no epoch improved on the initial snapshot
  double best_val_loss = 0.0;
  bool aborted_non_finite = false;
  int64_t steps_taken = 0;
};

// Line-delimited history log: "epoch train_loss val_loss wall_ms" with %.17g
// floats, one record per line.
std::string history_to_log(const std::vector<EpochRecord>& history);

// Seeded mini-batch training with early stopping. Shuffles the training
// windows each epoch, averages the per-sample loss inside each batch, and
// validates after every epoch. The model is left holding the parameters of
// the best validation epoch. Stops when epochs since the last strict
// improvement exceed the patience, when max_epochs is reached, or (leaving
// the best snapshot in place) when a non-finite loss appears.
TrainResult train(SimMstModel& model,
                  const std::vector<WindowSample>& train_windows,
                  const std::vector<WindowSample>& val_windows,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// Mean per-sample loss over a window set, no gradients.
double dataset_loss(const SimMstModel& model,
                    const std::vector<WindowSample>& windows);

struct EvaluateResult {
  MetricTable table;
  double loss = 0.0;  // scaled-space objective over the windows
  int64_t num_windows = 0;
};

// Metric grid straight from per-window predictions and truths in original
// units; preds/truths are [window][mode] tensors of shape [N, H, C]. The
// pooled row treats every (window, horizon step) pair as one sample of its
// (node, channel) series.
MetricTable metric_table_from_predictions(
    const std::vector<std::vector<Tensor>>& preds,
    const std::vector<std::vector<Tensor>>& truths,
    const std::vector<std::string>& mode_names,
    const std::vector<int64_t>& horizon_steps);

// Metrics in original units at the given 1-based horizon steps. Windows must
// come from the scaler's transformed dataset; predictions and targets are
// inverted before the metric computation. A horizon step outside [1, H]
// raises ConfigError.
EvaluateResult evaluate(const SimMstModel& model,
                        const std::vector<WindowSample>& windows,
                        const Scaler& scaler,
                        const std::vector<std::string>& mode_names,
                        const std::vector<int64_t>& horizon_steps);

// The standard comparison set: the full model plus one variant per disabled
// stage.
std::vector<std::pair<std::string, SimMstConfig>> ablation_variants(
    const SimMstConfig& base);

}  // namespace simmst
