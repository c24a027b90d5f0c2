#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "simmst/model.hpp"
#include "simmst/training.hpp"

namespace simmst {

// Everything a run needs, merged from defaults, an optional JSON config file,
// and command-line overrides (in that precedence). Model dimensions that
// depend on the dataset (num_modes, num_nodes, channels) are bound later via
// model_config().
struct RunConfig {
  // model
  int64_t hidden_dim = 32;
  int64_t embed_dim = 40;
  int64_t num_layers = 3;
  int64_t topk = 20;
  int64_t history_len = 12;
  int64_t horizon = 12;
  std::string tdl_kind = "mlp";
  bool enable_tdl = true;
  bool enable_csrl = true;
  bool enable_ccl = true;
  bool share_projections = false;
  bool zero_cross_relations = false;
  std::vector<int64_t> temporal_lengths;  // empty: ceil-halving schedule

  // training
  double learning_rate = 0.001;
  int64_t batch_size = 128;
  int64_t max_epochs = 1000;
  int64_t patience = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // 0 disables clipping

  // run plumbing
  std::string dataset;     // dataset directory
  std::string output_dir;  // where artifacts land
  uint64_t seed = 0;
  std::vector<int64_t> horizon_steps = {3, 6, 12};
  // Whether horizon_steps came from the file or an override rather than the
  // derived default; checkpoint-driven commands re-derive when false.
  bool horizon_steps_explicit = false;

  void validate() const;

  TrainConfig train_config() const;

  // Binds the dataset-dependent dimensions. topk is capped at num_nodes so
  // the large-graph default works on small graphs.
  SimMstConfig model_config(int64_t num_modes, int64_t num_nodes,
                            int64_t channels) const;

  // Canonical resolved form, echoed into the run directory.
  std::string to_json_text() const;
};

// Key/value overrides as they arrive from the command line; values are parsed
// according to the key's declared type.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// defaults <- file (optional, "" skips) <- overrides. Unknown keys are
// rejected with a nearest-match suggestion; type mismatches name the key.
RunConfig parse_run_config(const std::string& file_path,
                           const ConfigOverrides& overrides);

// Same merge applied to config text instead of a file on disk.
RunConfig parse_run_config_text(const std::string& json_text,
                                const ConfigOverrides& overrides);

// Edit distance used for the typo suggestions; exposed for tests.
size_t edit_distance(const std::string& a, const std::string& b);

// The adaptive metric-step default: {3, 6, 12} clipped to the horizon, with
// the final step always included.
std::vector<int64_t> default_horizon_steps(int64_t horizon);

}  // namespace simmst
