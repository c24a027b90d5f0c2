#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "simmst/tensor.hpp"

namespace simmst {

enum class TdlKind { kMlp, kSeasonal };

std::string tdl_kind_name(TdlKind kind);
TdlKind tdl_kind_from_name(const std::string& name);  // ConfigError on unknown

struct SimMstConfig {
  int64_t num_modes = 2;    // M
  int64_t num_nodes = 1;    // N
  int64_t history_len = 12; // W
  int64_t horizon = 12;     // H
  int64_t channels = 1;     // C
  int64_t hidden_dim = 32;  // D
  int64_t embed_dim = 40;   // per-node embedding width
  int64_t num_layers = 3;   // L
  int64_t topk = 20;        // kept entries per relation row
  TdlKind tdl_kind = TdlKind::kMlp;
  bool enable_tdl = true;
  bool enable_csrl = true;
  bool enable_ccl = true;
  // Diagnostic switches. share_projections reuses the in-projection for the
  // out-projection, which zeroes every learned relation exactly.
  // zero_cross_relations drops the cross-mode terms from aggregation so an
  // M-mode model factors into independent single-mode models.
  bool share_projections = false;
  bool zero_cross_relations = false;
  // Temporal lengths T_0..T_L per layer; empty selects the default
  // T_0 = history_len, T_l = ceil(T_{l-1} / 2).
  std::vector<int64_t> temporal_lengths;

  void validate() const;  // throws ConfigError
  std::vector<int64_t> resolved_temporal_lengths() const;
};

// y = x W + b over the last axis.
struct Affine {
  Tensor weight;
  Tensor bias;
};

// Two affine maps; the activation between them is chosen by the caller.
struct Mlp {
  Affine fc0;
  Affine fc1;
};

struct NormParams {
  Tensor gamma;
  Tensor beta;
};

// Temporal layer parameters. The mlp members are used by kMlp, the
// filter/bias spectra by kSeasonal; the layer norm by both.
struct TdlParams {
  Mlp mlp;
  Tensor filter_re, filter_im;  // one complex coefficient per frequency bin
  Tensor bias_re, bias_im;
  NormParams norm;
};

struct CclParams {
  Mlp mlp;
  NormParams norm;
};

// Node embedding tables plus the projection perceptrons shared by all modes.
// With share_projections the out projection aliases the in projection.
struct ModeEmbeddingBank {
  std::vector<Tensor> tables;  // per mode, [N, embed_dim]
  Mlp in_proj;
  Mlp out_proj;
};

struct ProjectedEmbeddings {
  std::vector<Tensor> in;   // per mode, [N, embed_dim]
  std::vector<Tensor> out;  // per mode, [N, embed_dim]
};

// Normalized relation matrices of one forward pass plus the learnable pair
// weights. Entries skipped by zero_cross_relations stay undefined.
struct RelationMatrixSet {
  int64_t num_modes = 0;
  std::vector<Tensor> matrices;  // [M*M]; (i,j) at i*M+j
  Tensor pair_weights;           // [M,M]

  const Tensor& at(int64_t i, int64_t j) const;
};

Tensor affine_apply(const Affine& a, const Tensor& x);
Tensor mlp_gelu(const Mlp& m, const Tensor& x);
Tensor mlp_tanh(const Mlp& m, const Tensor& x);

// Per-timestamp affine lift of raw channels into the hidden width.
Tensor init_hidden(const Tensor& x, const Affine& f_init);

// Temporal dependency layer: learned mixing along time (dense or seasonal),
// layer-normalized, plus the parameter-free mean-pooled residual. Disabled
// layers return the pooled residual alone.
Tensor tdl_forward(const Tensor& h, const TdlParams& params, TdlKind kind,
                   int64_t out_len, bool enabled);

ProjectedEmbeddings project_embeddings(const ModeEmbeddingBank& bank);

// Net directed impact of mode j on mode i: relu(tanh(out_j in_i^T - in_j out_i^T)).
Tensor learn_relation_matrix(const ProjectedEmbeddings& pe, int64_t mode_i,
                             int64_t mode_j);
Tensor learn_relation_matrix(const ModeEmbeddingBank& bank, int64_t mode_i,
                             int64_t mode_j);

// Row-normalized adjacency with self-loops: A = D^{-1}(S + I), D the diagonal
// of row sums of S + I. Rows sum to 1 and the diagonal stays positive for any
// nonnegative S.
Tensor normalize_relation_matrix(const Tensor& sparse_nonneg);

// S_hat = A T + A^T T over the node axis of T: [N, T_l, D].
Tensor cross_mode_propagate(const Tensor& a, const Tensor& t);

// S_i = sum_j (w_ij + [i == j]) S_hat_ij. Entries of s_hats may be undefined
// for pairs excluded from the forward pass; they contribute nothing.
Tensor aggregate_mode_impacts(const std::vector<Tensor>& s_hats,
                              const Tensor& pair_weights, int64_t mode_i);

// Channel correlation layer: D->D->D perceptron with GeLU, layer norm, plus
// identity residual. Disabled layers pass the input through.
Tensor ccl_forward(const Tensor& s, const CclParams& params, bool enabled);

// tod/dow row lookup, summed.
Tensor semantic_embedding(const Tensor& tod_table, const Tensor& dow_table,
                          int64_t tod_index, int64_t dow_index);

// Mean-pool each layer state over time, sum across layers, concatenate the
// semantic vector, and map through the mode head to [N, horizon, channels].
Tensor readout(const std::vector<Tensor>& hidden_states, const Tensor& semantic,
               const Mlp& head, int64_t horizon, int64_t channels);

class SimMstModel {
 public:
  SimMstModel(SimMstConfig config, uint64_t seed);

  const SimMstConfig& config() const { return cfg_; }

  // Canonical (name, tensor) registry. Registration order is fixed and the
  // initializer consumes seeded draws in exactly this order, so equal seeds
  // give equal parameters.
  const std::vector<std::pair<std::string, Tensor>>& parameters() const {
    return registry_;
  }
  int64_t parameter_count() const;
  void zero_grads();

  const ModeEmbeddingBank& bank() const { return bank_; }
  const Tensor& pair_weights() const { return pair_weights_; }

  // Relation matrices for one forward pass (topk-sparsified, normalized).
  RelationMatrixSet relation_matrices() const;

  // One sample: history per mode [N, W, C] -> prediction per mode [N, H, C].
  // The relation set actually used is copied into *trace when given.
  std::vector<Tensor> forward(const std::vector<Tensor>& history,
                              int64_t tod_index, int64_t dow_index,
                              RelationMatrixSet* trace = nullptr) const;

 private:
  SimMstConfig cfg_;
  ModeEmbeddingBank bank_;
  Tensor pair_weights_;
  std::vector<Affine> init_maps_;            // per mode
  std::vector<std::vector<TdlParams>> tdl_;  // [layer][mode]
  std::vector<std::vector<CclParams>> ccl_;  // [layer][mode]
  Tensor tod_table_, dow_table_;
  std::vector<Mlp> heads_;  // per mode
  std::vector<std::pair<std::string, Tensor>> registry_;
};

int64_t count_parameters(const SimMstModel& model);

// Parameter-count sweeps over num_nodes and history_len with growth-exponent
// fits. Sweeps must be geometric with ratio 2 and hold everything else fixed
// (topk is clamped to the swept node count).
struct ScalingReport {
  std::vector<int64_t> n_values, n_counts;
  std::vector<int64_t> w_values, w_counts;
  double n_exponent = 0.0;
  double w_exponent = 0.0;
  std::string to_text() const;
};

ScalingReport scaling_report(const SimMstConfig& base,
                             const std::vector<int64_t>& n_sweep,
                             const std::vector<int64_t>& w_sweep);

}  // namespace simmst
