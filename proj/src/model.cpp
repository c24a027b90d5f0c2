#include "simmst/model.hpp"

#include <cmath>
#include <sstream>

#include "simmst/fft.hpp"
#include "simmst/rng.hpp"

namespace simmst {

std::string tdl_kind_name(TdlKind kind) {
  return kind == TdlKind::kMlp ? "mlp" : "seasonal";
}

TdlKind tdl_kind_from_name(const std::string& name) {
  if (name == "mlp") return TdlKind::kMlp;
  if (name == "seasonal") return TdlKind::kSeasonal;
  throw ConfigError("unknown tdl kind '" + name + "' (expected mlp or seasonal)");
}

void SimMstConfig::validate() const {
  auto positive = [](int64_t v, const char* name) {
    if (v < 1)
      throw ConfigError(std::string(name) + " must be >= 1, got " +
                        std::to_string(v));
  };
  positive(num_modes, "num_modes");
  positive(num_nodes, "num_nodes");
  positive(history_len, "history_len");
  positive(horizon, "horizon");
  positive(channels, "channels");
  positive(hidden_dim, "hidden_dim");
  positive(embed_dim, "embed_dim");
  positive(num_layers, "num_layers");
  positive(topk, "topk");
  if (topk > num_nodes)
    throw ConfigError("topk " + std::to_string(topk) + " exceeds num_nodes " +
                      std::to_string(num_nodes));
  if (!temporal_lengths.empty()) {
    if (static_cast<int64_t>(temporal_lengths.size()) != num_layers + 1)
      throw ConfigError("temporal_lengths must list T_0..T_L (" +
                        std::to_string(num_layers + 1) + " values), got " +
                        std::to_string(temporal_lengths.size()));
    if (temporal_lengths[0] != history_len)
      throw ConfigError("temporal_lengths[0] must equal history_len");
    for (size_t l = 1; l < temporal_lengths.size(); ++l) {
      if (temporal_lengths[l] < 1 ||
          temporal_lengths[l] > temporal_lengths[l - 1])
        throw ConfigError("temporal_lengths must shrink monotonically and stay >= 1");
    }
  }
}

std::vector<int64_t> SimMstConfig::resolved_temporal_lengths() const {
  if (!temporal_lengths.empty()) return temporal_lengths;
  std::vector<int64_t> lens(num_layers + 1);
  lens[0] = history_len;
  for (int64_t l = 1; l <= num_layers; ++l)
    lens[l] = (lens[l - 1] + 1) / 2;  // ceil halving
  return lens;
}

const Tensor& RelationMatrixSet::at(int64_t i, int64_t j) const {
  if (i < 0 || i >= num_modes || j < 0 || j >= num_modes)
    throw ContractError("relation pair (" + std::to_string(i) + "," +
                        std::to_string(j) + ") out of range");
  const Tensor& t = matrices[i * num_modes + j];
  if (!t.defined())
    throw ContractError("relation pair (" + std::to_string(i) + "," +
                        std::to_string(j) + ") was excluded from this pass");
  return t;
}

Tensor affine_apply(const Affine& a, const Tensor& x) {
  return add(matmul(x, a.weight), a.bias);
}

Tensor mlp_gelu(const Mlp& m, const Tensor& x) {
  return affine_apply(m.fc1, gelu(affine_apply(m.fc0, x)));
}

Tensor mlp_tanh(const Mlp& m, const Tensor& x) {
  return affine_apply(m.fc1, tanh(affine_apply(m.fc0, x)));
}

Tensor init_hidden(const Tensor& x, const Affine& f_init) {
  if (x.ndim() != 3)
    throw DimensionError("init_hidden expects [N,W,C], got " +
                         shape_to_string(x.shape()));
  return affine_apply(f_init, x);
}

Tensor tdl_forward(const Tensor& h, const TdlParams& params, TdlKind kind,
                   int64_t out_len, bool enabled) {
  if (h.ndim() != 3)
    throw DimensionError("tdl_forward expects [N,T,D], got " +
                         shape_to_string(h.shape()));
  Tensor pooled = pool_time(h, out_len);
  if (!enabled) return pooled;
  int64_t t_in = h.dim(1);
  if (kind == TdlKind::kMlp) {
    if (params.mlp.fc0.weight.dim(0) != t_in)
      throw DimensionError("tdl_forward got temporal length " +
                           std::to_string(t_in) + ", parameters expect " +
                           std::to_string(params.mlp.fc0.weight.dim(0)));
    // Mix along time: move T last, apply the perceptron, move it back.
    Tensor x = permute(h, {0, 2, 1});  // [N,D,T_in]
    Tensor f = permute(mlp_gelu(params.mlp, x), {0, 2, 1});  // [N,T_out,D]
    Tensor normed = layer_norm(f, params.norm.gamma, params.norm.beta);
    return add(normed, pooled);
  }
  // Seasonal kind: per-bin complex filter in the frequency domain.
  Tensor x = permute(h, {0, 2, 1});  // [N,D,T_in]
  Spectrum s = real_fft(x);
  if (params.filter_re.dim(-1) != s.re.dim(-1))
    throw DimensionError("seasonal filter has " +
                         std::to_string(params.filter_re.dim(-1)) +
                         " bins, spectrum has " + std::to_string(s.re.dim(-1)));
  Tensor fr = add(sub(mul(s.re, params.filter_re), mul(s.im, params.filter_im)),
                  params.bias_re);
  Tensor fi = add(add(mul(s.re, params.filter_im), mul(s.im, params.filter_re)),
                  params.bias_im);
  Tensor y = inverse_real_fft(Spectrum{fr, fi}, t_in);  // [N,D,T_in]
  Tensor f = pool_time(permute(y, {0, 2, 1}), out_len);
  Tensor normed = layer_norm(f, params.norm.gamma, params.norm.beta);
  return add(normed, pooled);
}

ProjectedEmbeddings project_embeddings(const ModeEmbeddingBank& bank) {
  ProjectedEmbeddings pe;
  for (const Tensor& table : bank.tables) {
    pe.in.push_back(mlp_tanh(bank.in_proj, table));
    pe.out.push_back(mlp_tanh(bank.out_proj, table));
  }
  return pe;
}

Tensor learn_relation_matrix(const ProjectedEmbeddings& pe, int64_t mode_i,
                             int64_t mode_j) {
  int64_t modes = static_cast<int64_t>(pe.in.size());
  if (mode_i < 0 || mode_i >= modes || mode_j < 0 || mode_j >= modes)
    throw ContractError("relation pair (" + std::to_string(mode_i) + "," +
                        std::to_string(mode_j) + ") out of range");
  // Gross impact of j on i minus the reverse impact, squashed and rectified.
  Tensor gross = matmul(pe.out[mode_j], permute(pe.in[mode_i], {1, 0}));
  Tensor reverse = matmul(pe.in[mode_j], permute(pe.out[mode_i], {1, 0}));
  return relu(tanh(sub(gross, reverse)));
}

Tensor learn_relation_matrix(const ModeEmbeddingBank& bank, int64_t mode_i,
                             int64_t mode_j) {
  return learn_relation_matrix(project_embeddings(bank), mode_i, mode_j);
}

Tensor normalize_relation_matrix(const Tensor& sparse_nonneg) {
  if (sparse_nonneg.ndim() != 2 ||
      sparse_nonneg.dim(0) != sparse_nonneg.dim(1))
    throw DimensionError("normalize_relation_matrix expects a square matrix, got " +
                         shape_to_string(sparse_nonneg.shape()));
  int64_t n = sparse_nonneg.dim(0);
  Tensor with_loops = add(sparse_nonneg, Tensor::identity(n));
  // Row sums are >= 1, so the inverse degree is always finite.
  Tensor row_sums = matmul(with_loops, Tensor::full({n, 1}, 1.0));
  return mul(with_loops, reciprocal(row_sums));
}

Tensor cross_mode_propagate(const Tensor& a, const Tensor& t) {
  if (a.ndim() != 2 || a.dim(0) != a.dim(1))
    throw DimensionError("cross_mode_propagate expects square A, got " +
                         shape_to_string(a.shape()));
  if (t.ndim() != 3 || t.dim(0) != a.dim(0))
    throw DimensionError("cross_mode_propagate node counts differ: " +
                         shape_to_string(a.shape()) + " vs " +
                         shape_to_string(t.shape()));
  int64_t n = t.dim(0), len = t.dim(1), d = t.dim(2);
  Tensor flat = reshape(t, {n, len * d});
  Tensor fwd = matmul(a, flat);
  Tensor bwd = matmul(permute(a, {1, 0}), flat);
  return reshape(add(fwd, bwd), {n, len, d});
}

Tensor aggregate_mode_impacts(const std::vector<Tensor>& s_hats,
                              const Tensor& pair_weights, int64_t mode_i) {
  int64_t modes = pair_weights.dim(0);
  if (pair_weights.ndim() != 2 || pair_weights.dim(1) != modes)
    throw DimensionError("pair_weights must be [M,M], got " +
                         shape_to_string(pair_weights.shape()));
  if (static_cast<int64_t>(s_hats.size()) != modes)
    throw ContractError("aggregate_mode_impacts needs one entry per mode");
  if (mode_i < 0 || mode_i >= modes)
    throw ContractError("mode index out of range");
  if (!s_hats[mode_i].defined())
    throw ContractError("self-mode impact must be present");
  // Self term first: coefficient w_ii + 1.
  Tensor coeff = add_scalar(take(pair_weights, mode_i * modes + mode_i), 1.0);
  Tensor acc = mul(s_hats[mode_i], coeff);
  for (int64_t j = 0; j < modes; ++j) {
    if (j == mode_i || !s_hats[j].defined()) continue;
    if (s_hats[j].shape() != s_hats[mode_i].shape())
      throw DimensionError("impact shapes differ across modes");
    Tensor w = take(pair_weights, mode_i * modes + j);
    acc = add(acc, mul(s_hats[j], w));
  }
  return acc;
}

Tensor ccl_forward(const Tensor& s, const CclParams& params, bool enabled) {
  if (s.ndim() != 3)
    throw DimensionError("ccl_forward expects [N,T,D], got " +
                         shape_to_string(s.shape()));
  if (!enabled) return s;
  Tensor f = mlp_gelu(params.mlp, s);
  return add(layer_norm(f, params.norm.gamma, params.norm.beta), s);
}

Tensor semantic_embedding(const Tensor& tod_table, const Tensor& dow_table,
                          int64_t tod_index, int64_t dow_index) {
  return add(embedding_row(tod_table, tod_index),
             embedding_row(dow_table, dow_index));
}

Tensor readout(const std::vector<Tensor>& hidden_states, const Tensor& semantic,
               const Mlp& head, int64_t horizon, int64_t channels) {
  if (hidden_states.empty())
    throw ContractError("readout needs at least one hidden state");
  if (!semantic.defined())
    throw ContractError("readout needs the time-semantic vector");
  int64_t n = hidden_states[0].dim(0);
  int64_t d = hidden_states[0].dim(2);
  Tensor pooled;
  for (const Tensor& h : hidden_states) {
    Tensor p = reshape(pool_time(h, 1), {n, d});
    pooled = pooled.defined() ? add(pooled, p) : p;
  }
  Tensor sem_rows = broadcast_to(reshape(semantic, {1, d}), {n, d});
  Tensor z = concat_last(pooled, sem_rows);
  Tensor y = mlp_gelu(head, z);  // [N, horizon*channels]
  return reshape(y, {n, horizon, channels});
}

namespace {

Tensor uniform_init(Rng& rng, Shape shape, double bound) {
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace

SimMstModel::SimMstModel(SimMstConfig config, uint64_t seed)
    : cfg_(std::move(config)) {
  cfg_.validate();
  const int64_t M = cfg_.num_modes, N = cfg_.num_nodes, C = cfg_.channels;
  const int64_t D = cfg_.hidden_dim, De = cfg_.embed_dim, L = cfg_.num_layers;
  const int64_t H = cfg_.horizon;
  auto lens = cfg_.resolved_temporal_lengths();
  Rng rng(seed);
  auto reg = [&](const std::string& name, Tensor t) {
    t.set_requires_grad(true);
    registry_.emplace_back(name, t);
    return t;
  };
  auto mode_name = [](int64_t m) { return "mode" + std::to_string(m); };

  // Registration order is the seed-consumption order. Disabled components
  // register nothing, so ablated models carry only the parameters they use.
  if (cfg_.enable_csrl) {
    double be = 1.0 / std::sqrt(static_cast<double>(De));
    for (int64_t m = 0; m < M; ++m)
      bank_.tables.push_back(
          reg(mode_name(m) + ".embedding", uniform_init(rng, {N, De}, be)));
    auto make_proj = [&](const std::string& prefix) {
      Mlp p;
      p.fc0.weight = reg(prefix + ".fc0.weight", uniform_init(rng, {De, De}, be));
      p.fc0.bias = reg(prefix + ".fc0.bias", Tensor::zeros({De}));
      p.fc1.weight = reg(prefix + ".fc1.weight", uniform_init(rng, {De, De}, be));
      p.fc1.bias = reg(prefix + ".fc1.bias", Tensor::zeros({De}));
      return p;
    };
    bank_.in_proj = make_proj("relation.in_proj");
    bank_.out_proj = cfg_.share_projections ? bank_.in_proj
                                            : make_proj("relation.out_proj");
    pair_weights_ = reg("relation.pair_weights", Tensor::zeros({M, M}));
  }

  for (int64_t m = 0; m < M; ++m) {
    Affine f;
    f.weight = reg(mode_name(m) + ".init.weight",
                   uniform_init(rng, {C, D}, 1.0 / std::sqrt(double(C))));
    f.bias = reg(mode_name(m) + ".init.bias", Tensor::zeros({D}));
    init_maps_.push_back(f);
  }

  tdl_.resize(L);
  ccl_.resize(L);
  for (int64_t l = 0; l < L; ++l) {
    int64_t t_in = lens[l], t_out = lens[l + 1];
    tdl_[l].resize(M);
    ccl_[l].resize(M);
    for (int64_t m = 0; m < M; ++m) {
      std::string prefix = "layer" + std::to_string(l + 1) + "." + mode_name(m);
      if (cfg_.enable_tdl) {
        TdlParams& p = tdl_[l][m];
        if (cfg_.tdl_kind == TdlKind::kMlp) {
          double bt = 1.0 / std::sqrt(static_cast<double>(t_in));
          p.mlp.fc0.weight = reg(prefix + ".tdl.fc0.weight",
                                 uniform_init(rng, {t_in, t_in}, bt));
          p.mlp.fc0.bias = reg(prefix + ".tdl.fc0.bias", Tensor::zeros({t_in}));
          p.mlp.fc1.weight = reg(prefix + ".tdl.fc1.weight",
                                 uniform_init(rng, {t_in, t_out}, bt));
          p.mlp.fc1.bias = reg(prefix + ".tdl.fc1.bias", Tensor::zeros({t_out}));
        } else {
          int64_t bins = t_in / 2 + 1;
          p.filter_re = reg(prefix + ".tdl.filter.re",
                            uniform_init(rng, {bins}, 1.0));
          p.filter_im = reg(prefix + ".tdl.filter.im",
                            uniform_init(rng, {bins}, 1.0));
          p.bias_re = reg(prefix + ".tdl.bias.re", Tensor::zeros({bins}));
          p.bias_im = reg(prefix + ".tdl.bias.im", Tensor::zeros({bins}));
        }
        p.norm.gamma = reg(prefix + ".tdl.norm.gamma", Tensor::full({D}, 1.0));
        p.norm.beta = reg(prefix + ".tdl.norm.beta", Tensor::zeros({D}));
      }
      if (cfg_.enable_ccl) {
        CclParams& p = ccl_[l][m];
        double bd = 1.0 / std::sqrt(static_cast<double>(D));
        p.mlp.fc0.weight =
            reg(prefix + ".ccl.fc0.weight", uniform_init(rng, {D, D}, bd));
        p.mlp.fc0.bias = reg(prefix + ".ccl.fc0.bias", Tensor::zeros({D}));
        p.mlp.fc1.weight =
            reg(prefix + ".ccl.fc1.weight", uniform_init(rng, {D, D}, bd));
        p.mlp.fc1.bias = reg(prefix + ".ccl.fc1.bias", Tensor::zeros({D}));
        p.norm.gamma = reg(prefix + ".ccl.norm.gamma", Tensor::full({D}, 1.0));
        p.norm.beta = reg(prefix + ".ccl.norm.beta", Tensor::zeros({D}));
      }
    }
  }

  double bd = 1.0 / std::sqrt(static_cast<double>(D));
  tod_table_ = reg("readout.tod_table", uniform_init(rng, {48, D}, bd));
  dow_table_ = reg("readout.dow_table", uniform_init(rng, {7, D}, bd));

  for (int64_t m = 0; m < M; ++m) {
    Mlp head;
    head.fc0.weight =
        reg(mode_name(m) + ".head.fc0.weight",
            uniform_init(rng, {2 * D, D}, 1.0 / std::sqrt(double(2 * D))));
    head.fc0.bias = reg(mode_name(m) + ".head.fc0.bias", Tensor::zeros({D}));
    head.fc1.weight =
        reg(mode_name(m) + ".head.fc1.weight", uniform_init(rng, {D, H * C}, bd));
    head.fc1.bias = reg(mode_name(m) + ".head.fc1.bias", Tensor::zeros({H * C}));
    heads_.push_back(head);
  }
}

int64_t SimMstModel::parameter_count() const {
  int64_t total = 0;
  for (const auto& [name, t] : registry_) total += t.numel();
  return total;
}

void SimMstModel::zero_grads() {
  for (auto& [name, t] : registry_) {
    Tensor tensor = t;
    tensor.zero_grad();
  }
}

RelationMatrixSet SimMstModel::relation_matrices() const {
  if (!cfg_.enable_csrl)
    throw ContractError("relation matrices are not built when the cross-mode "
                        "stage is disabled");
  const int64_t M = cfg_.num_modes;
  RelationMatrixSet set;
  set.num_modes = M;
  set.matrices.resize(M * M);
  set.pair_weights = pair_weights_;
  ProjectedEmbeddings pe = project_embeddings(bank_);
  for (int64_t i = 0; i < M; ++i)
    for (int64_t j = 0; j < M; ++j) {
      if (cfg_.zero_cross_relations && i != j) continue;
      Tensor raw = learn_relation_matrix(pe, i, j);
      Tensor sparse = sparsify_rows(raw, cfg_.topk);
      set.matrices[i * M + j] = normalize_relation_matrix(sparse);
    }
  return set;
}

std::vector<Tensor> SimMstModel::forward(const std::vector<Tensor>& history,
                                         int64_t tod_index, int64_t dow_index,
                                         RelationMatrixSet* trace) const {
  const int64_t M = cfg_.num_modes, N = cfg_.num_nodes, C = cfg_.channels;
  const int64_t W = cfg_.history_len, L = cfg_.num_layers;
  if (static_cast<int64_t>(history.size()) != M)
    throw DimensionError("forward got " + std::to_string(history.size()) +
                         " modes, config has " + std::to_string(M));
  for (const Tensor& x : history)
    if (x.shape() != Shape{N, W, C})
      throw DimensionError("history tensor has shape " +
                           shape_to_string(x.shape()) + ", expected " +
                           shape_to_string({N, W, C}));
  auto lens = cfg_.resolved_temporal_lengths();

  // Relation matrices once per forward pass, shared by every layer.
  RelationMatrixSet rel;
  if (cfg_.enable_csrl) rel = relation_matrices();
  if (trace) *trace = rel;

  std::vector<std::vector<Tensor>> hiddens(M);  // per mode, states H^0..H^L
  std::vector<Tensor> h(M);
  for (int64_t m = 0; m < M; ++m) {
    h[m] = init_hidden(history[m], init_maps_[m]);
    hiddens[m].push_back(h[m]);
  }

  for (int64_t l = 0; l < L; ++l) {
    std::vector<Tensor> t(M);
    for (int64_t m = 0; m < M; ++m)
      t[m] = tdl_forward(h[m], tdl_[l][m], cfg_.tdl_kind, lens[l + 1],
                         cfg_.enable_tdl);
    std::vector<Tensor> s(M);
    if (cfg_.enable_csrl) {
      for (int64_t i = 0; i < M; ++i) {
        std::vector<Tensor> impacts(M);
        for (int64_t j = 0; j < M; ++j) {
          if (cfg_.zero_cross_relations && j != i) continue;
          impacts[j] = cross_mode_propagate(rel.at(i, j), t[j]);
        }
        s[i] = aggregate_mode_impacts(impacts, pair_weights_, i);
      }
    } else {
      s = t;
    }
    for (int64_t m = 0; m < M; ++m) {
      h[m] = ccl_forward(s[m], ccl_[l][m], cfg_.enable_ccl);
      hiddens[m].push_back(h[m]);
    }
  }

  Tensor sem = semantic_embedding(tod_table_, dow_table_, tod_index, dow_index);
  std::vector<Tensor> preds(M);
  for (int64_t m = 0; m < M; ++m)
    preds[m] = readout(hiddens[m], sem, heads_[m], cfg_.horizon, C);
  return preds;
}

int64_t count_parameters(const SimMstModel& model) {
  return model.parameter_count();
}

namespace {

double growth_exponent(const std::vector<int64_t>& xs,
                       const std::vector<int64_t>& counts) {
  // Successive-difference log ratio over a ratio-2 geometric sweep. The
  // differences cancel every term that does not depend on the swept
  // dimension, so a pure power law x^p reports exactly p.
  if (xs.size() < 3) throw ContractError("exponent fit needs >= 3 sweep points");
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    if (xs[i + 1] != 2 * xs[i])
      throw ContractError("sweep must double at each step");
  double sum = 0.0;
  int64_t terms = 0;
  for (size_t i = 0; i + 2 < xs.size(); ++i) {
    double d1 = static_cast<double>(counts[i + 1] - counts[i]);
    double d2 = static_cast<double>(counts[i + 2] - counts[i + 1]);
    if (d1 <= 0.0 || d2 <= 0.0)
      throw ContractError("parameter count must grow along the sweep");
    sum += std::log2(d2 / d1);
    ++terms;
  }
  return sum / static_cast<double>(terms);
}

}  // namespace

std::string ScalingReport::to_text() const {
  std::ostringstream os;
  os << "dimension,value,parameter_count\n";
  for (size_t i = 0; i < n_values.size(); ++i)
    os << "num_nodes," << n_values[i] << ',' << n_counts[i] << '\n';
  for (size_t i = 0; i < w_values.size(); ++i)
    os << "history_len," << w_values[i] << ',' << w_counts[i] << '\n';
  os << "num_nodes growth exponent: " << n_exponent << '\n';
  os << "history_len growth exponent: " << w_exponent << '\n';
  return os.str();
}

ScalingReport scaling_report(const SimMstConfig& base,
                             const std::vector<int64_t>& n_sweep,
                             const std::vector<int64_t>& w_sweep) {
  ScalingReport report;
  for (int64_t n : n_sweep) {
    SimMstConfig cfg = base;
    cfg.num_nodes = n;
    cfg.topk = std::min(base.topk, n);
    SimMstModel model(cfg, 0);
    report.n_values.push_back(n);
    report.n_counts.push_back(model.parameter_count());
  }
  for (int64_t w : w_sweep) {
    SimMstConfig cfg = base;
    cfg.history_len = w;
    cfg.temporal_lengths.clear();
    SimMstModel model(cfg, 0);
    report.w_values.push_back(w);
    report.w_counts.push_back(model.parameter_count());
  }
  report.n_exponent = growth_exponent(report.n_values, report.n_counts);
  report.w_exponent = growth_exponent(report.w_values, report.w_counts);
  return report;
}

}  // namespace simmst
