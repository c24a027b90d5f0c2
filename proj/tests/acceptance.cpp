// Acceptance harness. Each criterion prints exactly one PASS/FAIL line with
// the measured numbers; the exit code is the count of failed criteria. All
// tolerances are pinned here, next to the checks that use them.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "simmst/checkpoint.hpp"
#include "simmst/data.hpp"
#include "simmst/fft.hpp"
#include "simmst/gradcheck.hpp"
#include "simmst/metrics.hpp"
#include "simmst/model.hpp"
#include "simmst/rng.hpp"
#include "simmst/tensor.hpp"
#include "simmst/training.hpp"

namespace fs = std::filesystem;
using namespace simmst;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

Tensor rand_tensor(Rng& rng, const Shape& shape, double lo, double hi) {
  Tensor t = Tensor::zeros(shape);
  for (double& v : t.values_mut()) v = rng.uniform(lo, hi);
  return t;
}

// ---------------------------------------------------------------- fixtures

// The coupled synthetic dataset named by the criteria: two modes over eight
// nodes, 400 steps, one channel, mode 1 driven by mode 0 at lag 2 gain 0.8.
MultiModeDataset coupled_dataset(uint64_t seed) {
  SyntheticSpec spec;
  spec.num_modes = 2;
  spec.num_nodes = 8;
  spec.num_steps = 400;
  spec.num_channels = 1;
  spec.couplings = {{0, 1, 2, 0.8, -1.0}};
  spec.seed = seed;
  return generate_synthetic(spec);
}

struct PreparedData {
  MultiModeDataset raw;
  SplitRanges splits;
  Scaler scaler;
  MultiModeDataset scaled;
  std::vector<WindowSample> train_w, val_w, test_w;
};

PreparedData prepare(MultiModeDataset raw, int64_t history, int64_t horizon) {
  PreparedData p;
  p.raw = std::move(raw);
  p.splits = chronological_split(p.raw.num_steps, history, horizon);
  p.scaler.fit(p.raw, p.splits.train);
  p.scaled = p.scaler.transform(p.raw);
  p.train_w = make_windows(p.scaled, p.splits.train, history, horizon);
  p.val_w = make_windows(p.scaled, p.splits.val, history, horizon);
  p.test_w = make_windows(p.scaled, p.splits.test, history, horizon);
  return p;
}

// Desk-scale experiment shape shared by the training-based criteria: a
// 12-step history and horizon with a deliberately scarce capacity so every
// stage has to earn its keep.
SimMstConfig desk_config() {
  SimMstConfig c;
  c.num_modes = 2;
  c.num_nodes = 8;
  c.history_len = 12;
  c.horizon = 12;
  c.channels = 1;
  c.hidden_dim = 8;
  c.embed_dim = 8;
  c.num_layers = 1;
  c.topk = 8;
  return c;
}

TrainConfig desk_budget(uint64_t seed) {
  TrainConfig t;
  t.learning_rate = 0.003;
  t.batch_size = 32;
  t.max_epochs = 60;
  t.patience = 10;
  t.seed = seed;
  return t;
}

SimMstConfig gradcheck_tiny() {
  SimMstConfig c;
  c.num_modes = 2;
  c.num_nodes = 3;
  c.history_len = 4;
  c.horizon = 2;
  c.channels = 1;
  c.hidden_dim = 4;
  c.embed_dim = 4;
  c.num_layers = 1;
  c.topk = 3;
  return c;
}

// Full-model check: a fixed random mixer turns the forecast into a scalar
// that depends on every output element.
GradCheckReport full_model_gradcheck(const SimMstConfig& c) {
  SimMstModel model(c, 81);
  Rng rng(82);
  std::vector<Tensor> history, mixers;
  for (int64_t m = 0; m < c.num_modes; ++m) {
    history.push_back(
        rand_tensor(rng, {c.num_nodes, c.history_len, c.channels}, -1.0, 1.0));
    mixers.push_back(
        rand_tensor(rng, {c.num_nodes, c.horizon, c.channels}, -1.0, 1.0));
  }
  auto loss_fn = [&]() {
    auto preds = model.forward(history, 9, 4);
    Tensor loss = sum_all(mul(preds[0], mixers[0]));
    for (int64_t m = 1; m < c.num_modes; ++m)
      loss = add(loss, sum_all(mul(preds[m], mixers[m])));
    return loss;
  };
  return gradient_check(loss_fn, model.parameters());
}

// ------------------------------------------------------------- subprocess

#ifndef SIMMST_CLI_PATH
#error "SIMMST_CLI_PATH must point at the CLI binary"
#endif

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "simmst_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string(SIMMST_CLI_PATH) + " " + args + " > " +
                    log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ------------------------------------------------------------ criterion 1

Outcome criterion1() {
  double t0 = now_seconds();
  double worst = 0.0;
  std::string worst_name = "none";
  auto track = [&](const std::string& name, const GradCheckReport& r) {
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_name = name;
    }
  };

  track("full_model_mlp", full_model_gradcheck(gradcheck_tiny()));

  Rng rng(7);
  {
    Tensor a = rand_tensor(rng, {3, 4}, -1.0, 1.0);
    Tensor b = rand_tensor(rng, {4, 2}, -1.0, 1.0);
    Tensor mix = rand_tensor(rng, {3, 2}, -1.0, 1.0);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    track("matmul", gradient_check(
                        [&] { return sum_all(mul(matmul(a, b), mix)); },
                        {{"a", a}, {"b", b}}));
  }
  {
    // Activation inputs stay away from the relu kink at 0.
    Tensor x({6}, {-1.9, -1.2, -0.4, 0.3, 0.9, 1.7});
    Tensor mix = rand_tensor(rng, {6}, -1.0, 1.0);
    x.set_requires_grad(true);
    track("gelu", gradient_check([&] { return sum_all(mul(gelu(x), mix)); },
                                 {{"x", x}}));
    track("tanh", gradient_check([&] { return sum_all(mul(tanh(x), mix)); },
                                 {{"x", x}}));
    track("relu", gradient_check([&] { return sum_all(mul(relu(x), mix)); },
                                 {{"x", x}}));
  }
  {
    Tensor x = rand_tensor(rng, {3, 5}, -2.0, 2.0);
    Tensor gamma = rand_tensor(rng, {5}, 0.5, 1.5);
    Tensor beta = rand_tensor(rng, {5}, -0.5, 0.5);
    Tensor mix = rand_tensor(rng, {3, 5}, -1.0, 1.0);
    x.set_requires_grad(true);
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
    track("layer_norm",
          gradient_check(
              [&] { return sum_all(mul(layer_norm(x, gamma, beta), mix)); },
              {{"x", x}, {"gamma", gamma}, {"beta", beta}}));
  }
  {
    // FFT pair: transform, reweight both halves, transform back.
    Tensor x = rand_tensor(rng, {2, 9}, -1.0, 1.0);
    Tensor wr = rand_tensor(rng, {2, 5}, -1.0, 1.0);
    Tensor wi = rand_tensor(rng, {2, 5}, -1.0, 1.0);
    Tensor mix = rand_tensor(rng, {2, 9}, -1.0, 1.0);
    x.set_requires_grad(true);
    track("fft_pair", gradient_check(
                          [&] {
                            Spectrum s = real_fft(x);
                            Spectrum g{mul(s.re, wr), mul(s.im, wi)};
                            return sum_all(mul(inverse_real_fft(g, 9), mix));
                          },
                          {{"x", x}}));
  }
  {
    // Relation construction: projected embeddings through the learned
    // relation, top-k sparsification, and row normalization.
    ProjectedEmbeddings pe;
    for (int m = 0; m < 2; ++m) {
      pe.in.push_back(rand_tensor(rng, {3, 4}, -1.0, 1.0));
      pe.out.push_back(rand_tensor(rng, {3, 4}, -1.0, 1.0));
      pe.in.back().set_requires_grad(true);
      pe.out.back().set_requires_grad(true);
    }
    Tensor mix = rand_tensor(rng, {3, 3}, -1.0, 1.0);
    track("relation_construction",
          gradient_check(
              [&] {
                Tensor raw = learn_relation_matrix(pe, 0, 1);
                Tensor a = normalize_relation_matrix(sparsify_rows(raw, 2));
                return sum_all(mul(a, mix));
              },
              {{"in0", pe.in[0]},
               {"in1", pe.in[1]},
               {"out0", pe.out[0]},
               {"out1", pe.out[1]}}));
  }
  {
    Tensor a = rand_tensor(rng, {3, 3}, 0.0, 1.0);
    Tensor t = rand_tensor(rng, {3, 4, 2}, -1.0, 1.0);
    Tensor mix = rand_tensor(rng, {3, 4, 2}, -1.0, 1.0);
    a.set_requires_grad(true);
    t.set_requires_grad(true);
    track("propagation",
          gradient_check(
              [&] { return sum_all(mul(cross_mode_propagate(a, t), mix)); },
              {{"a", a}, {"t", t}}));
  }

  double elapsed = now_seconds() - t0;
  bool pass = worst < 1e-4 && elapsed < 60.0;
  return {pass, fmt("max rel err %.3e (worst: %s), tolerance 1e-4, %.1fs of "
                    "60s budget",
                    worst, worst_name.c_str(), elapsed)};
}

// ------------------------------------------------------------ criterion 2

// Exactly `steps` optimizer steps over the training windows, batch 32.
void train_steps(SimMstModel& model, const std::vector<WindowSample>& windows,
                 int64_t steps) {
  TrainConfig tc = desk_budget(1);
  AdamState adam(model.parameters(), tc);
  size_t cursor = 0;
  while (adam.steps_taken() < steps) {
    model.zero_grads();
    Tape tape;
    TapeScope scope(tape);
    Tensor acc;
    int64_t batch = 0;
    for (; batch < tc.batch_size; ++batch) {
      const WindowSample& w = windows[cursor];
      cursor = (cursor + 1) % windows.size();
      Tensor l = mae_loss(model.forward(w.history, w.tod, w.dow), w.target);
      acc = acc.defined() ? add(acc, l) : l;
    }
    tape.backward(scale(acc, 1.0 / static_cast<double>(batch)));
    adam.step();
  }
}

Outcome criterion2() {
  PreparedData p = prepare(coupled_dataset(101), 12, 12);
  SimMstConfig c = desk_config();
  SimMstModel model(c, 1);
  train_steps(model, p.train_w, 50);

  RelationMatrixSet rel = model.relation_matrices();
  double worst_row_gap = 0.0, min_entry = 0.0, min_diag = 1.0;
  for (int64_t i = 0; i < c.num_modes; ++i)
    for (int64_t j = 0; j < c.num_modes; ++j) {
      const Tensor& a = rel.at(i, j);
      for (int64_t r = 0; r < c.num_nodes; ++r) {
        double row = 0.0;
        for (int64_t col = 0; col < c.num_nodes; ++col) {
          double v = a.values()[r * c.num_nodes + col];
          min_entry = std::min(min_entry, v);
          row += v;
        }
        worst_row_gap = std::max(worst_row_gap, std::fabs(row - 1.0));
        min_diag = std::min(min_diag, a.values()[r * c.num_nodes + r]);
      }
    }

  SimMstConfig shared = c;
  shared.share_projections = true;
  SimMstModel shared_model(shared, 1);
  train_steps(shared_model, p.train_w, 50);
  RelationMatrixSet shared_rel = shared_model.relation_matrices();
  bool identity = true;
  for (int64_t i = 0; i < c.num_modes && identity; ++i)
    for (int64_t j = 0; j < c.num_modes && identity; ++j) {
      const Tensor& a = shared_rel.at(i, j);
      for (int64_t r = 0; r < c.num_nodes; ++r)
        for (int64_t col = 0; col < c.num_nodes; ++col)
          if (a.values()[r * c.num_nodes + col] != (r == col ? 1.0 : 0.0))
            identity = false;
    }

  bool pass = min_entry >= 0.0 && worst_row_gap <= 1e-6 && min_diag > 0.0 &&
              identity;
  return {pass, fmt("after 50 steps: min entry %.1e, max |row sum - 1| %.2e "
                    "(tol 1e-6), min diagonal %.3e, shared projections give "
                    "exact identity: %s",
                    min_entry, worst_row_gap, min_diag,
                    identity ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 3

Outcome criterion3() {
  double t0 = now_seconds();
  PreparedData p = prepare(coupled_dataset(101), 12, 2);
  // Overfit protocol: memorize a 16-window slice of the training split.
  std::vector<WindowSample> subset(p.train_w.begin(), p.train_w.begin() + 16);
  SimMstConfig c = desk_config();
  c.horizon = 2;
  c.hidden_dim = 32;
  c.embed_dim = 16;
  c.num_layers = 2;
  SimMstModel model(c, 1);
  double initial = dataset_loss(model, subset);

  TrainConfig tc;
  tc.learning_rate = 0.005;
  tc.batch_size = 32;
  tc.max_epochs = 200;
  tc.patience = 200;
  tc.seed = 1;
  int64_t hit_epoch = -1;
  double best = initial;
  TrainResult result =
      train(model, subset, subset, tc, [&](const EpochRecord& r) {
        best = std::min(best, r.train_loss);
        if (hit_epoch < 0 && r.train_loss < 0.1 * initial) hit_epoch = r.epoch;
      });
  double elapsed = now_seconds() - t0;
  bool pass = hit_epoch > 0 && hit_epoch <= 200 && elapsed < 600.0 &&
              !result.aborted_non_finite;
  return {pass, fmt("initial loss %.3f, best %.3f (%.3fx), below 0.1x at "
                    "epoch %lld of 200, %.0fs of 600s budget",
                    initial, best, best / initial,
                    static_cast<long long>(hit_epoch), elapsed)};
}

// --------------------------------------------------------- criteria 4 & 5

double pooled_mae(const SimMstModel& model, const PreparedData& p,
                  int64_t mode) {
  EvaluateResult ev =
      evaluate(model, p.test_w, p.scaler, p.raw.mode_names, {1});
  return ev.table.pooled[mode].mae;
}

SimMstModel train_variant(const SimMstConfig& cfg, uint64_t seed,
                          const PreparedData& p) {
  SimMstModel model(cfg, seed);
  train(model, p.train_w, p.val_w, desk_budget(seed));
  return model;
}

Outcome criterion4() {
  int wins = 0;
  std::string per_seed;
  for (uint64_t seed : {1, 2, 3, 4, 5}) {
    PreparedData p = prepare(coupled_dataset(100 + seed), 12, 12);
    SimMstConfig base = desk_config();
    SimMstModel full = train_variant(base, seed, p);
    SimMstConfig solo = base;
    solo.enable_csrl = false;
    SimMstModel detached = train_variant(solo, seed, p);
    // Driven-mode (mode 1) test MAE, pooled over all horizon steps.
    double mae_full = pooled_mae(full, p, 1);
    double mae_solo = pooled_mae(detached, p, 1);
    if (mae_full < mae_solo) ++wins;
    per_seed += fmt(" %.3f<%.3f", mae_full, mae_solo);
  }
  return {wins >= 4, fmt("full vs enable_csrl=false on the driven mode, "
                         "(full<detached per seed:%s), %d of 5 wins, need 4",
                         per_seed.c_str(), wins)};
}

Outcome criterion5() {
  // Direction over 3 seeds, mean of per-mode pooled test MAE.
  double mean_mae[4] = {0, 0, 0, 0};
  std::vector<std::string> names;
  for (uint64_t seed : {1, 2, 3}) {
    PreparedData p = prepare(coupled_dataset(100 + seed), 12, 12);
    auto variants = ablation_variants(desk_config());
    names.clear();
    for (size_t k = 0; k < variants.size(); ++k) {
      names.push_back(variants[k].first);
      SimMstModel model = train_variant(variants[k].second, seed, p);
      mean_mae[k] +=
          0.5 * (pooled_mae(model, p, 0) + pooled_mae(model, p, 1)) / 3.0;
    }
  }
  bool direction = mean_mae[1] >= mean_mae[0] && mean_mae[2] >= mean_mae[0] &&
                   mean_mae[3] >= mean_mae[0];

  // The table must come out of the CLI `ablate` subcommand; a two-epoch
  // budget run checks the emission, not the direction.
  fs::path dir = scratch_root() / "c5";
  fs::create_directories(dir);
  MultiModeDataset ds = coupled_dataset(101);
  save_dataset(ds, (dir / "data").string());
  std::string args =
      "ablate --data " + (dir / "data").string() + " --out " +
      (dir / "out").string() +
      " --hidden-dim 8 --embed-dim 8 --layers 1 --topk 8 --batch-size 64"
      " --max-epochs 2 --patience 2 --seed 1";
  int rc = run_cli(args, dir / "ablate.log");
  std::string log = slurp(dir / "ablate.log");
  std::string csv = slurp(dir / "out" / "ablation.csv");
  bool emitted = rc == 0;
  for (const char* name : {"full", "no_tdl", "no_csrl", "no_ccl"}) {
    emitted = emitted && log.find(name) != std::string::npos &&
              csv.find(name) != std::string::npos;
  }

  return {direction && emitted,
          fmt("mean test MAE over 3 seeds: full %.4f, no_tdl %.4f, no_csrl "
              "%.4f, no_ccl %.4f (each ablation must be >= full); ablate "
              "table emitted: %s",
              mean_mae[0], mean_mae[1], mean_mae[2], mean_mae[3],
              emitted ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 6

// Enumeration of parameter tensors straight from the architecture contract,
// independent of the registry the model builds.
int64_t enumerate_parameters(const SimMstConfig& c) {
  int64_t M = c.num_modes, N = c.num_nodes, C = c.channels;
  int64_t D = c.hidden_dim, De = c.embed_dim, H = c.horizon;
  auto lens = c.resolved_temporal_lengths();
  int64_t total = 0;
  if (c.enable_csrl) {
    total += M * N * De;                    // embedding tables
    int64_t proj = 2 * (De * De + De);      // one two-layer projection
    total += c.share_projections ? proj : 2 * proj;
    total += M * M;                         // pair weights
  }
  total += M * (C * D + D);                 // init maps
  for (int64_t l = 0; l < c.num_layers; ++l) {
    int64_t ti = lens[l], to = lens[l + 1];
    if (c.enable_tdl) {
      int64_t tdl = c.tdl_kind == TdlKind::kMlp
                        ? ti * ti + ti + ti * to + to    // two affines
                        : 4 * (ti / 2 + 1);              // complex filter+bias
      total += M * (tdl + 2 * D);                        // + layer norm
    }
    if (c.enable_ccl) total += M * (2 * D * D + 4 * D);  // mlp + norm
  }
  total += 55 * D;                          // 48 tod rows + 7 dow rows
  total += M * (2 * D * D + D + D * H * C + H * C);  // readout heads
  return total;
}

Outcome criterion6() {
  std::vector<SimMstConfig> configs;
  configs.push_back(gradcheck_tiny());
  {
    SimMstConfig c = gradcheck_tiny();
    c.tdl_kind = TdlKind::kSeasonal;
    configs.push_back(c);
  }
  {
    SimMstConfig c = desk_config();
    c.share_projections = true;
    configs.push_back(c);
  }
  {
    SimMstConfig c = desk_config();
    c.num_layers = 3;
    c.hidden_dim = 32;
    c.embed_dim = 40;
    configs.push_back(c);
  }
  {
    SimMstConfig c = desk_config();
    c.channels = 2;
    c.horizon = 6;
    c.enable_ccl = false;
    configs.push_back(c);
  }
  int exact = 0;
  for (const SimMstConfig& c : configs) {
    SimMstModel model(c, 0);
    if (count_parameters(model) == enumerate_parameters(c) &&
        model.parameter_count() == enumerate_parameters(c))
      ++exact;
  }

  SimMstConfig base = desk_config();
  base.hidden_dim = 32;
  base.embed_dim = 40;
  base.num_layers = 3;
  ScalingReport report = scaling_report(base, {8, 16, 32, 64}, {8, 16, 32, 64});
  bool exponent_ok = std::fabs(report.w_exponent - 2.0) <= 0.2;
  bool pass = exact == 5 && exponent_ok;
  return {pass, fmt("%d of 5 configs match the enumeration exactly; history "
                    "growth exponent %.4f vs 2.0 +/- 0.2 over {8,16,32,64}",
                    exact, report.w_exponent)};
}

// ------------------------------------------------------------ criterion 7

Outcome criterion7() {
  Rng rng(71);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    int64_t num_series = 1 + static_cast<int64_t>(rng.below(6));
    int64_t samples = 3 + static_cast<int64_t>(rng.below(38));
    int64_t n = num_series * samples;
    std::vector<double> pred(n), truth(n);
    for (double& v : pred) v = rng.uniform(-5.0, 5.0);
    for (double& v : truth) v = rng.uniform(-5.0, 5.0);

    double abs_sum = 0.0, sq_sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      abs_sum += std::fabs(pred[i] - truth[i]);
      sq_sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    }
    worst = std::max(worst, std::fabs(mae(pred, truth) - abs_sum / n));
    worst =
        std::max(worst, std::fabs(rmse(pred, truth) - std::sqrt(sq_sum / n)));

    // Brute-force mean per-series Pearson, sample-major layout.
    double corr_sum = 0.0;
    int64_t kept = 0;
    for (int64_t p = 0; p < num_series; ++p) {
      double mp = 0, mt = 0;
      for (int64_t s = 0; s < samples; ++s) {
        mp += pred[s * num_series + p];
        mt += truth[s * num_series + p];
      }
      mp /= samples;
      mt /= samples;
      double cov = 0, vp = 0, vt = 0;
      for (int64_t s = 0; s < samples; ++s) {
        double dp = pred[s * num_series + p] - mp;
        double dt = truth[s * num_series + p] - mt;
        cov += dp * dt;
        vp += dp * dp;
        vt += dt * dt;
      }
      if (vt == 0.0) continue;
      corr_sum += vp == 0.0 ? 0.0 : cov / std::sqrt(vp * vt);
      ++kept;
    }
    auto got = mean_series_corr(pred, truth, num_series);
    if (kept > 0 && got.has_value())
      worst = std::max(worst, std::fabs(*got - corr_sum / kept));
    else if (kept > 0 || got.has_value())
      worst = 1.0;  // one side produced a value, the other did not
  }

  // Correlation identities.
  std::vector<double> v(40);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  std::vector<double> neg(v.size());
  for (size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  auto self = mean_series_corr(v, v, 4);
  auto anti = mean_series_corr(neg, v, 4);
  bool identities = self.has_value() && std::fabs(*self - 1.0) <= 1e-12 &&
                    anti.has_value() && std::fabs(*anti + 1.0) <= 1e-12;

  bool pass = worst <= 1e-10 && identities;
  return {pass, fmt("max |metric - brute force| %.2e over 100 instances (tol "
                    "1e-10); corr(pred==truth)=1 and corr(pred==-truth)=-1 "
                    "within 1e-12: %s",
                    worst, identities ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 8

Outcome criterion8() {
  fs::path dir = scratch_root() / "c8";
  fs::create_directories(dir);
  MultiModeDataset ds = coupled_dataset(101);
  save_dataset(ds, (dir / "data").string());
  std::string common =
      "train --data " + (dir / "data").string() +
      " --hidden-dim 8 --embed-dim 8 --layers 1 --topk 8 --batch-size 32"
      " --lr 0.003 --max-epochs 3 --patience 3 --seed 7 --out ";
  int rc1 = run_cli(common + (dir / "run_a").string(), dir / "a.log");
  int rc2 = run_cli(common + (dir / "run_b").string(), dir / "b.log");
  if (rc1 != 0 || rc2 != 0)
    return {false, fmt("train exited %d and %d", rc1, rc2)};

  bool ckpt_equal = slurp(dir / "run_a" / "checkpoint.bin") ==
                    slurp(dir / "run_b" / "checkpoint.bin");
  // History lines are "epoch train val wall_ms"; wall time is measurement,
  // not model state, so the comparison drops the last column.
  auto strip_wall = [](const std::string& text) {
    std::string out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      size_t cut = line.rfind(' ');
      out += line.substr(0, cut) + "\n";
    }
    return out;
  };
  std::string ha = slurp(dir / "run_a" / "history.log");
  std::string hb = slurp(dir / "run_b" / "history.log");
  bool hist_equal = !ha.empty() && strip_wall(ha) == strip_wall(hb);
  bool pass = ckpt_equal && hist_equal;
  return {pass, fmt("checkpoints bitwise identical: %s; history logs "
                    "identical (wall-time column excluded): %s",
                    ckpt_equal ? "yes" : "no", hist_equal ? "yes" : "no")};
}

// ------------------------------------------------------------ criterion 9

Outcome criterion9() {
  Rng rng(91);
  double worst_rt = 0.0;
  for (int64_t n : {4, 7, 8, 9, 16, 31, 48}) {
    Tensor x = rand_tensor(rng, {3, n}, -2.0, 2.0);
    Tensor back = inverse_real_fft(real_fft(x), n);
    for (size_t i = 0; i < x.values().size(); ++i)
      worst_rt =
          std::max(worst_rt, std::fabs(x.values()[i] - back.values()[i]));
  }

  SimMstConfig c = gradcheck_tiny();
  c.tdl_kind = TdlKind::kSeasonal;
  c.topk = 2;  // exercises the sparsification mask in the backward pass
  GradCheckReport report = full_model_gradcheck(c);

  bool pass = worst_rt <= 1e-9 && report.passed();
  return {pass, fmt("round-trip max error %.2e (tol 1e-9) over lengths "
                    "{4,7,8,9,16,31,48}; seasonal full-model gradcheck max "
                    "rel err %.3e (tol 1e-4)",
                    worst_rt, report.max_rel_err)};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {"gradient correctness", criterion1},
      {"relation-matrix invariants", criterion2},
      {"overfit capability", criterion3},
      {"multi-mode benefit", criterion4},
      {"ablation direction", criterion5},
      {"complexity claim", criterion6},
      {"metrics oracle", criterion7},
      {"determinism", criterion8},
      {"fft seasonal path", criterion9},
  };
  int failures = 0;
  for (size_t i = 0; i < std::size(entries); ++i) {
    Outcome o = entries[i].run();
    if (!o.pass) ++failures;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1,
                o.pass ? "PASS" : "FAIL", entries[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed, total %.0fs\n",
              9 - failures, now_seconds());
  return failures;
}
