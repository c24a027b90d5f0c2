// simmst: command-line surface for the forecasting engine. One subcommand per
// process; every run directory receives the fully resolved config so the run
// can be reproduced bitwise with the same binary.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "simmst/checkpoint.hpp"
#include "simmst/data.hpp"
#include "simmst/error.hpp"
#include "simmst/gradcheck.hpp"
#include "simmst/model.hpp"
#include "simmst/rng.hpp"
#include "simmst/runconfig.hpp"
#include "simmst/training.hpp"

namespace fs = std::filesystem;
using namespace simmst;

namespace {

std::string output_root() {
  const char* env = std::getenv("SIMMST_OUTPUT_ROOT");
  return (env != nullptr && *env != '\0') ? std::string(env) : std::string(".");
}

// Empty -> <root>/simmst_<subcommand>; relative -> under the root; absolute
// stays put. The directory is created.
std::string resolve_output_dir(const std::string& requested,
                               const std::string& subcommand) {
  fs::path p;
  if (requested.empty())
    p = fs::path(output_root()) / ("simmst_" + subcommand);
  else if (fs::path(requested).is_absolute())
    p = requested;
  else
    p = fs::path(output_root()) / requested;
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + p.string() + ": " +
                        ec.message());
  return p.string();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Every config key gets a long flag; values the user actually passed become
// overrides, applied on top of the (optional) config file.
struct FlagRow {
  const char* flag;
  const char* key;
  const char* help;
  bool plumbing;  // offered even on commands whose model comes from a checkpoint
};

const std::vector<FlagRow>& flag_table() {
  static const std::vector<FlagRow> rows = {
      {"--hidden-dim", "hidden_dim", "hidden width of every stage", false},
      {"--embed-dim", "embed_dim", "node embedding width", false},
      {"--layers", "num_layers", "number of stacked layers", false},
      {"--topk", "topk",
       "kept entries per relation row (capped at the node count)", false},
      {"--history-len", "history_len", "input window length", false},
      {"--horizon", "horizon", "forecast length", false},
      {"--tdl-kind", "tdl_kind", "temporal mixing kind: mlp | seasonal", false},
      {"--enable-tdl", "enable_tdl", "true|false: temporal mixing stage", false},
      {"--enable-csrl", "enable_csrl", "true|false: cross-mode relation stage",
       false},
      {"--enable-ccl", "enable_ccl", "true|false: channel correlation stage",
       false},
      {"--share-projections", "share_projections",
       "true|false: reuse the in-projection for the out-projection", false},
      {"--zero-cross-relations", "zero_cross_relations",
       "true|false: drop cross-mode terms from aggregation", false},
      {"--temporal-lengths", "temporal_lengths",
       "comma list of per-layer temporal lengths T_0..T_L (empty: halving)",
       false},
      {"--lr", "learning_rate", "Adam learning rate", false},
      {"--batch-size", "batch_size", "windows per optimizer step", false},
      {"--max-epochs", "max_epochs", "epoch budget", false},
      {"--patience", "patience",
       "epochs without val improvement before stopping", false},
      {"--beta1", "beta1", "Adam first-moment decay", false},
      {"--beta2", "beta2", "Adam second-moment decay", false},
      {"--eps", "eps", "Adam denominator floor", false},
      {"--clip-norm", "clip_norm", "global gradient-norm cap (0 disables)",
       false},
      {"--data", "dataset", "dataset directory", true},
      {"--out", "output_dir", "output directory (relative paths land under "
                              "SIMMST_OUTPUT_ROOT)", true},
      {"--seed", "seed", "seed for init, shuffling, and synthetic data", false},
      {"--steps", "horizon_steps",
       "comma list of 1-based horizon steps to report", true},
  };
  return rows;
}

struct ConfigArgs {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> passed;

  // Commands that load their model from a checkpoint take only the plumbing
  // flags; the config file may still carry the full key set.
  void attach(CLI::App* cmd, bool model_flags = true) {
    cmd->add_option("--config", config_path, "JSON config file");
    for (const FlagRow& row : flag_table()) {
      if (!model_flags && !row.plumbing) continue;
      CLI::Option* opt = cmd->add_option(row.flag, values[row.key], row.help);
      passed.emplace_back(opt, row.key);
    }
  }

  RunConfig resolve() const {
    ConfigOverrides overrides;
    for (const auto& [opt, key] : passed)
      if (opt->count() > 0) overrides.emplace_back(key, values.at(key));
    return parse_run_config(config_path, overrides);
  }
};

struct BoundData {
  MultiModeDataset raw;
  SplitRanges splits;
  Scaler scaler;
  MultiModeDataset scaled;
};

BoundData load_and_scale(const std::string& dir, int64_t history_len,
                         int64_t horizon) {
  BoundData d;
  d.raw = load_dataset(dir);
  d.splits = chronological_split(d.raw.num_steps, history_len, horizon);
  d.scaler.fit(d.raw, d.splits.train);
  d.scaled = d.scaler.transform(d.raw);
  return d;
}

IndexRange split_range(const BoundData& d, const std::string& split) {
  if (split == "train") return d.splits.train;
  if (split == "val") return d.splits.val;
  if (split == "test") return d.splits.test;
  throw ConfigError("unknown split '" + split + "' (train | val | test)");
}

void require_dataset(const RunConfig& rc, const std::string& subcommand) {
  if (rc.dataset.empty())
    throw ConfigError(subcommand +
                      " needs a dataset (--data or config key 'dataset')");
}

void check_dataset_matches(const MultiModeDataset& ds, const SimMstConfig& mc) {
  if (ds.num_modes != mc.num_modes || ds.num_nodes != mc.num_nodes ||
      ds.num_channels != mc.channels)
    throw ConfigError(
        "dataset dimensions (modes " + std::to_string(ds.num_modes) +
        ", nodes " + std::to_string(ds.num_nodes) + ", channels " +
        std::to_string(ds.num_channels) + ") do not match the checkpoint (" +
        std::to_string(mc.num_modes) + ", " + std::to_string(mc.num_nodes) +
        ", " + std::to_string(mc.channels) + ")");
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string out;
  int64_t modes = 2, nodes = 8, steps = 400, channels = 1, step_minutes = 30;
  uint64_t seed = 0;
  std::string start = "2024-01-01T00:00";
  std::vector<std::string> couplings;
};

CouplingSpec parse_coupling(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4 && parts.size() != 5)
    throw ConfigError("coupling '" + text +
                      "' must be source:target:lag:gain[:noise]");
  CouplingSpec c;
  try {
    size_t used = 0;
    c.source = std::stoll(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    c.target = std::stoll(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    c.lag = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    c.gain = std::stod(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
    if (parts.size() == 5) {
      c.noise = std::stod(parts[4], &used);
      if (used != parts[4].size()) throw std::invalid_argument(parts[4]);
    }
  } catch (const std::exception&) {
    throw ConfigError("coupling '" + text + "' has a malformed field");
  }
  return c;
}

int run_generate(const GenerateArgs& a) {
  SyntheticSpec spec;
  spec.num_modes = a.modes;
  spec.num_nodes = a.nodes;
  spec.num_steps = a.steps;
  spec.num_channels = a.channels;
  spec.step_minutes = a.step_minutes;
  spec.start = parse_iso8601(a.start);
  spec.seed = a.seed;
  for (const std::string& text : a.couplings)
    spec.couplings.push_back(parse_coupling(text));
  MultiModeDataset ds = generate_synthetic(spec);
  std::string dir = resolve_output_dir(a.out, "dataset");
  save_dataset(ds, dir);
  std::cout << "wrote dataset to " << dir << " (" << ds.num_modes
            << " modes, " << ds.num_nodes << " nodes, " << ds.num_steps
            << " steps, " << ds.num_channels << " channels, seed " << a.seed
            << ")\n";
  return 0;
}

// ------------------------------------------------------------------- train

int run_train(RunConfig rc) {
  require_dataset(rc, "train");
  rc.output_dir = resolve_output_dir(rc.output_dir, "train");
  BoundData d = load_and_scale(rc.dataset, rc.history_len, rc.horizon);
  auto train_w = make_windows(d.scaled, d.splits.train, rc.history_len, rc.horizon);
  auto val_w = make_windows(d.scaled, d.splits.val, rc.history_len, rc.horizon);

  SimMstConfig mc = rc.model_config(d.raw.num_modes, d.raw.num_nodes,
                                    d.raw.num_channels);
  SimMstModel model(mc, rc.seed);
  write_text_file(fs::path(rc.output_dir) / "config.resolved.json",
                  rc.to_json_text());

  std::cout << "dataset " << rc.dataset << ": " << d.raw.num_modes
            << " modes, " << d.raw.num_nodes << " nodes, " << d.raw.num_steps
            << " steps; " << train_w.size() << " train / " << val_w.size()
            << " val windows; " << model.parameter_count() << " parameters\n";

  TrainResult result =
      train(model, train_w, val_w, rc.train_config(), [](const EpochRecord& r) {
        std::cout << "epoch " << r.epoch << " train "
                  << format_loss(r.train_loss) << " val "
                  << format_loss(r.val_loss) << " (" << format_loss(r.wall_ms)
                  << " ms)\n";
      });

  write_text_file(fs::path(rc.output_dir) / "history.log",
                  history_to_log(result.history));
  std::string ckpt = (fs::path(rc.output_dir) / "checkpoint.bin").string();
  save_checkpoint(model, ckpt);
  std::cout << "best epoch " << result.best_epoch << " val loss "
            << format_loss(result.best_val_loss) << "; checkpoint " << ckpt
            << "\n";
  if (result.aborted_non_finite) {
    std::cerr << "error: training aborted on a non-finite loss; the best "
                 "earlier checkpoint was kept\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- evaluate

int run_evaluate(RunConfig rc, const std::string& checkpoint,
                 const std::string& split) {
  require_dataset(rc, "evaluate");
  SimMstModel model = load_checkpoint(checkpoint);
  const SimMstConfig& mc = model.config();
  if (!rc.horizon_steps_explicit)
    rc.horizon_steps = default_horizon_steps(mc.horizon);
  rc.output_dir = resolve_output_dir(rc.output_dir, "evaluate");
  BoundData d = load_and_scale(rc.dataset, mc.history_len, mc.horizon);
  check_dataset_matches(d.raw, mc);
  auto windows =
      make_windows(d.scaled, split_range(d, split), mc.history_len, mc.horizon);

  EvaluateResult ev =
      evaluate(model, windows, d.scaler, d.raw.mode_names, rc.horizon_steps);
  write_text_file(fs::path(rc.output_dir) / "config.resolved.json",
                  rc.to_json_text());
  write_text_file(fs::path(rc.output_dir) / "metrics.csv", ev.table.to_csv());
  std::cout << "split " << split << ": " << ev.num_windows
            << " windows, scaled loss " << format_loss(ev.loss) << "\n";
  std::cout << "metrics (original units):\n" << ev.table.to_csv();
  std::cout << "wrote " << (fs::path(rc.output_dir) / "metrics.csv").string()
            << "\n";
  return 0;
}

// ----------------------------------------------------------------- predict

int run_predict(RunConfig rc, const std::string& checkpoint,
                const std::string& split) {
  require_dataset(rc, "predict");
  SimMstModel model = load_checkpoint(checkpoint);
  const SimMstConfig& mc = model.config();
  rc.output_dir = resolve_output_dir(rc.output_dir, "predict");
  BoundData d = load_and_scale(rc.dataset, mc.history_len, mc.horizon);
  check_dataset_matches(d.raw, mc);
  auto windows =
      make_windows(d.scaled, split_range(d, split), mc.history_len, mc.horizon);
  if (windows.empty()) throw ContractError("predict found no windows");

  std::vector<double> buffer;
  buffer.reserve(windows.size() * mc.num_modes * mc.num_nodes * mc.horizon *
                 mc.channels);
  std::vector<std::string> anchors;
  for (const WindowSample& w : windows) {
    std::vector<Tensor> preds = model.forward(w.history, w.tod, w.dow);
    for (int64_t m = 0; m < mc.num_modes; ++m) {
      Tensor original = d.scaler.invert(preds[m], m);
      buffer.insert(buffer.end(), original.values().begin(),
                    original.values().end());
    }
    anchors.push_back(format_iso8601(
        add_minutes(d.raw.start, w.anchor * d.raw.step_minutes)));
  }

  fs::path bin = fs::path(rc.output_dir) / "predictions.bin";
  {
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw IoError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(double)));
    if (!out) throw IoError("write failed for " + bin.string());
  }

  nlohmann::ordered_json side;
  side["dataset"] = rc.dataset;
  side["checkpoint"] = checkpoint;
  side["split"] = split;
  side["num_windows"] = windows.size();
  side["shape"] = {static_cast<int64_t>(windows.size()), mc.num_modes,
                   mc.num_nodes, mc.horizon, mc.channels};
  side["layout"] = "window,mode,node,horizon_step,channel";
  side["dtype"] = "float64";
  side["byte_order"] = "little_endian";
  side["units"] = "original";
  side["anchors"] = anchors;
  write_text_file(fs::path(rc.output_dir) / "predictions.json",
                  side.dump(2) + "\n");
  write_text_file(fs::path(rc.output_dir) / "config.resolved.json",
                  rc.to_json_text());
  std::cout << "wrote predictions for " << windows.size() << " windows to "
            << bin.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- gradcheck

SimMstConfig gradcheck_config() {
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

GradCheckReport gradcheck_one(const SimMstConfig& c, uint64_t model_seed,
                              uint64_t data_seed) {
  SimMstModel model(c, model_seed);
  Rng rng(data_seed);
  std::vector<Tensor> history, mixers;
  for (int64_t m = 0; m < c.num_modes; ++m) {
    Tensor h = Tensor::zeros({c.num_nodes, c.history_len, c.channels});
    for (double& v : h.values_mut()) v = rng.uniform(-1.0, 1.0);
    history.push_back(h);
    Tensor mix = Tensor::zeros({c.num_nodes, c.horizon, c.channels});
    for (double& v : mix.values_mut()) v = rng.uniform(-1.0, 1.0);
    mixers.push_back(mix);
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

int run_gradcheck() {
  double overall = 0.0;
  bool ok = true;
  for (const char* kind : {"mlp", "seasonal"}) {
    SimMstConfig c = gradcheck_config();
    c.tdl_kind = tdl_kind_from_name(kind);
    if (c.tdl_kind == TdlKind::kSeasonal) c.topk = 2;  // exercise the mask
    GradCheckReport report = gradcheck_one(c, 81, 82);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s max relative error %.3e over %zu parameters\n",
                  kind, report.max_rel_err, report.per_leaf.size());
    std::cout << buf;
    overall = std::max(overall, report.max_rel_err);
    ok = ok && report.passed();
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "overall max relative error %.3e (tolerance 1e-4)\n",
                overall);
  std::cout << buf;
  std::cout << (ok ? "PASS\n" : "FAIL\n");
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ params

int run_params(const RunConfig& rc, int64_t modes, int64_t nodes,
               int64_t channels) {
  int64_t m = modes, n = nodes, c = channels;
  if (!rc.dataset.empty()) {
    MultiModeDataset ds = load_dataset(rc.dataset);
    m = ds.num_modes;
    n = ds.num_nodes;
    c = ds.num_channels;
    std::cout << "dimensions from " << rc.dataset << "\n";
  }
  SimMstConfig mc = rc.model_config(m, n, c);
  SimMstModel model(mc, 0);
  std::cout << "parameters: " << model.parameter_count() << " (modes " << m
            << ", nodes " << n << ", channels " << c << ", hidden "
            << mc.hidden_dim << ", layers " << mc.num_layers << ")\n";
  ScalingReport report = scaling_report(mc, {8, 16, 32, 64}, {8, 16, 32, 64});
  std::cout << report.to_text();
  return 0;
}

// ------------------------------------------------------------------ ablate

int run_ablate(RunConfig rc, const std::string& split) {
  require_dataset(rc, "ablate");
  rc.output_dir = resolve_output_dir(rc.output_dir, "ablate");
  BoundData d = load_and_scale(rc.dataset, rc.history_len, rc.horizon);
  auto train_w = make_windows(d.scaled, d.splits.train, rc.history_len, rc.horizon);
  auto val_w = make_windows(d.scaled, d.splits.val, rc.history_len, rc.horizon);
  auto eval_w =
      make_windows(d.scaled, split_range(d, split), rc.history_len, rc.horizon);

  SimMstConfig base = rc.model_config(d.raw.num_modes, d.raw.num_nodes,
                                      d.raw.num_channels);
  write_text_file(fs::path(rc.output_dir) / "config.resolved.json",
                  rc.to_json_text());

  struct Row {
    std::string name;
    double best_val = 0.0;
    EvaluateResult ev;
  };
  std::vector<Row> rows;
  for (const auto& [name, cfg] : ablation_variants(base)) {
    std::cout << "training variant " << name << "\n";
    SimMstModel model(cfg, rc.seed);
    TrainResult tr = train(model, train_w, val_w, rc.train_config());
    if (tr.aborted_non_finite)
      std::cerr << "warning: variant " << name
                << " aborted on a non-finite loss; best earlier snapshot kept\n";
    write_text_file(fs::path(rc.output_dir) / ("history." + name + ".log"),
                    history_to_log(tr.history));
    save_checkpoint(model, (fs::path(rc.output_dir) /
                            ("checkpoint." + name + ".bin"))
                               .string());
    Row row;
    row.name = name;
    row.best_val = tr.best_val_loss;
    row.ev = evaluate(model, eval_w, d.scaler, d.raw.mode_names,
                      rc.horizon_steps);
    rows.push_back(std::move(row));
  }

  // Long-form CSV: one row per (variant, mode), pooled over horizon steps.
  std::string csv = "variant,mode,mae,rmse,corr\n";
  for (const Row& row : rows)
    for (size_t m = 0; m < d.raw.mode_names.size(); ++m) {
      const MetricEntry& e = row.ev.table.pooled[m];
      char line[192];
      std::snprintf(line, sizeof line, "%s,%s,%.17g,%.17g,", row.name.c_str(),
                    d.raw.mode_names[m].c_str(), e.mae, e.rmse);
      csv += line;
      if (e.corr.has_value()) {
        std::snprintf(line, sizeof line, "%.17g", *e.corr);
        csv += line;
      }
      csv += "\n";
    }
  write_text_file(fs::path(rc.output_dir) / "ablation.csv", csv);

  std::cout << "\nablation on split '" << split << "' (" << eval_w.size()
            << " windows), MAE in original units:\n";
  char header[160];
  std::snprintf(header, sizeof header, "%-10s %12s", "variant", "val_loss");
  std::string line = header;
  for (const std::string& name : d.raw.mode_names) {
    char cell[64];
    std::snprintf(cell, sizeof cell, " %12s", ("mae_" + name).c_str());
    line += cell;
  }
  std::cout << line << "  " << "mean_mae\n";
  for (const Row& row : rows) {
    char cell[96];
    std::snprintf(cell, sizeof cell, "%-10s %12s", row.name.c_str(),
                  format_loss(row.best_val).c_str());
    std::string out = cell;
    double mean = 0.0;
    for (size_t m = 0; m < d.raw.mode_names.size(); ++m) {
      double mae = row.ev.table.pooled[m].mae;
      mean += mae;
      std::snprintf(cell, sizeof cell, " %12s", format_loss(mae).c_str());
      out += cell;
    }
    mean /= static_cast<double>(d.raw.mode_names.size());
    std::cout << out << "  " << format_loss(mean) << "\n";
  }
  std::cout << "wrote " << (fs::path(rc.output_dir) / "ablation.csv").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-mode spatial-temporal forecasting engine"};
  app.require_subcommand(1);
  int exit_code = 0;

  GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "write a synthetic dataset");
  c_gen->add_option("--out", gen.out, "dataset directory");
  c_gen->add_option("--modes", gen.modes, "number of modes");
  c_gen->add_option("--nodes", gen.nodes, "number of nodes");
  c_gen->add_option("--steps", gen.steps, "number of time steps");
  c_gen->add_option("--channels", gen.channels, "channels per node");
  c_gen->add_option("--step-minutes", gen.step_minutes,
                    "minutes per step (must divide a day)");
  c_gen->add_option("--start", gen.start, "first timestamp, YYYY-MM-DDTHH:MM");
  c_gen->add_option("--seed", gen.seed, "generator seed");
  c_gen->add_option("--coupling", gen.couplings,
                    "source:target:lag:gain[:noise], repeatable");
  c_gen->callback([&] { exit_code = run_generate(gen); });

  ConfigArgs train_args;
  CLI::App* c_train = app.add_subcommand("train", "train and write checkpoint + history");
  train_args.attach(c_train);
  c_train->callback([&] { exit_code = run_train(train_args.resolve()); });

  ConfigArgs eval_args;
  std::string eval_ckpt, eval_split = "test";
  CLI::App* c_eval = app.add_subcommand("evaluate", "metrics for a checkpoint");
  eval_args.attach(c_eval, /*model_flags=*/false);
  c_eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  c_eval->add_option("--split", eval_split, "train | val | test (default test)");
  c_eval->callback([&] {
    exit_code = run_evaluate(eval_args.resolve(), eval_ckpt, eval_split);
  });

  ConfigArgs pred_args;
  std::string pred_ckpt, pred_split = "test";
  CLI::App* c_pred = app.add_subcommand("predict", "forecasts for a dataset range");
  pred_args.attach(c_pred, /*model_flags=*/false);
  c_pred->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required();
  c_pred->add_option("--split", pred_split, "train | val | test (default test)");
  c_pred->callback([&] {
    exit_code = run_predict(pred_args.resolve(), pred_ckpt, pred_split);
  });

  CLI::App* c_grad = app.add_subcommand(
      "gradcheck", "finite-difference check of the full model");
  c_grad->callback([&] { exit_code = run_gradcheck(); });

  ConfigArgs param_args;
  int64_t p_modes = 2, p_nodes = 32, p_channels = 1;
  CLI::App* c_params =
      app.add_subcommand("params", "parameter count and scaling report");
  param_args.attach(c_params);
  c_params->add_option("--modes", p_modes, "mode count when no dataset is given");
  c_params->add_option("--nodes", p_nodes, "node count when no dataset is given");
  c_params->add_option("--channels", p_channels,
                       "channel count when no dataset is given");
  c_params->callback([&] {
    exit_code = run_params(param_args.resolve(), p_modes, p_nodes, p_channels);
  });

  ConfigArgs ablate_args;
  std::string ablate_split = "test";
  CLI::App* c_ablate = app.add_subcommand(
      "ablate", "train full, no_tdl, no_csrl, no_ccl and compare");
  ablate_args.attach(c_ablate);
  c_ablate->add_option("--split", ablate_split, "split for the comparison table");
  c_ablate->callback([&] {
    exit_code = run_ablate(ablate_args.resolve(), ablate_split);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
