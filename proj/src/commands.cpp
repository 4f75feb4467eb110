#include "goalcraft/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "goalcraft/analysis.hpp"
#include "goalcraft/checkpoint.hpp"
#include "goalcraft/config.hpp"
#include "goalcraft/csv.hpp"
#include "goalcraft/error.hpp"
#include "goalcraft/evalx.hpp"
#include "goalcraft/rng.hpp"
#include "goalcraft/svg.hpp"
#include "goalcraft/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace goalcraft {

const char* version() { return GOALCRAFT_VERSION; }

std::string resolve_out_dir(const std::string& out) {
  const char* root = std::getenv("GOALCRAFT_OUT");
  if (out.empty()) return root && *root ? std::string(root) : std::string("runs");
  if (root && *root && fs::path(out).is_relative()) return (fs::path(root) / out).string();
  return out;
}

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json manifest(const RunConfig& cfg, std::uint64_t root_seed, json mode, const std::string& started,
              double wall_time) {
  json m;
  m["config"] = cfg.to_text();
  m["config_hash"] = config_hash(cfg);
  m["root_seed"] = root_seed;
  m["version"] = version();
  m["started_at"] = started;
  m["mode"] = std::move(mode);
  m["wall_time_s"] = wall_time;
  return m;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path.string(), j.dump(2) + "\n"); }

CheckpointMeta meta_for(const RunConfig& cfg, std::uint64_t seed, int epoch) {
  CheckpointMeta meta;
  meta.config_hash = config_hash(cfg);
  meta.epoch = epoch;
  meta.variant = to_string(cfg.critic.variant);
  meta.seed = seed;
  meta.extra["actor_width"] = std::to_string(cfg.train.actor_width);
  return meta;
}

/// Streams a metrics CSV: header on open, one flushed row per append.
class MetricsWriter {
 public:
  MetricsWriter(const fs::path& path, bool with_phase) : path_(path), with_phase_(with_phase) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    out_ << header_line(with_phase ? CsvSchema::metrics_phase : CsvSchema::metrics) << "\n";
    out_.flush();
  }

  void append(const RunRecord& r, const std::string& phase = {}) {
    out_ << (with_phase_ ? metrics_row(r, phase) : metrics_row(r)) << "\n";
    out_.flush();
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
  }

 private:
  fs::path path_;
  bool with_phase_;
  std::ofstream out_;
};

void log_epoch(const RunRecord& r, const std::string& tag) {
  std::fprintf(stderr, "[%s] epoch %d success %.3f return %.2f critic_loss %.4f\n", tag.c_str(),
               r.epoch, r.success_rate, r.mean_return, r.critic_loss);
}

struct SeedRun {
  std::vector<RunRecord> records;
};

/// One training run into `dir`: metrics.csv, checkpoints and manifest.json.
SeedRun train_into(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir, json mode,
                   bool quiet) {
  const std::string started = utc_now();
  Stopwatch clock;
  make_dirs(dir);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  MetricsWriter metrics(dir / "metrics.csv", false);
  const std::string tag = to_string(cfg.critic.variant) + " seed " + std::to_string(seed);

  TrainHooks hooks;
  hooks.on_epoch = [&](const RunRecord& r, const AgentParams& params) {
    metrics.append(r);
    if (!quiet) log_epoch(r, tag);
    if (cfg.checkpoint_every > 0 && r.epoch % cfg.checkpoint_every == 0) {
      save_checkpoint((dir / ("checkpoint_epoch_" + std::to_string(r.epoch) + ".gcqk")).string(),
                      params, meta_for(cfg, seed, r.epoch));
    }
    return true;
  };
  TrainResult res = train(cfg.env, cfg.critic, tc, cfg.train_region, hooks);
  const int last_epoch = res.records.empty() ? 0 : res.records.back().epoch;
  save_checkpoint((dir / "checkpoint_final.gcqk").string(), res.final_params,
                  meta_for(cfg, seed, last_epoch));
  write_json(dir / "manifest.json", manifest(cfg, seed, std::move(mode), started, clock.seconds()));
  return {std::move(res.records)};
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

Checkpoint load_for(const std::string& path, const RunConfig& cfg) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.meta.variant != to_string(cfg.critic.variant)) {
    throw ContractError("checkpoint holds a " + ck.meta.variant + " critic but the config says " +
                        to_string(cfg.critic.variant));
  }
  check_checkpoint_layout(ck.params, cfg.critic, cfg.train.actor_width);
  return ck;
}

Goal parse_goal(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--goal expects 'x,y', got '" + text + "'");
  try {
    std::size_t used = 0;
    const double x = std::stod(text.substr(0, comma), &used);
    const double y = std::stod(text.substr(comma + 1));
    return {x, y};
  } catch (const std::exception&) {
    throw ConfigError("--goal expects 'x,y', got '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

// -- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  const RunConfig cfg = load_run_config(args.config);
  const fs::path out = resolve_out_dir(args.out);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (args.seed) seeds = {*args.seed};
  for (std::uint64_t s : seeds) {
    json mode = {{"command", "train"}, {"num_workers", cfg.train.num_workers}};
    train_into(cfg, s, out / seed_dir(s), mode, args.quiet);
  }
  std::printf("wrote %zu run(s) under %s\n", seeds.size(), out.string().c_str());
  return kExitOk;
}

// -- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  int n = 15;
  std::uint64_t seed = 0;
  std::string json_out;
};

int cmd_eval(const EvalArgs& args) {
  const RunConfig cfg = load_run_config(args.config);
  if (args.n < 1) throw ConfigError("--n must be >= 1");
  const Checkpoint ck = load_for(args.checkpoint, cfg);
  const EvalReport rep =
      evaluate(cfg.env, actor_net(cfg.train.actor_width), ck.params.actor, cfg.train_region, args.n,
               derive_seed(args.seed, "cli.eval"), cfg.train.gamma);
  json j;
  j["checkpoint"] = args.checkpoint;
  j["variant"] = ck.meta.variant;
  j["epoch"] = ck.meta.epoch;
  j["seed"] = args.seed;
  j["n_rollouts"] = rep.n_rollouts;
  j["success_rate"] = rep.success_rate;
  j["mean_discounted_return"] = rep.mean_discounted_return;
  std::printf("success_rate %s mean_return %s n %d\n", format_double(rep.success_rate).c_str(),
              format_double(rep.mean_discounted_return).c_str(), rep.n_rollouts);
  std::printf("%s\n", j.dump().c_str());
  if (!args.json_out.empty()) write_json(args.json_out, j);
  return kExitOk;
}

// -- finetune --------------------------------------------------------------

struct FinetuneArgs {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::string mode;
  std::string region;
  std::optional<std::uint64_t> seed;
};

int cmd_finetune(const FinetuneArgs& args) {
  const std::string started = utc_now();
  Stopwatch clock;
  const RunConfig cfg = load_run_config(args.config);
  FinetunePlan plan = cfg.finetune;
  if (!args.mode.empty()) plan.mode = parse_finetune_mode(args.mode);
  if (!args.region.empty()) plan.finetune_region.kind = parse_region_kind(args.region);
  plan.validate(cfg.critic);

  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (args.seed) seeds = {*args.seed};
  const fs::path out = resolve_out_dir(args.out);

  PretrainResult pre;
  if (!args.checkpoint.empty()) {
    const Checkpoint ck = load_for(args.checkpoint, cfg);
    for (std::uint64_t s : seeds) {
      pre.seeds.push_back(s);
      pre.best_checkpoints.push_back(ck.params);
      pre.best_epochs.push_back(ck.meta.epoch);
      pre.curves.emplace_back();
    }
  } else {
    pre = pretrain_phase(plan, cfg.env, cfg.critic, cfg.train, seeds);
  }
  const FinetuneResult ft = finetune_phase(plan, cfg.env, cfg.critic, cfg.train, pre);

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const fs::path dir = out / seed_dir(seeds[i]);
    make_dirs(dir);
    MetricsWriter metrics(dir / "metrics.csv", true);
    for (const auto& r : pre.curves[i]) metrics.append(r, "pretrain");
    for (const auto& r : ft.curves[i]) metrics.append(r, "finetune");
    save_checkpoint((dir / "pretrain_best.gcqk").string(), pre.best_checkpoints[i],
                    meta_for(cfg, seeds[i], pre.best_epochs[i]));
    save_checkpoint((dir / "finetune_start.gcqk").string(), ft.start_params[i],
                    meta_for(cfg, seeds[i], 0));
    const int last = ft.curves[i].empty() ? 0 : ft.curves[i].back().epoch;
    save_checkpoint((dir / "finetune_final.gcqk").string(), ft.final_params[i],
                    meta_for(cfg, seeds[i], last));
    json mode = {{"command", "finetune"},
                 {"finetune_mode", to_string(plan.mode)},
                 {"pretrain_region", to_string(plan.pretrain_region.kind)},
                 {"finetune_region", to_string(plan.finetune_region.kind)},
                 {"radius_threshold", plan.finetune_region.radius_threshold},
                 {"pretrain_best_epoch", pre.best_epochs[i]},
                 {"from_checkpoint", args.checkpoint}};
    write_json(dir / "manifest.json", manifest(cfg, seeds[i], mode, started, clock.seconds()));
  }
  std::printf("wrote %zu finetune run(s) under %s\n", seeds.size(), out.string().c_str());
  return kExitOk;
}

// -- transfer --------------------------------------------------------------

struct TransferArgs {
  std::string source;
  std::string target;
  std::string checkpoint;
  std::string out;
  std::string mode = "no_reset";
  std::optional<std::uint64_t> seed;
};

int cmd_transfer(const TransferArgs& args) {
  const std::string started = utc_now();
  Stopwatch clock;
  const RunConfig src = load_run_config(args.source);
  const RunConfig tgt = load_run_config(args.target);
  if (src.critic.variant != tgt.critic.variant || src.critic.latent_dim != tgt.critic.latent_dim ||
      src.critic.branch_width != tgt.critic.branch_width ||
      src.train.actor_width != tgt.train.actor_width) {
    throw ConfigError("source and target configs must describe the same critic and actor");
  }
  const TransferMode mode = parse_transfer_mode(args.mode);
  std::vector<std::uint64_t> seeds = tgt.seeds;
  if (args.seed) seeds = {*args.seed};
  const fs::path out = resolve_out_dir(args.out);

  std::optional<Checkpoint> ck;
  if (!args.checkpoint.empty()) ck = load_for(args.checkpoint, src);

  for (std::uint64_t s : seeds) {
    TrainConfig tc = tgt.train;
    tc.seed = s;
    TransferResult res;
    if (ck) {
      res = transfer_from(tgt.env, tgt.critic, tc, mode, ck->params, tgt.train_region);
    } else {
      TrainConfig sc = src.train;
      sc.seed = s;
      const TrainResult source = train(src.env, src.critic, sc, src.train_region);
      res = transfer_from(tgt.env, tgt.critic, tc, mode, source.final_params, tgt.train_region);
      res.source_curve = source.records;
    }
    const fs::path dir = out / seed_dir(s);
    make_dirs(dir);
    MetricsWriter metrics(dir / "metrics.csv", true);
    for (const auto& r : res.source_curve) metrics.append(r, "source");
    for (const auto& r : res.target_curve) metrics.append(r, "target");
    save_checkpoint((dir / "transfer_pre_reset.gcqk").string(), res.source_final,
                    meta_for(src, s, res.source_curve.empty() ? 0 : res.source_curve.back().epoch));
    save_checkpoint((dir / "transfer_post_reset.gcqk").string(), res.target_start,
                    meta_for(tgt, s, 0));
    save_checkpoint((dir / "target_final.gcqk").string(), res.target_final,
                    meta_for(tgt, s, res.target_curve.empty() ? 0 : res.target_curve.back().epoch));
    json m = {{"command", "transfer"},
              {"transfer_mode", to_string(mode)},
              {"source_config", src.to_text()},
              {"from_checkpoint", args.checkpoint}};
    write_json(dir / "manifest.json", manifest(tgt, s, m, started, clock.seconds()));
  }
  std::printf("wrote %zu transfer run(s) under %s\n", seeds.size(), out.string().c_str());
  return kExitOk;
}

// -- ablate ----------------------------------------------------------------

struct AblateArgs {
  std::string config;
  std::string sweep;
  std::string out;
  int jobs = 1;
  bool quiet = true;
};

std::string ablate_note(const RunConfig& base, const std::string& key,
                        const std::vector<std::string>& values) {
  if (key == "critic.variant" && !base.latent_dim_explicit) {
    for (const auto& v : values) {
      if (v == "\"l2_metric\"" || v == "l2_metric") {
        return "note: the l2_metric cell uses its default latent_dim " +
               std::to_string(default_latent_dim(CriticVariant::l2_metric)) +
               " rather than " + std::to_string(base.critic.latent_dim);
      }
    }
  }
  if (key == "critic.latent_dim" && base.critic.variant == CriticVariant::l2_metric) {
    return "note: l2_metric defaults to latent_dim " +
           std::to_string(default_latent_dim(CriticVariant::l2_metric)) +
           "; swept values override that default";
  }
  return {};
}

int cmd_ablate(const AblateArgs& args) {
  const std::string started = utc_now();
  Stopwatch clock;
  const RunConfig base = load_run_config(args.config);
  const auto eq = args.sweep.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep expects key=v1,v2,...");
  const std::string key = resolve_config_key(args.sweep.substr(0, eq));
  if (!is_known_config_key(key) || key == "run.seeds" || key == "env.kind") {
    throw ConfigError("invalid sweep key '" + args.sweep.substr(0, eq) + "'");
  }
  std::vector<std::string> values = split(args.sweep.substr(eq + 1), ',');
  if (values.empty()) throw ConfigError("--sweep lists no values");
  if (args.jobs < 1) throw ConfigError("--jobs must be >= 1");

  struct Cell {
    std::string name;
    RunConfig cfg;
  };
  std::vector<Cell> cells;
  const std::string short_key = key.substr(key.find('.') + 1);
  for (const auto& raw : values) {
    const bool quote = key == "critic.variant" || key.ends_with("region") || key == "env.reward" ||
                       key == "her.strategy" || key == "finetune.mode" || key == "train.q_target_clip";
    const std::string v = quote && !raw.starts_with("\"") ? "\"" + raw + "\"" : raw;
    cells.push_back({short_key + "=" + raw, with_override(base, key, v)});
  }
  const std::string note = ablate_note(base, key, values);
  if (!note.empty()) std::fprintf(stderr, "%s\n", note.c_str());

  const fs::path out = resolve_out_dir(args.out);
  struct Task {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::uint64_t s : base.seeds) tasks.push_back({c, s});
  }
  std::vector<std::vector<RunRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const Cell& cell = cells[tasks[i].cell];
        json mode = {{"command", "ablate"}, {"cell", cell.name}, {"sweep", args.sweep}};
        results[i] = train_into(cell.cfg, tasks[i].seed, out / cell.name / seed_dir(tasks[i].seed),
                                mode, args.quiet)
                         .records;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < std::min<int>(args.jobs, static_cast<int>(tasks.size())); ++j) {
      pool.emplace_back(worker);
    }
    worker();
  }
  if (error) std::rethrow_exception(error);

  std::string summary = header_line(CsvSchema::ablate_summary) + "\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<std::vector<RunRecord>> runs;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].cell == c) runs.push_back(results[i]);
    }
    const CurveSummary cs = summarize_curves(runs, success_metric);
    for (const auto& p : cs.points) summary += cells[c].name + "," + summary_row(p) + "\n";
  }
  write_text_file((out / "summary.csv").string(), summary);
  json m = manifest(base, base.seeds.front(),
                    {{"command", "ablate"}, {"sweep", args.sweep}, {"cells", cells.size()},
                     {"seeds", base.seeds}, {"jobs", args.jobs}},
                    started, clock.seconds());
  if (!note.empty()) m["note"] = note;
  write_json(out / "manifest.json", m);
  std::printf("wrote %zu runs and summary.csv under %s\n", tasks.size(), out.string().c_str());
  return kExitOk;
}

// -- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string checkpoint;
  std::string config;
  std::string goal = "0.8,0.2";
  std::size_t grid = 25;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& args) {
  const std::string started = utc_now();
  Stopwatch clock;
  const RunConfig cfg = load_run_config(args.config);
  const Goal goal = parse_goal(args.goal);
  if (!is_free(cfg.env, goal)) throw ConfigError("--goal lies outside the free space");
  if (args.grid < 2) throw ConfigError("--grid must be >= 2");
  const Checkpoint ck = load_for(args.checkpoint, cfg);
  const MlpSpec actor = actor_net(cfg.train.actor_width);
  const fs::path out = resolve_out_dir(args.out);
  make_dirs(out);

  const Heatmap hm = q_heatmap(cfg.env, cfg.critic, ck.params.critic, actor, ck.params.actor, goal,
                               args.grid);
  std::string hm_csv = header_line(CsvSchema::heatmap) + "\n";
  const auto cells = grid_cells(args.grid);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!hm.values[k]) continue;
    hm_csv += format_double(cells[k].x) + "," + format_double(cells[k].y) + "," +
              format_double(*hm.values[k]) + "\n";
  }
  write_text_file((out / "heatmap.csv").string(), hm_csv);
  write_text_file((out / "heatmap.svg").string(), heatmap_svg(hm, cfg.env, goal));

  json mode = {{"command", "analyze"}, {"goal", {goal.x, goal.y}}, {"grid", args.grid},
               {"scan_seed", args.seed}, {"checkpoint", args.checkpoint}};
  if (!is_two_branch(cfg.critic.variant)) {
    mode["field"] = "refused: monolithic critic has no embeddings";
    write_json(out / "manifest.json", manifest(cfg, ck.meta.seed, mode, started, clock.seconds()));
    std::fprintf(stderr, "error: the monolithic critic has no f/phi embeddings; wrote the heatmap only\n");
    return kExitConfig;
  }

  const FieldScan scan = field_scan(cfg.env, cfg.critic, ck.params.critic, actor, ck.params.actor,
                                    goal, args.grid, args.seed);
  std::string field_csv = header_line(CsvSchema::field) + "\n";
  for (const auto& s : scan.samples) field_csv += field_row(s) + "\n";
  write_text_file((out / "field.csv").string(), field_csv);
  write_text_file((out / "field.svg").string(), quiver_svg(scan, args.grid, cfg.env, goal));
  mode["field_cells"] = scan.samples.size();
  mode["pca_fitted"] = scan.pca.has_value();
  write_json(out / "manifest.json", manifest(cfg, ck.meta.seed, mode, started, clock.seconds()));
  std::printf("wrote field (%zu cells) and heatmap under %s\n", scan.samples.size(),
              out.string().c_str());
  return kExitOk;
}

// -- report ----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string out;
};

std::vector<fs::path> find_metrics(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "metrics.csv") found.push_back(e.path());
  }
  std::sort(found.begin(), found.end());
  return found;
}

int cmd_report(const ReportArgs& args) {
  if (args.dirs.empty()) throw ConfigError("report needs at least one run directory");
  std::vector<fs::path> files;
  for (const auto& d : args.dirs) {
    auto f = find_metrics(d);
    files.insert(files.end(), f.begin(), f.end());
  }
  if (files.empty()) throw ConfigError("no metrics.csv files under the given directories");

  std::optional<std::vector<std::string>> header;
  // (variant, phase) -> one curve per file and seed
  std::map<std::pair<std::string, std::string>, std::vector<std::vector<RunRecord>>> groups;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f.string());
    if (header && *header != t.header) {
      throw ContractError("mismatched metrics schemas: '" + f.string() + "' differs from '" +
                          files.front().string() + "'");
    }
    header = t.header;
    std::map<std::pair<std::string, std::string>, std::map<std::uint64_t, std::vector<RunRecord>>> per;
    for (const auto& row : read_metrics(f.string())) {
      per[{row.record.variant, row.phase}][row.record.seed].push_back(row.record);
    }
    for (auto& [k, seeds] : per) {
      for (auto& [s, recs] : seeds) groups[k].push_back(std::move(recs));
    }
  }

  const fs::path out = resolve_out_dir(args.out);
  make_dirs(out);
  std::map<std::string, std::vector<CurveSeries>> figures;  // phase -> series
  std::string md = "# goalcraft report\n\nSuccess rate per epoch, mean over seeds with a 95% "
                   "bootstrap interval.\n\n| variant | phase | seeds | final epoch | final success | "
                   "CI low | CI high |\n|---|---|---|---|---|---|---|\n";
  for (const auto& [key, runs] : groups) {
    const auto& [variant, phase] = key;
    const CurveSummary cs = summarize_curves(runs, success_metric);
    const std::string stem = variant + (phase.empty() ? "" : "_" + phase);
    std::string csv = header_line(CsvSchema::summary) + "\n";
    for (const auto& p : cs.points) csv += summary_row(p) + "\n";
    write_text_file((out / ("summary_" + stem + ".csv")).string(), csv);
    figures[phase].push_back({variant, cs.points});
    if (!cs.points.empty()) {
      const CurvePoint& last = cs.points.back();
      md += "| " + variant + " | " + (phase.empty() ? "-" : phase) + " | " +
            std::to_string(runs.size()) + " | " + std::to_string(last.epoch) + " | " +
            format_double(last.mean) + " | " + format_double(last.ci_low) + " | " +
            format_double(last.ci_high) + " |\n";
    }
  }
  md += "\n";
  for (const auto& [phase, series] : figures) {
    const std::string name = "curves" + (phase.empty() ? "" : "_" + phase) + ".svg";
    write_text_file((out / name).string(),
                    learning_curve_svg(series, phase.empty() ? "success rate" : phase + " success rate",
                                       "success rate"));
    md += "![" + (phase.empty() ? std::string("success") : phase) + "](" + name + ")\n\n";
  }
  write_text_file((out / "report.md").string(), md);
  std::printf("report for %zu metrics file(s) written to %s\n", files.size(), out.string().c_str());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"goalcraft: goal-conditioned value networks on 2D reaching tasks"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  std::function<int()> action;

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train one run per seed");
  train_cmd->add_option("config", ta.config, "run config file")->required();
  train_cmd->add_option("--out", ta.out, "output directory");
  train_cmd->add_option("--seed", ta.seed, "train only this seed");
  train_cmd->add_flag("--quiet", ta.quiet, "no per-epoch log lines");
  train_cmd->callback([&] { action = [&] { return cmd_train(ta); }; });

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("checkpoint", ea.checkpoint)->required();
  eval_cmd->add_option("config", ea.config)->required();
  eval_cmd->add_option("--n", ea.n, "evaluation rollouts");
  eval_cmd->add_option("--seed", ea.seed, "evaluation seed");
  eval_cmd->add_option("--json", ea.json_out, "also write the report to this file");
  eval_cmd->callback([&] { action = [&] { return cmd_eval(ea); }; });

  FinetuneArgs fa;
  auto* ft_cmd = app.add_subcommand("finetune", "pretrain near, finetune far");
  ft_cmd->add_option("config", fa.config)->required();
  ft_cmd->add_option("--checkpoint", fa.checkpoint, "start from this checkpoint instead of pretraining");
  ft_cmd->add_option("--mode", fa.mode, "full, freeze_f or reset_f");
  ft_cmd->add_option("--region", fa.region, "finetune goal region");
  ft_cmd->add_option("--out", fa.out, "output directory");
  ft_cmd->add_option("--seed", fa.seed, "run only this seed");
  ft_cmd->callback([&] { action = [&] { return cmd_finetune(fa); }; });

  TransferArgs xa;
  auto* tr_cmd = app.add_subcommand("transfer", "train on a source env, continue on a target env");
  tr_cmd->add_option("--source", xa.source, "source config")->required();
  tr_cmd->add_option("--target", xa.target, "target config")->required();
  tr_cmd->add_option("--checkpoint", xa.checkpoint, "source parameters instead of training");
  tr_cmd->add_option("--mode", xa.mode, "no_reset or reset_f");
  tr_cmd->add_option("--out", xa.out, "output directory");
  tr_cmd->add_option("--seed", xa.seed, "run only this seed");
  tr_cmd->callback([&] { action = [&] { return cmd_transfer(xa); }; });

  AblateArgs aa;
  auto* ab_cmd = app.add_subcommand("ablate", "sweep one config key across seeds");
  ab_cmd->add_option("config", aa.config)->required();
  ab_cmd->add_option("--sweep", aa.sweep, "key=v1,v2,...")->required();
  ab_cmd->add_option("--out", aa.out, "output directory");
  ab_cmd->add_option("--jobs", aa.jobs, "runs in parallel");
  ab_cmd->callback([&] { action = [&] { return cmd_ablate(aa); }; });

  AnalyzeArgs na;
  auto* an_cmd = app.add_subcommand("analyze", "embedding field and Q heatmap for one goal");
  an_cmd->add_option("checkpoint", na.checkpoint)->required();
  an_cmd->add_option("config", na.config)->required();
  an_cmd->add_option("--goal", na.goal, "goal as x,y");
  an_cmd->add_option("--grid", na.grid, "cells per side");
  an_cmd->add_option("--seed", na.seed, "seed for the random comparison actions");
  an_cmd->add_option("--out", na.out, "output directory");
  an_cmd->callback([&] { action = [&] { return cmd_analyze(na); }; });

  ReportArgs ra;
  auto* rp_cmd = app.add_subcommand("report", "merge metrics into curves and a markdown table");
  rp_cmd->add_option("dirs", ra.dirs, "run directories");
  rp_cmd->add_option("--out", ra.out, "output directory");
  rp_cmd->callback([&] { action = [&] { return cmd_report(ra); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "shape error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  }
}

}  // namespace goalcraft
