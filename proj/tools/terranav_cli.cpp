// terranav command line front end: single episodes, paired full-tree
// comparisons, multi-seed robustness sweeps, and terrain export.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "terranav/terranav.hpp"

namespace fs = std::filesystem;
using namespace terranav;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string seeds_raw;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seeds = true) {
  cmd->add_option("--config", args.config_path, "config file (key = value)");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--set", args.overrides, "override: key=value (repeatable)");
  if (with_seeds)
    cmd->add_option("--seeds", args.seeds_raw, "comma-separated seed list");
  cmd->add_option("--jobs", args.jobs, "max parallel episodes")
      ->check(CLI::PositiveNumber);
}

Config load_config(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) cfg.load_file(args.config_path);
  for (const std::string& o : args.overrides) cfg.apply_override(o);
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& raw) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(raw);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = Config::trim(tok);
    if (t.empty()) continue;
    try {
      seeds.push_back(std::stoull(t));
    } catch (const std::exception&) {
      throw ConfigError("--seeds: expected an integer, got '" + t + "'");
    }
  }
  return seeds;
}

EpisodeConfig seeded(EpisodeConfig base, std::uint64_t seed) {
  base.terrain.seed = seed;
  base.seed = seed;
  return base;
}

/// Runs `count` episodes through `make` on up to `jobs` threads. Episode
/// determinism makes the results independent of scheduling.
std::vector<EpisodeMetrics> run_batch(
    int count, int jobs,
    const std::function<EpisodeConfig(int)>& make) {
  std::vector<EpisodeMetrics> results(count);
  std::vector<std::string> errors(count);
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    while (true) {
      const int i = cursor.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = run_episode(make(i));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error(e);
  return results;
}

int cmd_run(const CommonArgs& args) {
  Config cfg = load_config(args);
  EpisodeConfig ec = make_episode_config(cfg);
  const auto seeds = parse_seeds(args.seeds_raw);
  if (seeds.size() > 1)
    throw ConfigError("run: --seeds accepts at most one seed");
  if (seeds.size() == 1) ec = seeded(ec, seeds[0]);
  const std::int64_t snapshot_every = cfg.get_int("output.snapshot_every");

  fs::create_directories(args.out_dir);
  Episode ep(ec);
  std::int64_t tick = 0;
  while (!ep.done()) {
    ep.step();
    ++tick;
    if (snapshot_every > 0 && tick % snapshot_every == 0 && !ep.done()) {
      char name[64];
      std::snprintf(name, sizeof(name), "tree_%06lld.txt",
                    static_cast<long long>(tick));
      std::ostringstream tos;
      ep.tree().snapshot(tos);
      atomic_write(fs::path(args.out_dir) / name, tos.str());
      std::snprintf(name, sizeof(name), "graph_%06lld.txt",
                    static_cast<long long>(tick));
      std::ostringstream gos;
      ep.graph().snapshot(gos);
      atomic_write(fs::path(args.out_dir) / name, gos.str());
    }
  }
  const EpisodeMetrics m = ep.run();

  atomic_write(fs::path(args.out_dir) / "trajectory.csv", trajectory_csv(m));
  atomic_write(fs::path(args.out_dir) / "summary.txt", summary_text(m));
  std::ostringstream tos;
  ep.tree().snapshot(tos);
  atomic_write(fs::path(args.out_dir) / "tree_final.txt", tos.str());
  std::ostringstream gos;
  ep.graph().snapshot(gos);
  atomic_write(fs::path(args.out_dir) / "graph_final.txt", gos.str());

  std::cout << (m.success ? "success" : "failure: " + m.failure_reason)
            << " ticks=" << m.ticks_used
            << " path_length=" << format_double(m.path_length) << "\n";
  return m.success ? 0 : 2;
}

int cmd_compare(const CommonArgs& args) {
  Config cfg = load_config(args);
  const EpisodeConfig base = make_episode_config(cfg);
  const auto seeds = parse_seeds(args.seeds_raw);
  if (seeds.empty()) throw ConfigError("compare: --seeds requires >= 1 seed");

  const int n = static_cast<int>(seeds.size());
  auto make = [&](int i) {
    EpisodeConfig ec = seeded(base, seeds[i / 2]);
    ec.mode = (i % 2 == 0) ? PlannerMode::Pruned : PlannerMode::FullTree;
    return ec;
  };
  const auto results = run_batch(2 * n, args.jobs, make);

  std::ostringstream series;
  series << "seed,mode,tick,tree_nodes,memory_proxy_bytes\n";
  std::ostringstream table;
  table << "seed pruned_peak full_peak pruned_final_mem full_final_mem "
           "pruned_success full_success\n";
  bool all_ok = true;
  for (int i = 0; i < n; ++i) {
    const EpisodeMetrics& pruned = results[2 * i];
    const EpisodeMetrics& full = results[2 * i + 1];
    for (const auto* m : {&pruned, &full}) {
      const char* mode = (m == &pruned) ? "pruned" : "fulltree";
      for (const TickRow& r : m->series) {
        series << seeds[i] << ',' << mode << ',' << r.tick << ','
               << r.tree_nodes << ','
               << r.tree_nodes * kNodeMemoryProxyBytes << '\n';
      }
    }
    table << seeds[i] << ' ' << pruned.peak_tree_nodes << ' '
          << full.peak_tree_nodes << ' ' << pruned.final_memory_proxy() << ' '
          << full.final_memory_proxy() << ' '
          << (pruned.success ? "true" : "false") << ' '
          << (full.success ? "true" : "false") << '\n';
    all_ok = all_ok && pruned.success && full.success;
  }
  fs::create_directories(args.out_dir);
  atomic_write(fs::path(args.out_dir) / "node_counts.csv", series.str());
  atomic_write(fs::path(args.out_dir) / "compare_summary.txt", table.str());
  std::cout << "compare: " << n << " paired seeds, "
            << (all_ok ? "all succeeded" : "some episodes failed") << "\n";
  return all_ok ? 0 : 2;
}

int cmd_sweep(const CommonArgs& args) {
  Config cfg = load_config(args);
  const EpisodeConfig base = make_episode_config(cfg);
  const auto seeds = parse_seeds(args.seeds_raw);
  if (seeds.empty()) throw ConfigError("sweep: --seeds requires >= 1 seed");
  const auto pairs = parse_sweep_pairs(cfg.get("sweep.pairs"));
  if (pairs.empty())
    throw ConfigError("sweep.pairs: at least one start/goal pair required");

  const int n = static_cast<int>(seeds.size() * pairs.size());
  auto make = [&](int i) {
    EpisodeConfig ec = seeded(base, seeds[i / pairs.size()]);
    const auto& [start, goal] = pairs[i % pairs.size()];
    ec.start = start;
    ec.target = goal;
    return ec;
  };
  const auto results = run_batch(n, args.jobs, make);

  std::ostringstream os;
  os << "seed pair start_x start_y goal_x goal_y success path_length "
        "roughness\n";
  int successes = 0;
  double sum_len = 0.0, sum_rough = 0.0;
  for (int i = 0; i < n; ++i) {
    const EpisodeMetrics& m = results[i];
    const auto& [start, goal] = pairs[i % pairs.size()];
    os << seeds[i / pairs.size()] << ' ' << i % pairs.size() << ' '
       << format_double(start.x) << ' ' << format_double(start.y) << ' '
       << format_double(goal.x) << ' ' << format_double(goal.y) << ' '
       << (m.success ? "true" : "false") << ' '
       << format_double(m.path_length) << ' ' << format_double(m.roughness)
       << '\n';
    successes += m.success ? 1 : 0;
    sum_len += m.path_length;
    sum_rough += m.roughness;
  }
  os << "episodes = " << n << '\n';
  os << "success_rate = " << format_double(double(successes) / n) << '\n';
  os << "mean_path_length = " << format_double(sum_len / n) << '\n';
  os << "mean_roughness = " << format_double(sum_rough / n) << '\n';
  fs::create_directories(args.out_dir);
  atomic_write(fs::path(args.out_dir) / "sweep_summary.txt", os.str());
  std::cout << "sweep: " << n << " episodes, success_rate="
            << format_double(double(successes) / n) << "\n";
  return successes == n ? 0 : 2;
}

int cmd_export_terrain(const CommonArgs& args, const std::string& out_file) {
  Config cfg = load_config(args);
  const EpisodeConfig ec = make_episode_config(cfg);
  const HeightField field = ec.terrain.kind == TerrainKind::Imported
                                ? load_height_field(ec.terrain.file)
                                : generate_terrain(ec.terrain);
  std::ostringstream os;
  save_height_field(field, os);
  if (!fs::path(out_file).parent_path().empty())
    fs::create_directories(fs::path(out_file).parent_path());
  atomic_write(out_file, os.str());
  std::cout << "wrote " << out_file << " (" << field.cells_x() << "x"
            << field.cells_y() << " cells)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terranav: layered mapless navigation on synthetic 2.5D terrain"};
  app.require_subcommand(1);

  CommonArgs run_args, cmp_args, sweep_args;
  std::string export_out;
  std::string export_config;
  std::vector<std::string> export_overrides;

  CLI::App* run = app.add_subcommand("run", "run one episode");
  add_common(run, run_args);
  CLI::App* cmp =
      app.add_subcommand("compare", "paired pruned vs full-tree runs");
  add_common(cmp, cmp_args);
  CLI::App* sweep =
      app.add_subcommand("sweep", "seed x start/goal robustness sweep");
  add_common(sweep, sweep_args);
  CLI::App* exp = app.add_subcommand("export-terrain",
                                     "generate and save a heightmap");
  exp->add_option("--config", export_config, "config file");
  exp->add_option("--out", export_out, "output heightmap path")->required();
  exp->add_option("--set", export_overrides, "override: key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (cmp->parsed()) return cmd_compare(cmp_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (exp->parsed()) {
      CommonArgs args;
      args.config_path = export_config;
      args.overrides = export_overrides;
      return cmd_export_terrain(args, export_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
