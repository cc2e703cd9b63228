// Command-line front end: train, summarize, curve, config.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "lyapnav/error.hpp"
#include "lyapnav/harness.hpp"
#include "lyapnav/kernels.hpp"

namespace {

using namespace lyapnav;

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaped-reward DDPG/PPO on a 2D LiDAR navigation task"};
  app.require_subcommand(1);

  std::string kernel_backend;
  app.add_option("--kernels", kernel_backend, "Force kernel backend (scalar|avx2)");

  // train
  auto* train = app.add_subcommand("train", "Train one algorithm/shaping variant over seeds");
  std::string config_path, algo, shaping, out_dir;
  std::optional<double> eta;
  std::optional<int> episodes, jobs;
  std::vector<std::uint64_t> seeds;
  bool quiet = false;
  train->add_option("--config", config_path, "Config file (key = value lines)");
  train->add_option("--algo", algo, "ddpg | ppo")->check(CLI::IsMember({"ddpg", "ppo"}));
  train->add_option("--shaping", shaping, "on | off")->check(CLI::IsMember({"on", "off"}));
  train->add_option("--eta", eta, "Shaping weight in [0, 1]");
  train->add_option("--episodes", episodes, "Episodes per seed");
  train->add_option("--seed", seeds, "Run seed(s); repeat or list several");
  train->add_option("--jobs", jobs, "Seeds trained concurrently");
  train->add_option("--out", out_dir, "Output directory");
  train->add_flag("--quiet", quiet, "No per-episode progress");

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Min/max/avg table over run CSVs");
  std::string in_dir, summary_out;
  summarize->add_option("--in", in_dir, "Directory with run CSVs")->required();
  summarize->add_option("--out", summary_out, "Summary CSV path (table goes to stdout)")->required();

  // curve
  auto* curve = app.add_subcommand("curve", "Moving-average learning curve of one run CSV");
  std::string curve_in, curve_out;
  int window = 20;
  curve->add_option("--in", curve_in, "Run CSV")->required();
  curve->add_option("--window", window, "Trailing window in episodes")->check(CLI::PositiveNumber);
  curve->add_option("--out", curve_out, "Output CSV (default: stdout)");

  // config
  auto* config = app.add_subcommand("config", "Print every config key with its default");
  bool as_file = false;
  config->add_flag("--file", as_file, "Print as a loadable config file instead of a table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (kernel_backend == "scalar") kernels::select_backend(kernels::Backend::scalar);
    else if (kernel_backend == "avx2") kernels::select_backend(kernels::Backend::avx2);
    else if (!kernel_backend.empty()) throw ConfigError("unknown kernel backend '" + kernel_backend + "'");

    if (*train) {
      harness::ExperimentConfig cfg =
          config_path.empty() ? harness::ExperimentConfig{} : harness::load_config(config_path);
      if (!algo.empty()) cfg.algorithm = algo == "ddpg" ? harness::Algorithm::ddpg : harness::Algorithm::ppo;
      if (!shaping.empty()) cfg.shaping.enabled = shaping == "on";
      if (eta) cfg.shaping.eta = *eta;
      if (episodes) cfg.episodes = *episodes;
      if (jobs) cfg.jobs = *jobs;
      if (!seeds.empty()) cfg.seeds = seeds;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      harness::validate(cfg);

      std::cerr << "training " << harness::algorithm_name(cfg.algorithm) << " shaping "
                << (cfg.shaping.enabled ? "on" : "off") << " eta " << cfg.shaping.eta << ", "
                << cfg.episodes << " episodes x " << cfg.seeds.size() << " seeds, kernels "
                << kernels::backend_name(kernels::active_backend()) << "\n";
      const auto hook = [&](std::uint64_t seed, const EpisodeRecord& rec) {
        if (quiet) return;
        std::cerr << "seed " << seed << " episode " << rec.episode << " reward "
                  << harness::format_double(rec.reward) << " steps " << rec.steps << " "
                  << envsim::terminal_name(rec.terminal) << "\n";
      };
      const auto results = harness::run_experiment(cfg, hook);
      int failures = 0;
      for (const auto& r : results) {
        if (r.ok) {
          std::cout << r.csv_path.string() << "\n";
        } else {
          ++failures;
          std::cerr << "seed " << r.seed << " failed: " << r.error << "\n";
        }
      }
      return failures == 0 ? 0 : 1;
    }

    if (*summarize) {
      const auto logs = harness::read_run_dir(in_dir);
      if (logs.empty()) throw ConfigError("no run CSVs found in '" + in_dir + "'");
      const auto rows = harness::summarize(logs);
      const auto per_seed = harness::summarize_per_seed(logs);
      std::cout << harness::format_summary_table(rows) << "\n"
                << harness::format_summary_table(per_seed);
      write_file(summary_out, harness::summary_csv(rows));
      std::filesystem::path breakdown(summary_out);
      breakdown.replace_filename(breakdown.stem().string() + "_per_seed" +
                                 breakdown.extension().string());
      write_file(breakdown, harness::summary_csv(per_seed));
      return 0;
    }

    if (*curve) {
      const auto log = harness::read_csv(curve_in);
      const auto text = harness::learning_curve_csv(log, window);
      if (curve_out.empty()) std::cout << text;
      else write_file(curve_out, text);
      return 0;
    }

    if (*config) {
      if (as_file) {
        std::cout << harness::serialize_config(harness::ExperimentConfig{});
      } else {
        for (const auto& k : harness::config_reference()) {
          std::cout << k.key << " = " << k.default_value << "    # " << k.description << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
