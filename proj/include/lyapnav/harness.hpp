#pragma once

// Experiment driver: config files, seeded runs of the four algorithm/shaping
// variants, per-run CSV logs, and min/max/avg summaries.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lyapnav/ddpg.hpp"
#include "lyapnav/envsim.hpp"
#include "lyapnav/episode_log.hpp"
#include "lyapnav/ppo.hpp"
#include "lyapnav/shaping.hpp"

namespace lyapnav::harness {

enum class Algorithm { ddpg, ppo };

std::string_view algorithm_name(Algorithm a) noexcept;

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::ppo;
  shaping::ShapingConfig shaping{};  // gamma here is the discount for everything
  int episodes = 300;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int jobs = 1;
  envsim::World world{};
  ddpg::DdpgConfig ddpg{};
  ppo::PpoConfig ppo{};
  std::string output_dir = "runs";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// One row of the reference table of config keys.
struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string description;
};

/// Every accepted key with its default, in file order.
const std::vector<ConfigKey>& config_reference();

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& cfg);

/// Parses `key = value` lines. Throws ConfigError with "<source>:<line>: ..." on
/// syntax errors or unknown keys, and a field-naming message on validation failures.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes every key; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 over serialize_config, hex.
std::string config_hash(const ExperimentConfig& cfg);

/// Discount applied everywhere (shaping, DDPG target, PPO advantages).
ddpg::DdpgConfig effective_ddpg(const ExperimentConfig& cfg);
ppo::PpoConfig effective_ppo(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader = "episode,reward,steps,terminal,seed,algo,shaping";

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

std::string csv_row(const EpisodeRecord& rec, std::uint64_t seed, std::string_view algo,
                    bool shaping);

/// Reads a run CSV back into an EpisodeLog. Throws ConfigError with line info.
EpisodeLog read_csv(const std::filesystem::path& path);
EpisodeLog parse_csv(std::string_view text, std::string_view source = "<string>");

// ---------------------------------------------------------------------------
// Runs

std::string run_stem(Algorithm algo, bool shaping, std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  std::filesystem::path csv_path;
  EpisodeLog log;
  bool ok = false;
  std::string error;
};

/// Called after each episode of each run; throwing aborts that run.
using ProgressHook = std::function<void(std::uint64_t seed, const EpisodeRecord&)>;

/// One training run per seed. Each run streams `<out>/<algo>_<on|off>_<seed>.csv`
/// (flushed per episode) and writes `<stem>.meta` alongside. A repeated seed gets
/// `_rN` appended to its stem. A failing run is reported, not rethrown.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const ProgressHook& hook = {});

/// Training only, no files: dispatches to train_ddpg / train_ppo.
EpisodeLog train(const ExperimentConfig& cfg, std::uint64_t seed,
                 const EpisodeCallback& on_episode = {});

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
  std::string label;
  double min_reward = 0.0;
  double max_reward = 0.0;
  double avg_reward = 0.0;
  std::size_t episodes = 0;
  std::size_t runs = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// "DDPG w/o shaping", "PPO with shaping", ...
std::string variant_label(std::string_view algo, bool shaping);

/// Fixed row order for the four variants.
const std::vector<std::string>& variant_order();

/// Pools all episodes of all logs sharing a label. labels[i] labels logs[i].
/// Rows follow variant_order() for known labels, then others alphabetically.
std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs,
                                  const std::vector<std::string>& labels);

/// Labels derived from each log's algorithm and shaping flag.
std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs);

/// Per-(label, seed) rows for the breakdown table.
std::vector<SummaryRow> summarize_per_seed(const std::vector<EpisodeLog>& logs);

std::string format_summary_table(const std::vector<SummaryRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Reads every *.csv run log in `dir` (skipping summary outputs).
std::vector<EpisodeLog> read_run_dir(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Learning curves

/// Trailing mean over `window` episodes; early entries average what exists.
std::vector<double> learning_curve(const EpisodeLog& log, int window);
std::string learning_curve_csv(const EpisodeLog& log, int window);

}  // namespace lyapnav::harness
