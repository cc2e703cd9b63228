#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lyapnav/error.hpp"
#include "lyapnav/harness.hpp"
#include "lyapnav/kernels.hpp"

namespace lyapnav::harness {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PlannedRun {
  std::uint64_t seed;
  std::string stem;
};

std::vector<PlannedRun> plan_runs(const ExperimentConfig& cfg) {
  std::vector<PlannedRun> runs;
  std::map<std::uint64_t, int> seen;
  for (std::uint64_t seed : cfg.seeds) {
    std::string stem = run_stem(cfg.algorithm, cfg.shaping.enabled, seed);
    const int repeat = seen[seed]++;
    if (repeat > 0) stem += "_r" + std::to_string(repeat);
    runs.push_back({seed, stem});
  }
  return runs;
}

void write_meta(const std::filesystem::path& path, const ExperimentConfig& cfg,
                const EpisodeLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open metadata file '" + path.string() + "'");
  out << "seed = " << log.seed << "\n"
      << "algorithm = " << log.algorithm << "\n"
      << "shaping = " << (log.shaping ? "on" : "off") << "\n"
      << "shaping.eta = " << format_double(cfg.shaping.eta) << "\n"
      << "gamma = " << format_double(cfg.shaping.gamma) << "\n"
      << "episodes = " << log.episodes.size() << "\n"
      << "reward_column = raw_episode_sum\n"
      << "config_hash = " << log.config_hash << "\n"
      << "kernel_backend = " << kernels::backend_name(kernels::active_backend()) << "\n"
      << "wall_clock_seconds = " << format_double(log.wall_clock_seconds) << "\n"
      << "finished_at = " << utc_timestamp() << "\n";
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

RunResult execute_run(const ExperimentConfig& cfg, const PlannedRun& plan,
                      const std::string& hash, const ProgressHook& hook) {
  RunResult result;
  result.seed = plan.seed;
  const std::filesystem::path dir(cfg.output_dir);
  result.csv_path = dir / (plan.stem + ".csv");
  try {
    std::ofstream csv(result.csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error("cannot open '" + result.csv_path.string() + "' for writing");
    csv << kCsvHeader << '\n' << std::flush;
    const std::string algo(algorithm_name(cfg.algorithm));
    auto on_episode = [&](const EpisodeRecord& rec) {
      csv << csv_row(rec, plan.seed, algo, cfg.shaping.enabled) << '\n' << std::flush;
      if (!csv) throw Error("write failed for '" + result.csv_path.string() + "'");
      if (hook) hook(plan.seed, rec);
    };
    result.log = train(cfg, plan.seed, on_episode);
    result.log.config_hash = hash;
    write_meta(dir / (plan.stem + ".meta"), cfg, result.log);
    result.ok = true;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

}  // namespace

std::string run_stem(Algorithm algo, bool shaping, std::uint64_t seed) {
  return std::string(algorithm_name(algo)) + (shaping ? "_on_" : "_off_") + std::to_string(seed);
}

std::string csv_row(const EpisodeRecord& rec, std::uint64_t seed, std::string_view algo,
                    bool shaping) {
  std::string row = std::to_string(rec.episode);
  row += ',';
  row += format_double(rec.reward);
  row += ',';
  row += std::to_string(rec.steps);
  row += ',';
  row += envsim::terminal_name(rec.terminal);
  row += ',';
  row += std::to_string(seed);
  row += ',';
  row += algo;
  row += ',';
  row += shaping ? "on" : "off";
  return row;
}

EpisodeLog parse_csv(std::string_view text, std::string_view source) {
  EpisodeLog log;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const std::string line(
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    start = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (line != kCsvHeader) throw ConfigError(where + "unexpected CSV header '" + line + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 7) {
      throw ConfigError(where + "expected 7 columns, got " + std::to_string(cols.size()));
    }
    try {
      EpisodeRecord rec;
      rec.episode = std::stoi(cols[0]);
      const auto [ptr, ec] =
          std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), rec.reward);
      if (ec != std::errc{} || ptr != cols[1].data() + cols[1].size()) {
        throw ConfigError("bad reward '" + cols[1] + "'");
      }
      rec.steps = std::stoi(cols[2]);
      rec.terminal = envsim::parse_terminal(cols[3]);
      const std::uint64_t seed = std::stoull(cols[4]);
      const bool shaping = cols[6] == "on";
      if (!shaping && cols[6] != "off") throw ConfigError("bad shaping flag '" + cols[6] + "'");
      if (cols[5] != "ddpg" && cols[5] != "ppo") {
        throw ConfigError("bad algorithm '" + cols[5] + "'");
      }
      if (log.episodes.empty()) {
        log.seed = seed;
        log.algorithm = cols[5];
        log.shaping = shaping;
      } else if (seed != log.seed || cols[5] != log.algorithm || shaping != log.shaping) {
        throw ConfigError("run columns change mid-file");
      }
      log.episodes.push_back(rec);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const std::exception& e) {
      throw ConfigError(where + "malformed row: " + e.what());
    }
  }
  if (!header_seen) throw ConfigError(std::string(source) + ": empty CSV");
  return log;
}

EpisodeLog read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

EpisodeLog train(const ExperimentConfig& cfg, std::uint64_t seed,
                 const EpisodeCallback& on_episode) {
  EpisodeLog log = cfg.algorithm == Algorithm::ddpg
                       ? ddpg::train_ddpg(cfg.world, effective_ddpg(cfg), cfg.shaping,
                                          cfg.episodes, seed, on_episode)
                       : ppo::train_ppo(cfg.world, effective_ppo(cfg), cfg.shaping, cfg.episodes,
                                        seed, on_episode);
  log.config_hash = config_hash(cfg);
  return log;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const ProgressHook& hook) {
  validate(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  const auto plans = plan_runs(cfg);
  const std::string hash = config_hash(cfg);
  std::vector<RunResult> results(plans.size());

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), plans.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < plans.size(); ++i) results[i] = execute_run(cfg, plans[i], hash, hook);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::mutex hook_mutex;
  const ProgressHook locked_hook = [&](std::uint64_t seed, const EpisodeRecord& rec) {
    if (!hook) return;
    std::lock_guard lock(hook_mutex);
    hook(seed, rec);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < plans.size(); i = next++) {
        results[i] = execute_run(cfg, plans[i], hash, locked_hook);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace lyapnav::harness
