#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lyapnav/error.hpp"
#include "lyapnav/harness.hpp"

namespace lyapnav::harness {
namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

SummaryRow pool(const std::string& label, std::vector<double> rewards, std::size_t runs) {
  if (rewards.empty()) throw UsageError("summary group '" + label + "' has no episodes");
  // Sorted summation makes the average independent of log order.
  std::sort(rewards.begin(), rewards.end());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  SummaryRow row;
  row.label = label;
  row.min_reward = rewards.front();
  row.max_reward = rewards.back();
  row.avg_reward = std::clamp(sum / static_cast<double>(rewards.size()), row.min_reward, row.max_reward);
  row.episodes = rewards.size();
  row.runs = runs;
  return row;
}

std::size_t order_rank(const std::string& label) {
  const auto& order = variant_order();
  const auto it = std::find(order.begin(), order.end(), label);
  return static_cast<std::size_t>(it - order.begin());
}

}  // namespace

std::string variant_label(std::string_view algo, bool shaping) {
  return upper(std::string(algo)) + (shaping ? " with shaping" : " w/o shaping");
}

const std::vector<std::string>& variant_order() {
  static const std::vector<std::string> order{
      variant_label("ddpg", false), variant_label("ppo", false), variant_label("ddpg", true),
      variant_label("ppo", true)};
  return order;
}

std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs,
                                  const std::vector<std::string>& labels) {
  if (logs.size() != labels.size()) throw DimensionError("summary labels", logs.size(), labels.size());
  if (logs.empty()) throw UsageError("summarize needs at least one log");
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> groups;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    auto& [rewards, runs] = groups[labels[i]];
    for (const auto& ep : logs[i].episodes) rewards.push_back(ep.reward);
    ++runs;
  }
  std::vector<SummaryRow> rows;
  for (auto& [label, group] : groups) rows.push_back(pool(label, std::move(group.first), group.second));
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    const auto ra = order_rank(a.label);
    const auto rb = order_rank(b.label);
    return ra != rb ? ra < rb : a.label < b.label;
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<EpisodeLog>& logs) {
  std::vector<std::string> labels;
  for (const auto& log : logs) labels.push_back(variant_label(log.algorithm, log.shaping));
  return summarize(logs, labels);
}

std::vector<SummaryRow> summarize_per_seed(const std::vector<EpisodeLog>& logs) {
  std::vector<std::string> labels;
  for (const auto& log : logs) {
    labels.push_back(variant_label(log.algorithm, log.shaping) + " seed " + std::to_string(log.seed));
  }
  auto rows = summarize(logs, labels);
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    const auto va = a.label.substr(0, a.label.find(" seed "));
    const auto vb = b.label.substr(0, b.label.find(" seed "));
    return order_rank(va) < order_rank(vb);
  });
  return rows;
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  std::size_t width = std::string_view("Variant").size();
  for (const auto& r : rows) width = std::max(width, r.label.size());
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s | %12s | %12s | %12s\n", static_cast<int>(width), "Variant",
                "Min", "Max", "Average");
  out << buf << std::string(width, '-') << "-+-" << std::string(12, '-') << "-+-"
      << std::string(12, '-') << "-+-" << std::string(12, '-') << "\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s | %12.2f | %12.2f | %12.2f\n", static_cast<int>(width),
                  r.label.c_str(), r.min_reward, r.max_reward, r.avg_reward);
    out << buf;
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "label,min_reward,max_reward,avg_reward,episodes,runs\n";
  for (const auto& r : rows) {
    out += r.label + "," + format_double(r.min_reward) + "," + format_double(r.max_reward) + "," +
           format_double(r.avg_reward) + "," + std::to_string(r.episodes) + "," +
           std::to_string(r.runs) + "\n";
  }
  return out;
}

std::vector<EpisodeLog> read_run_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<EpisodeLog> logs;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    std::string first;
    std::getline(in, first);
    if (first != kCsvHeader) continue;  // summary or curve outputs
    logs.push_back(read_csv(p));
  }
  return logs;
}

std::vector<double> learning_curve(const EpisodeLog& log, int window) {
  if (window < 1) throw ConfigError("curve window must be >= 1");
  if (log.episodes.empty()) throw UsageError("learning curve of an empty log");
  const std::size_t w = static_cast<std::size_t>(window);
  std::vector<double> out;
  out.reserve(log.episodes.size());
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const std::size_t first = i + 1 >= w ? i + 1 - w : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= i; ++k) sum += log.episodes[k].reward;
    out.push_back(sum / static_cast<double>(i + 1 - first));
  }
  return out;
}

std::string learning_curve_csv(const EpisodeLog& log, int window) {
  const auto curve = learning_curve(log, window);
  std::string out = "episode,smoothed_reward\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += std::to_string(log.episodes[i].episode) + "," + format_double(curve[i]) + "\n";
  }
  return out;
}

}  // namespace lyapnav::harness
