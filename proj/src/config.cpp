#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "lyapnav/error.hpp"
#include "lyapnav/harness.hpp"

namespace lyapnav::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_real(std::string_view v) {
  v = trim(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("expected a number, got '" + std::string(v) + "'");
  }
  return x;
}

template <class Int>
Int parse_int(std::string_view v) {
  v = trim(v);
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  }
  return x;
}

bool parse_bool(std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("expected true/false/on/off, got '" + std::string(v) + "'");
}

std::vector<double> parse_reals(std::string_view v, std::size_t expected) {
  std::vector<double> out;
  std::istringstream in{std::string(v)};
  std::string tok;
  while (in >> tok) out.push_back(parse_real(tok));
  if (out.size() != expected) {
    throw ConfigError("expected " + std::to_string(expected) + " numbers, got '" +
                      std::string(trim(v)) + "'");
  }
  return out;
}

std::vector<std::size_t> parse_sizes(std::string_view v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  for (auto part : split(v, ',')) out.push_back(parse_int<std::size_t>(part));
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string fmt(double x) { return format_double(x); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }
std::string fmt_vec2(envsim::Vec2 p) { return fmt(p.x) + " " + fmt(p.y); }

struct Field {
  std::string key;
  std::string description;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define LYAPNAV_REAL(KEY, MEMBER, DESC)                                                  \
  Field {                                                                                \
    KEY, DESC, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_real(v); }, \
        [](const ExperimentConfig& c) { return fmt(c.MEMBER); }                          \
  }
#define LYAPNAV_INT(KEY, MEMBER, TYPE, DESC)                                       \
  Field {                                                                          \
    KEY, DESC,                                                                     \
        [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_int<TYPE>(v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }         \
  }
#define LYAPNAV_BOOL(KEY, MEMBER, DESC)                                                  \
  Field {                                                                                \
    KEY, DESC, [](ExperimentConfig& c, std::string_view v) { c.MEMBER = parse_bool(v); }, \
        [](const ExperimentConfig& c) { return fmt_bool(c.MEMBER); }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"algorithm", "ddpg | ppo",
            [](ExperimentConfig& c, std::string_view v) {
              v = trim(v);
              if (v == "ddpg") c.algorithm = Algorithm::ddpg;
              else if (v == "ppo") c.algorithm = Algorithm::ppo;
              else throw ConfigError("expected ddpg or ppo, got '" + std::string(v) + "'");
            },
            [](const ExperimentConfig& c) { return std::string(algorithm_name(c.algorithm)); }},
      LYAPNAV_INT("episodes", episodes, int, "training episodes per seed"),
      Field{"seeds", "comma-separated run seeds",
            [](ExperimentConfig& c, std::string_view v) {
              c.seeds.clear();
              if (trim(v).empty()) return;
              for (auto part : split(v, ',')) c.seeds.push_back(parse_int<std::uint64_t>(part));
            },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(c.seeds[i]);
              }
              return out;
            }},
      LYAPNAV_INT("jobs", jobs, int, "seeds trained concurrently"),
      Field{"output_dir", "directory for run CSVs and metadata",
            [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
            [](const ExperimentConfig& c) { return c.output_dir; }},
      Field{"gamma", "discount for shaping, TD targets and advantages",
            [](ExperimentConfig& c, std::string_view v) {
              c.shaping.gamma = parse_real(v);
              c.ddpg.gamma = c.shaping.gamma;
              c.ppo.gamma = c.shaping.gamma;
            },
            [](const ExperimentConfig& c) { return fmt(c.shaping.gamma); }},
      LYAPNAV_BOOL("shaping.enabled", shaping.enabled, "apply reward shaping"),
      LYAPNAV_REAL("shaping.eta", shaping.eta, "shaping weight, [0, 1]"),

      LYAPNAV_REAL("world.arena_half_extent", world.arena_half_extent, "meters"),
      Field{"world.obstacles", "'x y radius' triples separated by ';'",
            [](ExperimentConfig& c, std::string_view v) {
              c.world.obstacles.clear();
              if (trim(v).empty()) return;
              for (auto part : split(v, ';')) {
                const auto xyr = parse_reals(part, 3);
                c.world.obstacles.push_back({{xyr[0], xyr[1]}, xyr[2]});
              }
            },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.world.obstacles.size(); ++i) {
                const auto& o = c.world.obstacles[i];
                if (i) out += "; ";
                out += fmt(o.center.x) + " " + fmt(o.center.y) + " " + fmt(o.radius);
              }
              return out;
            }},
      Field{"world.goal", "'x y' in meters",
            [](ExperimentConfig& c, std::string_view v) {
              const auto xy = parse_reals(v, 2);
              c.world.goal = {xy[0], xy[1]};
            },
            [](const ExperimentConfig& c) { return fmt_vec2(c.world.goal); }},
      LYAPNAV_REAL("world.goal_radius", world.goal_radius, "meters"),
      LYAPNAV_REAL("world.robot_radius", world.robot_radius, "meters"),
      LYAPNAV_REAL("world.collision_distance", world.collision_distance,
                   "center-to-surface distance that counts as a collision"),
      Field{"world.spawn", "'x y' in meters",
            [](ExperimentConfig& c, std::string_view v) {
              const auto xy = parse_reals(v, 2);
              c.world.spawn = {xy[0], xy[1]};
            },
            [](const ExperimentConfig& c) { return fmt_vec2(c.world.spawn); }},
      LYAPNAV_REAL("world.spawn_heading", world.spawn_heading, "radians"),
      LYAPNAV_REAL("world.heading_jitter", world.heading_jitter,
                   "reset heading drawn from spawn_heading +- this, radians"),
      LYAPNAV_REAL("world.max_linear_velocity", world.max_linear_velocity, "m/s"),
      LYAPNAV_REAL("world.max_angular_velocity", world.max_angular_velocity, "rad/s"),
      LYAPNAV_REAL("world.lidar_max_range", world.lidar_max_range, "meters"),
      LYAPNAV_REAL("world.dt", world.dt, "seconds per step"),
      LYAPNAV_INT("world.max_steps_per_episode", world.max_steps_per_episode, int, "timeout"),
      LYAPNAV_REAL("reward.progress_scale", world.reward.progress_scale,
                   "reward per meter of progress toward the goal"),
      LYAPNAV_REAL("reward.step_penalty", world.reward.step_penalty, "subtracted every step"),
      LYAPNAV_REAL("reward.goal_bonus", world.reward.goal_bonus, "added on reaching the goal"),
      LYAPNAV_REAL("reward.collision_penalty", world.reward.collision_penalty,
                   "subtracted on collision"),

      Field{"ddpg.hidden_sizes", "comma-separated hidden widths (actor and critic)",
            [](ExperimentConfig& c, std::string_view v) { c.ddpg.hidden_sizes = parse_sizes(v); },
            [](const ExperimentConfig& c) { return join_sizes(c.ddpg.hidden_sizes); }},
      LYAPNAV_REAL("ddpg.actor_lr", ddpg.actor_optimizer.learning_rate, "Adam step size"),
      LYAPNAV_REAL("ddpg.critic_lr", ddpg.critic_optimizer.learning_rate, "Adam step size"),
      Field{"ddpg.beta1", "Adam beta1 (actor and critic)",
            [](ExperimentConfig& c, std::string_view v) {
              c.ddpg.actor_optimizer.beta1 = c.ddpg.critic_optimizer.beta1 = parse_real(v);
            },
            [](const ExperimentConfig& c) { return fmt(c.ddpg.actor_optimizer.beta1); }},
      Field{"ddpg.beta2", "Adam beta2 (actor and critic)",
            [](ExperimentConfig& c, std::string_view v) {
              c.ddpg.actor_optimizer.beta2 = c.ddpg.critic_optimizer.beta2 = parse_real(v);
            },
            [](const ExperimentConfig& c) { return fmt(c.ddpg.actor_optimizer.beta2); }},
      LYAPNAV_REAL("ddpg.tau", ddpg.tau, "target blending factor per update"),
      LYAPNAV_REAL("ddpg.noise_scale", ddpg.noise_scale,
                   "exploration noise std, fraction of the action half-range"),
      LYAPNAV_INT("ddpg.batch_size", ddpg.batch_size, std::size_t, "minibatch size"),
      LYAPNAV_INT("ddpg.buffer_capacity", ddpg.buffer_capacity, std::size_t, "replay capacity"),
      LYAPNAV_INT("ddpg.warmup", ddpg.warmup, std::size_t, "transitions stored before updates"),

      Field{"ppo.hidden_sizes", "comma-separated hidden widths (policy and value)",
            [](ExperimentConfig& c, std::string_view v) { c.ppo.hidden_sizes = parse_sizes(v); },
            [](const ExperimentConfig& c) { return join_sizes(c.ppo.hidden_sizes); }},
      LYAPNAV_INT("ppo.horizon", ppo.horizon, std::size_t, "T, steps per segment"),
      LYAPNAV_INT("ppo.parallel_segments", ppo.parallel_segments, std::size_t,
                  "N, segments per collection"),
      LYAPNAV_INT("ppo.epochs", ppo.epochs, std::size_t, "K"),
      LYAPNAV_INT("ppo.minibatch_size", ppo.minibatch_size, std::size_t, "M <= N * T"),
      LYAPNAV_REAL("ppo.clip_epsilon", ppo.clip_epsilon, "ratio clip half-width"),
      LYAPNAV_REAL("ppo.value_coeff", ppo.value_coeff, "weight of the value MSE"),
      LYAPNAV_REAL("ppo.entropy_coeff", ppo.entropy_coeff, "weight of the entropy bonus"),
      LYAPNAV_REAL("ppo.initial_log_std", ppo.initial_log_std, "in [-5, 2]"),
      LYAPNAV_BOOL("ppo.normalize_advantages", ppo.normalize_advantages,
                   "standardize advantages per batch"),
      LYAPNAV_REAL("ppo.policy_lr", ppo.policy_optimizer.learning_rate, "Adam step size"),
      LYAPNAV_REAL("ppo.value_lr", ppo.value_optimizer.learning_rate, "Adam step size"),
      Field{"ppo.beta1", "Adam beta1 (policy and value)",
            [](ExperimentConfig& c, std::string_view v) {
              c.ppo.policy_optimizer.beta1 = c.ppo.value_optimizer.beta1 = parse_real(v);
            },
            [](const ExperimentConfig& c) { return fmt(c.ppo.policy_optimizer.beta1); }},
      Field{"ppo.beta2", "Adam beta2 (policy and value)",
            [](ExperimentConfig& c, std::string_view v) {
              c.ppo.policy_optimizer.beta2 = c.ppo.value_optimizer.beta2 = parse_real(v);
            },
            [](const ExperimentConfig& c) { return fmt(c.ppo.policy_optimizer.beta2); }},
  };
  return table;
}

#undef LYAPNAV_REAL
#undef LYAPNAV_INT
#undef LYAPNAV_BOOL

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) noexcept {
  return a == Algorithm::ddpg ? "ddpg" : "ppo";
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

const std::vector<ConfigKey>& config_reference() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    const ExperimentConfig defaults;
    for (const auto& f : fields()) out.push_back({f.key, f.get(defaults), f.description});
    return out;
  }();
  return keys;
}

void validate(const ExperimentConfig& cfg) {
  shaping::validate(cfg.shaping);
  if (cfg.episodes < 0) throw ConfigError("episodes must be >= 0");
  if (cfg.seeds.empty()) throw ConfigError("seeds must list at least one seed");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  envsim::validate(cfg.world);
  ddpg::validate(effective_ddpg(cfg));
  ppo::validate(effective_ppo(cfg));
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'key = value', got '" + std::string(line) + "'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    if (field == nullptr) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    try {
      field->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + std::string(key) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ddpg::DdpgConfig effective_ddpg(const ExperimentConfig& cfg) {
  ddpg::DdpgConfig d = cfg.ddpg;
  d.gamma = cfg.shaping.gamma;
  return d;
}

ppo::PpoConfig effective_ppo(const ExperimentConfig& cfg) {
  ppo::PpoConfig p = cfg.ppo;
  p.gamma = cfg.shaping.gamma;
  return p;
}

}  // namespace lyapnav::harness
