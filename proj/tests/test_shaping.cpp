#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lyapnav/error.hpp"
#include "lyapnav/shaping.hpp"
#include "lyapnav/tabular.hpp"
#include "support/oracles.hpp"

using namespace lyapnav;
using namespace lyapnav::shaping;

TEST_CASE("shape_reward hand values") {
  const ShapingConfig cfg{0.4, 0.99, true};
  CHECK(shape_reward(2.0, 3.0, cfg) == 2.0 + 0.4 * (0.99 * 3.0 - 2.0));
  CHECK(shape_reward(2.0, 3.0, cfg) == doctest::Approx(2.388).epsilon(1e-15));

  SUBCASE("eta = 0 passes the current reward through") {
    const ShapingConfig off{0.0, 0.99, true};
    for (double next : {-7.0, 0.0, 1e6}) CHECK(shape_reward(1.25, next, off) == 1.25);
  }
  SUBCASE("eta = 1 keeps only the discounted successor") {
    const ShapingConfig full{1.0, 0.9, true};
    CHECK(shape_reward(5.0, 2.0, full) == doctest::Approx(1.8));
  }
  SUBCASE("non-finite inputs") {
    CHECK_THROWS_AS(shape_reward(std::nan(""), 1.0, cfg), NumericError);
    CHECK_THROWS_AS(shape_reward(1.0, std::numeric_limits<double>::infinity(), cfg), NumericError);
  }
}

TEST_CASE("shape_reward is linear") {
  const ShapingConfig cfg{0.4, 0.99, true};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng), y = u(rng), a = u(rng), x2 = u(rng), y2 = u(rng);
    CHECK(shape_reward(a * x, a * y, cfg) == doctest::Approx(a * shape_reward(x, y, cfg)));
    CHECK(shape_reward(x + x2, y + y2, cfg) ==
          doctest::Approx(shape_reward(x, y, cfg) + shape_reward(x2, y2, cfg)));
  }
}

TEST_CASE("validate names the offending key") {
  auto message = [](const ShapingConfig& cfg) {
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({1.5, 0.99, true}).find("shaping.eta") != std::string::npos);
  CHECK(message({-0.1, 0.99, true}).find("shaping.eta") != std::string::npos);
  CHECK(message({0.4, 0.0, true}).find("gamma") != std::string::npos);
  CHECK(message({0.4, 1.01, true}).find("gamma") != std::string::npos);
  CHECK(message({0.4, 1.0, true}).empty());
  CHECK(message({1.0, 0.5, false}).empty());
}

TEST_CASE("shape_trajectory") {
  const ShapingConfig cfg{0.4, 0.99, true};
  const std::vector<double> r{1, 2, 3};
  const auto s = shape_trajectory(r, cfg);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(1.392).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(2.388).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(1.8).epsilon(1e-15));
  for (std::size_t t = 0; t < 2; ++t) CHECK(s[t] == shape_reward(r[t], r[t + 1], cfg));
  CHECK(s[2] == shape_reward(r[2], 0.0, cfg));

  SUBCASE("disabled is the identity") {
    ShapingConfig off = cfg;
    off.enabled = false;
    const std::vector<double> x{3.5, -1e9, 0.0, 42.0};
    CHECK(shape_trajectory(x, off) == x);
  }
  SUBCASE("eta = 0 is the identity") {
    const std::vector<double> x{3.5, -2.0, 0.125};
    CHECK(shape_trajectory(x, {0.0, 0.99, true}) == x);
  }
  SUBCASE("constant rewards at gamma = 1 stay put") {
    const std::vector<double> x(6, 2.5);
    const auto y = shape_trajectory(x, {0.4, 1.0, true});
    for (std::size_t t = 0; t + 1 < y.size(); ++t) CHECK(y[t] == 2.5);
    CHECK(y.back() == doctest::Approx(1.5));
  }
  SUBCASE("single element") {
    const std::vector<double> x{10.0};
    CHECK(shape_trajectory(x, cfg)[0] == doctest::Approx(6.0));
  }
  CHECK_THROWS_AS(shape_trajectory(std::vector<double>{}, cfg), ConfigError);
}

TEST_CASE("shaped_td_target") {
  CHECK(shaped_td_target(1.0, 10.0, false, 0.99) == doctest::Approx(10.9));
  CHECK(shaped_td_target(5.0, 123.0, true, 0.99) == 5.0);
  CHECK(shaped_td_target(-2.0, 77.0, false, 0.0) == -2.0);
  CHECK_THROWS_AS(shaped_td_target(std::nan(""), 0.0, false, 0.99), NumericError);
}

TEST_CASE("shaped_advantages") {
  const std::vector<double> r{2.0};
  const std::vector<double> v{1.0, 3.0};
  CHECK(shaped_advantages(r, v, 0.9)[0] == doctest::Approx(3.7));

  const std::vector<double> zeros(8, 0.0);
  const std::vector<double> zero_values(9, 0.0);
  for (double a : shaped_advantages(zeros, zero_values, 0.99)) CHECK(a == 0.0);

  CHECK_THROWS_AS(shaped_advantages(r, std::vector<double>{1.0}, 0.9), DimensionError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> len(1, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = trial == 0 ? 5 : len(rng);
    std::vector<double> rewards(T), values(T + 1);
    for (auto& x : rewards) x = u(rng);
    for (auto& x : values) x = u(rng);
    const double gamma = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    const auto fast = shaped_advantages(rewards, values, gamma);
    const auto slow = testing::brute_force_advantages(rewards, values, gamma);
    for (int t = 0; t < T; ++t) CHECK(std::abs(fast[t] - slow[t]) <= 1e-10);
  }
}

TEST_CASE("tabular value iteration matches enumeration") {
  using namespace lyapnav::tabular;
  const ShapingConfig cfg{0.4, 0.99, true};

  SUBCASE("chain with a goal reward: shaping flips the state next to the goal") {
    const auto mdp = make_chain(5, 1.0, 0.0);
    const auto raw = value_iteration(mdp, cfg.gamma, 1e-12, 100000);
    const auto shaped = shaped_value_iteration(mdp, cfg, 1e-12, 100000);
    REQUIRE(raw.converged);
    REQUIRE(shaped.converged);
    CHECK(raw.greedy == testing::enumerated_greedy(mdp, cfg.gamma, 0.0));
    CHECK(shaped.greedy == testing::enumerated_greedy(mdp, cfg.gamma, cfg.eta));
    CHECK(raw.greedy == std::vector<std::size_t>{1, 1, 1, 1, 0});
    CHECK(shaped.greedy == std::vector<std::size_t>{1, 1, 1, 0, 0});
    // Stepping back and returning collects the goal reward with weight
    // gamma^2 instead of (1 - eta).
    CHECK(shaped.q[3 * 2 + 1] == doctest::Approx(0.6));
    CHECK(shaped.q[3 * 2 + 0] == doctest::Approx(cfg.gamma * cfg.gamma));
  }
  SUBCASE("chain with a uniform step cost keeps the raw policy") {
    const auto mdp = make_chain(5, -1.0, -1.0);
    const auto raw = value_iteration(mdp, cfg.gamma, 1e-12, 100000);
    const auto shaped = shaped_value_iteration(mdp, cfg, 1e-12, 100000);
    CHECK(raw.greedy == testing::enumerated_greedy(mdp, cfg.gamma, 0.0));
    CHECK(shaped.greedy == testing::enumerated_greedy(mdp, cfg.gamma, cfg.eta));
    CHECK(raw.greedy == shaped.greedy);
  }
  SUBCASE("eta = 0 reduces to plain value iteration") {
    const auto mdp = make_chain(5, 1.0, -0.1);
    const auto raw = value_iteration(mdp, 0.9, 1e-12, 100000);
    const auto shaped = shaped_value_iteration(mdp, {0.0, 0.9, true}, 1e-12, 100000);
    CHECK(raw.q == shaped.q);
  }
}
