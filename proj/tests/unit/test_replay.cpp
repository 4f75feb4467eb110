#include <doctest.h>

#include <cmath>
#include <map>
#include <thread>

#include "goalcraft/env.hpp"
#include "goalcraft/error.hpp"
#include "goalcraft/replay.hpp"
#include "goalcraft/rng.hpp"

using namespace goalcraft;

namespace {

// Positions p0..pn along y = 0 with unit-free spacing, behaviour goal fixed.
Episode line_episode(const std::vector<double>& xs, Goal goal, const EnvConfig& env) {
  Episode ep;
  for (std::size_t t = 0; t + 1 < xs.size(); ++t) {
    EnvState s{{xs[t], 0.0}, {}};
    EnvState n{{xs[t + 1], 0.0}, {}};
    ep.steps.push_back(Transition{s, {0.0, 0.0}, reward(env, n, goal), n, goal, n.pos,
                                  static_cast<int>(t)});
  }
  return ep;
}

}  // namespace

TEST_SUITE("replay") {
  TEST_CASE("hand-enumerated 3-step episode") {
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(4);
    buf.store_episode(line_episode({0.0, 0.1, 0.2, 0.3}, {0.9, 0.9}, env));
    Rng rng(1);
    auto batch = sample_batch(buf, 20000, {HerStrategy::future, 4.0}, env, rng);
    const std::vector<Goal> p_next{{0.1, 0.0}, {0.2, 0.0}, {0.3, 0.0}};
    bool saw_0_2 = false;
    for (const auto& st : batch) {
      const int t = st.tr.t;
      if (!st.relabeled) {
        CHECK(st.tr.g == Goal{0.9, 0.9});
        CHECK(st.tr.r == -1.0);
        continue;
      }
      CHECK(st.future_index >= static_cast<std::size_t>(t));
      CHECK(st.future_index < 3);
      CHECK(st.tr.g == p_next[st.future_index]);
      CHECK(st.tr.r == reward(env, st.tr.s_next, st.tr.g));
      if (st.future_index == static_cast<std::size_t>(t)) CHECK(st.tr.r == 0.0);
      if (t == 0 && st.future_index == 2) {
        // |(0.1, 0) - (0.3, 0)| = 0.2 > 0.05
        CHECK(st.tr.g == Goal{0.3, 0.0});
        CHECK(st.tr.r == -1.0);
        saw_0_2 = true;
      }
    }
    CHECK(saw_0_2);
  }

  TEST_CASE("relabel fraction") {
    CHECK(relabel_fraction_estimate(0.0) == 0.0);
    CHECK(relabel_fraction_estimate(4.0) == doctest::Approx(0.8));
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(10);
    Rng ep_rng(2);
    for (int e = 0; e < 5; ++e) {
      std::vector<double> xs;
      for (int t = 0; t <= 10; ++t) xs.push_back(ep_rng.uniform());
      buf.store_episode(line_episode(xs, {0.5, 0.5}, env));
    }
    Rng rng(3);
    auto batch = sample_batch(buf, 100000, {HerStrategy::future, 4.0}, env, rng);
    double relabeled = 0;
    for (const auto& s : batch) relabeled += s.relabeled;
    CHECK(std::abs(relabeled / 1e5 - 0.8) <= 0.01);
  }

  TEST_CASE("her off is a pure subsample") {
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(3);
    buf.store_episode(line_episode({0.1, 0.2, 0.3}, {0.7, 0.1}, env));
    buf.store_episode(line_episode({0.5, 0.6, 0.7}, {0.2, 0.8}, env));
    Rng rng(4);
    for (const auto& s : sample_batch(buf, 500, {HerStrategy::off, 4.0}, env, rng)) {
      CHECK_FALSE(s.relabeled);
      CHECK(s.tr == buf.episode(s.episode_index).steps[static_cast<std::size_t>(s.tr.t)]);
    }
  }

  TEST_CASE("sampling is uniform over (episode, step) pairs") {
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(10);
    for (int e = 0; e < 10; ++e) {
      buf.store_episode(line_episode({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {0.1 * e, 0.5}, env));
    }
    Rng rng(5);
    std::map<std::pair<std::size_t, int>, int> counts;
    const int n = 100000;
    for (const auto& s : sample_batch(buf, n, {HerStrategy::future, 4.0}, env, rng)) {
      counts[{s.episode_index, s.tr.t}]++;
    }
    REQUIRE(counts.size() == 50);
    const double expected = n / 50.0;
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    // chi-square critical value, 49 degrees of freedom, p = 0.001
    CHECK(chi2 < 85.35);
  }

  TEST_CASE("ring semantics") {
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(2);
    for (double g : {1.0, 2.0, 3.0}) buf.store_episode(line_episode({0.1, 0.2}, {g / 10, 0.5}, env));
    CHECK(buf.size() == 2);
    CHECK(buf.total_stored() == 3);
    CHECK(buf.episode(0).steps[0].g.x == doctest::Approx(0.2));
    CHECK(buf.episode(1).steps[0].g.x == doctest::Approx(0.3));
  }

  TEST_CASE("malformed episodes are rejected") {
    const EnvConfig env = EnvConfig::point_reach();
    ReplayBuffer buf(4);
    Episode broken = line_episode({0.1, 0.2, 0.3}, {0.5, 0.5}, env);
    broken.steps[1].s.pos.x = 0.25;
    CHECK_THROWS_AS(buf.store_episode(broken), ContractError);
    Episode drifting = line_episode({0.1, 0.2, 0.3}, {0.5, 0.5}, env);
    drifting.steps[1].g = {0.6, 0.5};
    CHECK_THROWS_AS(buf.store_episode(drifting), ContractError);
    CHECK_THROWS_AS(buf.store_episode(Episode{}), ContractError);
    buf.store_episode(line_episode({0.1, 0.2, 0.3}, {0.5, 0.5}, env));
    CHECK_THROWS_AS(buf.store_episode(line_episode({0.1, 0.2}, {0.5, 0.5}, env)), ContractError);
    Rng rng(6);
    CHECK_THROWS_AS(sample_batch(ReplayBuffer(2), 4, {}, env, rng), ContractError);
  }

  TEST_CASE("episode queue hands over every episode") {
    const EnvConfig env = EnvConfig::point_reach();
    EpisodeQueue q;
    {
      std::vector<std::jthread> producers;
      for (int w = 0; w < 4; ++w) {
        producers.emplace_back([&] {
          for (int i = 0; i < 25; ++i) q.push(line_episode({0.1, 0.2}, {0.5, 0.5}, env));
        });
      }
    }
    int n = 0;
    while (q.try_pop()) ++n;
    CHECK(n == 100);
  }
}
