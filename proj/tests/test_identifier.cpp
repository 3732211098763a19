#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "slmc/channel_sim.hpp"
#include "slmc/errors.hpp"
#include "slmc/identifier.hpp"

using namespace slmc;

namespace {

IdentifierConfig config(std::size_t n, std::size_t window, double theta, double discount)
{
  IdentifierConfig cfg;
  cfg.num_states = n;
  cfg.window_len = window;
  cfg.conflict_threshold = theta;
  cfg.discount_prev = {discount};
  cfg.discount_new = {discount};
  cfg.validate();
  return cfg;
}

WindowStats stats_from(std::vector<std::vector<std::uint64_t>> counts, std::size_t index = 0)
{
  WindowStats s;
  s.num_states = counts.size();
  for (const auto& row : counts)
  {
    s.counts.insert(s.counts.end(), row.begin(), row.end());
  }
  s.window_index = index;
  s.last_state = 1;
  return s;
}

double max_diff(const Opinion& a, const Opinion& b)
{
  double d = std::abs(a.uncertainty() - b.uncertainty());
  for (std::size_t x = 0; x < a.size(); ++x)
  {
    d = std::max(d, std::abs(a.belief()[x] - b.belief()[x]));
  }
  return d;
}

std::vector<StateId> constant_chain(const TransitionMatrix& m, std::size_t packets, std::uint64_t seed)
{
  ScenarioSpec spec;
  spec.num_states = m.size();
  spec.total_packets = packets;
  spec.seed = seed;
  spec.segments.push_back({0, ConstantSegment{m}});
  return generate(spec).states;
}

const TransitionMatrix two_state{{{0.9, 0.1}, {0.4, 0.6}}};

} // namespace

TEST_CASE("config validation")
{
  auto cfg = IdentifierConfig::defaults(3);
  CHECK(cfg.window_len == 100);
  CHECK(cfg.prior_weight == 2.0);
  CHECK(cfg.conflict_threshold == 0.15);
  CHECK(cfg.discount_prev == std::vector<double>(3, 0.999));
  CHECK(cfg.base_rates.size() == 3);

  IdentifierConfig bad;
  bad.num_states = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = IdentifierConfig{};
  bad.conflict_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = IdentifierConfig{};
  bad.discount_new = {0.5, 1.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = IdentifierConfig{};
  bad.base_rates = {{0.5, 0.6}, {0.5, 0.5}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = IdentifierConfig{};
  bad.window_len = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("count_transitions")
{
  SUBCASE("no carry")
  {
    const std::vector<StateId> w{1, 1, 2, 1};
    const auto s = count_transitions(w, 2, std::nullopt);
    CHECK(s.counts == std::vector<std::uint64_t>{1, 1, 1, 0});
    CHECK(s.total() == 3);
    CHECK(s.last_state == 1);
  }
  SUBCASE("carry")
  {
    const std::vector<StateId> w{1, 1};
    const auto s = count_transitions(w, 2, StateId{2});
    CHECK(s.counts == std::vector<std::uint64_t>{1, 0, 1, 0});
    CHECK(s.total() == 2);
  }
  SUBCASE("out of range")
  {
    const std::vector<StateId> w{1, 3};
    CHECK_THROWS_AS(count_transitions(w, 2, std::nullopt, 7), ObservationError);
    const std::vector<StateId> z{0, 1};
    CHECK_THROWS_AS(count_transitions(z, 2, std::nullopt), ObservationError);
    try
    {
      count_transitions(w, 2, std::nullopt, 7);
    }
    catch (const ObservationError& e)
    {
      CHECK(e.window_index() == 7);
    }
  }
  SUBCASE("matches a brute-force pair counter")
  {
    const TransitionMatrix m{{{0.2, 0.5, 0.3}, {0.6, 0.1, 0.3}, {0.3, 0.3, 0.4}}};
    const auto states = constant_chain(m, 100, 99);
    std::map<std::pair<StateId, StateId>, std::uint64_t> pairs;
    for (std::size_t k = 1; k < states.size(); ++k)
    {
      ++pairs[{states[k - 1], states[k]}];
    }
    const auto s = count_transitions(states, 3, std::nullopt);
    for (StateId i = 1; i <= 3; ++i)
    {
      for (StateId j = 1; j <= 3; ++j)
      {
        CHECK(s.count(i - 1, j - 1) == pairs[{i, j}]);
      }
    }
  }
}

TEST_CASE("accumulate_window pulls exactly one window")
{
  const std::vector<StateId> states{1, 2, 2, 1, 1, 2, 1};
  SpanSource source{states};
  auto cfg = config(2, 3, 0.15, 1.0);
  const auto w0 = accumulate_window(source, cfg, std::nullopt, 0);
  REQUIRE(w0);
  CHECK(w0->total() == 2);
  const auto w1 = accumulate_window(source, cfg, w0->last_state, 1);
  REQUIRE(w1);
  CHECK(w1->total() == 3);
  CHECK(source.consumed() == 6);
  CHECK_FALSE(accumulate_window(source, cfg, w1->last_state, 2));
}

TEST_CASE("window_opinions")
{
  const auto cfg = config(2, 100, 0.15, 1.0);
  const auto ops = window_opinions(stats_from({{0, 0}, {90, 10}}), cfg);
  CHECK(ops.rows[0].is_vacuous());
  CHECK(std::abs(ops.rows[1].belief(0) - 90.0 / 102.0) < 1e-15);
  CHECK(std::abs(ops.rows[1].belief(1) - 10.0 / 102.0) < 1e-15);
  CHECK(std::abs(ops.rows[1].uncertainty() - 2.0 / 102.0) < 1e-15);

  const auto eight_two = window_opinions(stats_from({{8, 2}, {1, 1}}), cfg);
  CHECK(std::abs(eight_two.rows[0].belief(0) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(eight_two.rows[0].uncertainty() - 1.0 / 6.0) < 1e-15);
}

TEST_CASE("step")
{
  SUBCASE("first window projects the window opinions")
  {
    // (s_ij + a_j W) / (sum_l s_il + W) with W = 2, a = 1/2.
    const auto out = step(std::nullopt, stats_from({{8, 2}, {1, 9}}), config(2, 100, 0.15, 1.0));
    CHECK(std::abs(out.transition(0, 0) - 9.0 / 12.0) < 1e-12);
    CHECK(std::abs(out.transition(0, 1) - 3.0 / 12.0) < 1e-12);
    CHECK(std::abs(out.transition(1, 0) - 2.0 / 12.0) < 1e-12);
    CHECK(std::abs(out.transition(1, 1) - 10.0 / 12.0) < 1e-12);
    CHECK(out.reset_rows.empty());
    CHECK(out.conflicts == std::vector<double>{0.0, 0.0});
  }

  SUBCASE("first window is discounted like any other window")
  {
    // b' = 0.9 b, u' = 1 - 0.9 (1 - u) for b = (8, 2)/12, u = 2/12.
    const auto out = step(std::nullopt, stats_from({{8, 2}, {1, 9}}), config(2, 100, 0.15, 0.9));
    const double u = 1.0 - 0.9 * (10.0 / 12.0);
    CHECK(std::abs(out.opinions.rows[0].uncertainty() - u) < 1e-12);
    CHECK(std::abs(out.transition(0, 0) - (0.9 * 8.0 / 12.0 + 0.5 * u)) < 1e-12);
  }

  SUBCASE("identical windows fuse and reduce uncertainty")
  {
    const auto cfg = config(2, 100, 0.15, 1.0);
    const auto stats = stats_from({{80, 20}, {30, 70}});
    const auto first = step(std::nullopt, stats, cfg);
    const auto second = step(first.opinions, stats, cfg);
    CHECK(second.reset_rows.empty());
    for (std::size_t i = 0; i < 2; ++i)
    {
      CHECK(second.conflicts[i] == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(second.opinions.rows[i].uncertainty() < first.opinions.rows[i].uncertainty());
    }
  }

  SUBCASE("strong conflict resets the row")
  {
    const std::vector<double> half{0.5, 0.5};
    OpinionMatrix prev{{Opinion{{0.98, 0.0}, 0.02, half}, Opinion{{0.29, 0.69}, 0.02, half}}};
    // Row 0 window: counts (69, 29) project to (0.70, 0.30) with u = 0.02.
    const auto out = step(prev, stats_from({{69, 29}, {29, 69}}), config(2, 100, 0.1, 1.0));
    CHECK(std::abs(out.conflicts[0] - 0.5 * 0.58 * 0.98 * 0.98) < 1e-12);
    CHECK(out.reset_rows.count(0) == 1);
    CHECK(out.reset_rows.count(1) == 0);
    CHECK(std::abs(out.transition(0, 0) - 0.70) < 1e-12);
    CHECK(std::abs(out.opinions.rows[0].uncertainty() - 0.02) < 1e-12);
  }

  SUBCASE("vacuous rows pass the other operand through")
  {
    const auto cfg = config(2, 100, 0.15, 1.0);
    const auto first = step(std::nullopt, stats_from({{10, 5}, {0, 0}}), cfg);
    const auto second = step(first.opinions, stats_from({{0, 0}, {3, 4}}), cfg);
    CHECK(second.reset_rows.empty());
    CHECK(max_diff(second.opinions.rows[0], first.opinions.rows[0]) == 0.0);
    CHECK(std::abs(second.opinions.rows[1].uncertainty() - 2.0 / 9.0) < 1e-15);
  }

  SUBCASE("cardinality mismatch")
  {
    const auto cfg = config(2, 100, 0.15, 1.0);
    const auto three = step(std::nullopt, stats_from({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), config(3, 100, 0.15, 1.0));
    CHECK_THROWS_AS(step(three.opinions, stats_from({{1, 1}, {1, 1}}), cfg), ConfigError);
    CHECK_THROWS_AS(step(std::nullopt, stats_from({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}), cfg), ConfigError);
  }
}

TEST_CASE("run")
{
  const auto states = constant_chain(two_state, 1000, 5);

  SUBCASE("one output per complete window")
  {
    CHECK(run(states, config(2, 100, 0.15, 0.999)).size() == 10);
    const std::vector<StateId> partial(states.begin(), states.begin() + 950);
    CHECK(run(partial, config(2, 100, 0.15, 0.999)).size() == 9);
  }

  SUBCASE("deterministic")
  {
    const auto a = run(states, IdentifierConfig::defaults(2));
    const auto b = run(states, IdentifierConfig::defaults(2));
    REQUIRE(a.size() == b.size());
    for (std::size_t w = 0; w < a.size(); ++w)
    {
      CHECK(a[w].transition == b[w].transition);
      CHECK(a[w].reset_rows == b[w].reset_rows);
    }
  }

  SUBCASE("observation errors carry the window index")
  {
    auto bad = states;
    bad[523] = 5;
    try
    {
      run(bad, IdentifierConfig::defaults(2));
      FAIL("expected an ObservationError");
    }
    catch (const ObservationError& e)
    {
      CHECK(e.window_index() == 5);
    }
  }

  SUBCASE("window boundaries keep every transition")
  {
    const auto outs = run(states, config(2, 100, never_reset, 1.0));
    std::uint64_t total = 0;
    for (const auto& o : outs)
    {
      total += o.stats.total();
    }
    CHECK(total == states.size() - 1);
  }
}

TEST_CASE("identifier-level properties")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u})
  {
    const auto states = constant_chain(two_state, 5000, seed);

    // Every output is row-stochastic and equals the projection of its opinions.
    for (const auto& out : run(states, IdentifierConfig::defaults(2)))
    {
      const auto proj = out.opinions.project();
      for (std::size_t i = 0; i < 2; ++i)
      {
        CHECK(std::abs(out.transition(i, 0) + out.transition(i, 1) - 1.0) < 1e-9);
        for (std::size_t j = 0; j < 2; ++j)
        {
          CHECK(std::abs(out.transition(i, j) - proj(i, j)) <= 1e-12);
        }
      }
    }

    // Never resetting with unit discounts pools all evidence.
    {
      const auto cfg = config(2, 100, never_reset, 1.0);
      const auto outs = run(states, cfg);
      std::vector<double> pooled(4, 0.0);
      for (const auto& out : outs)
      {
        for (std::size_t k = 0; k < 4; ++k)
        {
          pooled[k] += static_cast<double>(out.stats.counts[k]);
        }
        for (std::size_t i = 0; i < 2; ++i)
        {
          const auto oracle =
            opinion_from_evidence(EvidenceVector{{pooled[2 * i], pooled[2 * i + 1]}, 2.0, {0.5, 0.5}});
          CHECK(max_diff(out.opinions.rows[i], oracle) < 1e-9);
        }
      }
    }

    // With unit discounts, u only grows at resets; it strictly drops at fusions.
    {
      const auto outs = run(states, config(2, 100, 0.15, 1.0));
      for (std::size_t w = 1; w < outs.size(); ++w)
      {
        for (std::size_t i = 0; i < 2; ++i)
        {
          if (outs[w].reset_rows.count(i) == 0)
          {
            CHECK(outs[w].opinions.rows[i].uncertainty() < outs[w - 1].opinions.rows[i].uncertainty());
          }
        }
      }
    }

    // A vanishing threshold turns the identifier into a per-window estimator.
    {
      const auto cfg = config(2, 100, 1e-300, 0.95);
      const auto outs = run(states, cfg);
      for (const auto& out : outs)
      {
        const auto window = window_opinions(out.stats, cfg);
        for (std::size_t i = 0; i < 2; ++i)
        {
          if (out.stats.window_index > 0 && out.conflicts[i] > 0.0)
          {
            CHECK(max_diff(out.opinions.rows[i], trust_discount(window.rows[i], 0.95)) == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("no resets on a constant chain with large windows")
{
  const auto states = constant_chain(two_state, 200'000, 11);
  auto cfg = IdentifierConfig::defaults(2);
  cfg.window_len = 2000;
  for (const auto& out : run(states, cfg))
  {
    CHECK(out.reset_rows.empty());
  }
}

TEST_CASE("an abrupt jump is flagged within two windows")
{
  ScenarioSpec spec;
  spec.num_states = 2;
  spec.total_packets = 20'000;
  spec.seed = 3;
  spec.segments.push_back({0, ConstantSegment{TransitionMatrix{{{0.9, 0.1}, {0.5, 0.5}}}}});
  spec.segments.push_back({10'037, ConstantSegment{TransitionMatrix{{{0.5, 0.5}, {0.5, 0.5}}}}});
  const auto outs = run(generate(spec).states, IdentifierConfig::defaults(2));
  const std::size_t jump_window = 10'037 / 100;
  bool flagged = false;
  for (std::size_t w = jump_window; w <= jump_window + 2; ++w)
  {
    flagged = flagged || outs[w].reset_rows.count(0) == 1;
  }
  CHECK(flagged);
}

TEST_CASE("classical_estimate")
{
  const auto a = classical_estimate(stats_from({{90, 10}, {5, 5}}));
  CHECK(a.transition == TransitionMatrix{{{0.9, 0.1}, {0.5, 0.5}}});
  CHECK(a.empty_rows == std::vector<bool>{false, false});

  const auto b = classical_estimate(stats_from({{0, 0}, {1, 9}}));
  CHECK(b.transition(0, 0) == 0.5);
  CHECK(b.transition(0, 1) == 0.5);
  CHECK(b.empty_rows == std::vector<bool>{true, false});

  const auto c = classical_estimate(stats_from({{8, 2}, {1, 9}}));
  CHECK(c.transition == TransitionMatrix{{{0.8, 0.2}, {0.1, 0.9}}});
}
