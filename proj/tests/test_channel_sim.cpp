#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "slmc/channel_sim.hpp"
#include "slmc/errors.hpp"
#include "slmc/identifier.hpp"

using namespace slmc;

namespace {

ScenarioSpec constant_spec(const TransitionMatrix& m, std::size_t packets, std::uint64_t seed, StateId initial = 1)
{
  ScenarioSpec spec;
  spec.num_states = m.size();
  spec.total_packets = packets;
  spec.seed = seed;
  spec.initial_state = initial;
  spec.segments.push_back({0, ConstantSegment{m}});
  return spec;
}

} // namespace

TEST_CASE("rng is pinned to mt19937_64 with 53-bit uniforms")
{
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  ChannelRng rng{5489u};
  double u = 0.0;
  for (int k = 0; k < 10000; ++k)
  {
    u = rng.uniform();
  }
  CHECK(u == static_cast<double>(9981545732273789042ull >> 11) * 0x1.0p-53);
}

TEST_CASE("step_chain")
{
  ChannelRng rng{1};
  SUBCASE("identity is absorbing")
  {
    const auto id = TransitionMatrix::identity(3);
    for (StateId s : {1u, 2u, 3u})
    {
      for (int k = 0; k < 100; ++k)
      {
        CHECK(step_chain(s, id, rng) == s);
      }
    }
  }
  SUBCASE("permutation alternates")
  {
    const TransitionMatrix flip{{{0.0, 1.0}, {1.0, 0.0}}};
    StateId s = 1;
    for (int k = 0; k < 100; ++k)
    {
      const StateId next = step_chain(s, flip, rng);
      CHECK(next != s);
      s = next;
    }
  }
  SUBCASE("empirical frequencies converge (3 sigma)")
  {
    const TransitionMatrix m{{{0.9, 0.1}, {0.5, 0.5}}};
    std::uint64_t counts[2][2] = {};
    StateId s = 1;
    for (int k = 0; k < 1'000'000; ++k)
    {
      const StateId next = step_chain(s, m, rng);
      ++counts[s - 1][next - 1];
      s = next;
    }
    for (std::size_t i = 0; i < 2; ++i)
    {
      const double n = static_cast<double>(counts[i][0] + counts[i][1]);
      const double p = m(i, 0);
      const double sigma = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(static_cast<double>(counts[i][0]) / n - p) < 3 * sigma);
    }
  }
}

TEST_CASE("generate")
{
  SUBCASE("identity chain stays put")
  {
    const auto trace = generate(constant_spec(TransitionMatrix::identity(2), 1000, 4));
    CHECK(trace.states.size() == 1000);
    for (auto s : trace.states)
    {
      CHECK(s == 1);
    }
  }
  SUBCASE("same seed, same trace; other seed, other trace")
  {
    const auto spec = builtin_scenario(42);
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.states == b.states);
    CHECK(generate(builtin_scenario(43)).states != a.states);
  }
  SUBCASE("invalid spec")
  {
    auto spec = constant_spec(TransitionMatrix::identity(2), 100, 1);
    spec.initial_state = 3;
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = constant_spec(TransitionMatrix::identity(2), 100, 1);
    spec.segments.push_back({0, ConstantSegment{TransitionMatrix::identity(2)}});
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = constant_spec(TransitionMatrix::identity(3), 100, 1);
    spec.num_states = 2;
    CHECK_THROWS_AS(generate(spec), ConfigError);
  }
}

TEST_CASE("built-in scenario")
{
  const auto spec = builtin_scenario();
  CHECK(spec.total_packets == 100'000);
  REQUIRE(spec.segments.size() == 3);
  CHECK(spec.segments[0].start == 0);
  CHECK(spec.segments[1].start == 19'081);
  CHECK(spec.segments[2].start == 30'851);
  CHECK(spec.matrix_at(1)(0, 0) == 0.90);
  CHECK(spec.jump_points() == std::vector<std::size_t>{19'081, 30'851});

  SUBCASE("jumps are at least 0.1 in p_GG")
  {
    for (auto j : spec.jump_points())
    {
      CHECK(std::abs(spec.matrix_at(j)(0, 0) - spec.matrix_at(j - 1)(0, 0)) >= 0.1);
    }
  }

  SUBCASE("drift endpoints and interpolation")
  {
    CHECK(spec.matrix_at(19'081)(0, 0) == doctest::Approx(0.65));
    CHECK(spec.matrix_at(30'850)(0, 0) == doctest::Approx(0.72));
    CHECK(spec.matrix_at(25'000)(0, 0) > 0.65);
    CHECK(spec.matrix_at(25'000)(0, 0) < 0.72);
  }

  SUBCASE("every effective matrix is row-stochastic")
  {
    for (std::size_t k = 1; k < spec.total_packets; k += 37)
    {
      const auto m = spec.matrix_at(k);
      for (std::size_t i = 0; i < 2; ++i)
      {
        CHECK(std::abs(m(i, 0) + m(i, 1) - 1.0) < 1e-9);
        CHECK((m(i, 0) >= 0.0 && m(i, 0) <= 1.0));
      }
    }
  }

  SUBCASE("classical estimates scatter with binomial spread")
  {
    // Standardized residuals (p_hat - p) / sqrt(p (1 - p) / n) should have unit variance.
    const auto trace = generate(builtin_scenario(7));
    IdentifierConfig cfg = IdentifierConfig::defaults(2);
    const auto outs = run(trace.states, cfg);
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& out : outs)
    {
      const double n = static_cast<double>(out.stats.row_total(0));
      const double p = spec.mean_matrix(out.stats.window_index * 100, out.stats.window_index * 100 + 100)(0, 0);
      const double z = (classical_estimate(out.stats).transition(0, 0) - p) / std::sqrt(p * (1 - p) / n);
      sum_sq += z * z;
      ++count;
    }
    const double sd = std::sqrt(sum_sq / static_cast<double>(count));
    CHECK(sd > 0.9);
    CHECK(sd < 1.1);
  }
}

TEST_CASE("mean_matrix skips packet 0")
{
  ScenarioSpec spec;
  spec.num_states = 2;
  spec.total_packets = 10;
  spec.segments.push_back({0, ConstantSegment{TransitionMatrix{{{1.0, 0.0}, {0.0, 1.0}}}}});
  spec.segments.push_back({5, ConstantSegment{TransitionMatrix{{{0.0, 1.0}, {1.0, 0.0}}}}});
  // Packets 1..4 old matrix, 5..9 new one.
  CHECK(spec.mean_matrix(0, 10)(0, 0) == doctest::Approx(4.0 / 9.0));
  CHECK(spec.mean_matrix(5, 10)(0, 0) == 0.0);
}

TEST_CASE("scenario JSON")
{
  SUBCASE("round trip")
  {
    const auto spec = builtin_scenario(9);
    const auto back = parse_scenario(scenario_to_json(spec));
    CHECK(back.seed == 9);
    CHECK(back.total_packets == spec.total_packets);
    CHECK(generate(back).states == generate(spec).states);
  }
  SUBCASE("defaults")
  {
    const auto spec = parse_scenario(R"({"states": 2, "total_packets": 10,
                                         "segments": [{"start": 0, "matrix": [[0.5, 0.5], [0.5, 0.5]]}]})");
    CHECK(spec.initial_state == 1);
    CHECK(spec.seed == 0);
  }
  SUBCASE("schema errors")
  {
    CHECK_THROWS_AS(parse_scenario("{"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"states": 2, "total_packets": 10,
                                       "segments": [{"start": 0, "matrix": [[0.5, 0.6], [0.5, 0.5]]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"states": 2, "segments": []})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"states": 2, "total_packets": 10,
                                       "segments": [{"start": 3, "matrix": [[1, 0], [0, 1]]}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"states": 2, "total_packets": 10,
                                       "segments": [{"start": 0, "drift": {"from": [[1, 0], [0, 1]]}}]})"),
                    ConfigError);
  }
}

TEST_CASE("trace CSV")
{
  const std::vector<StateId> states{1, 2, 2, 1};
  std::stringstream buf;
  write_trace_csv(buf, states);
  CHECK(buf.str() == "packet_index,state\n0,1\n1,2\n2,2\n3,1\n");
  CHECK(read_trace_csv(buf) == states);

  std::stringstream bad{"packet_index,state\n0,1\n1,x\n"};
  try
  {
    read_trace_csv(bad);
    FAIL("expected TraceError");
  }
  catch (const TraceError& e)
  {
    CHECK(e.line() == 3);
  }
  std::stringstream backwards{"0,1\n5,2\n5,1\n"};
  CHECK_THROWS_AS(read_trace_csv(backwards), TraceError);
  std::stringstream zero{"0,0\n"};
  CHECK_THROWS_AS(read_trace_csv(zero), TraceError);
}
