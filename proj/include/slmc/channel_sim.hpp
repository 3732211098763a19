#pragma once

// Seedable generator of observation sequences from a time-varying finite
// Markov chain, plus the two-state burst-error (Gilbert-Elliott) scenario with
// two parameter jumps and a drift in between.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniform variates are built from the top 53 bits of each draw,
// (x >> 11) * 2^-53, instead of std::uniform_real_distribution, whose output is
// implementation-defined. Traces are therefore bit-identical across standard
// libraries for equal seeds.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slmc/transition_matrix.hpp"

namespace slmc {

class ChannelRng
{
public:
  explicit ChannelRng(std::uint64_t seed) : engine_{seed} {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

/// Draws the successor of `current` (1-based) from row `current` of `matrix`
/// by inverse-CDF sampling.
StateId step_chain(StateId current, const TransitionMatrix& matrix, ChannelRng& rng);

struct ConstantSegment
{
  TransitionMatrix matrix;
};

/// Entries move linearly from `from` at the first packet of the segment to `to`
/// at its last packet.
struct DriftSegment
{
  TransitionMatrix from;
  TransitionMatrix to;
};

struct ScenarioSegment
{
  std::size_t start = 0;
  std::variant<ConstantSegment, DriftSegment> shape;
};

struct ScenarioSpec
{
  std::size_t num_states = 2;
  std::vector<ScenarioSegment> segments;
  std::size_t total_packets = 0;
  StateId initial_state = 1;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Matrix governing the transition into packet `packet` (packet >= 1).
  TransitionMatrix matrix_at(std::size_t packet) const;

  /// Segment starts where the governing matrix changes discontinuously.
  std::vector<std::size_t> jump_points() const;

  /// Mean matrix over the transitions into packets [first, last), skipping
  /// packet 0, which has no predecessor.
  TransitionMatrix mean_matrix(std::size_t first, std::size_t last) const;
};

struct ObservationTrace
{
  std::vector<StateId> states;
  ScenarioSpec scenario;

  TransitionMatrix ground_truth(std::size_t packet) const { return scenario.matrix_at(packet); }
};

/// Runs the chain for spec.total_packets packets starting in spec.initial_state.
ObservationTrace generate(const ScenarioSpec& spec);

/// Built-in burst-error scenario over 100 000 packets: p_GG starts at 0.90,
/// jumps at packets 19 081 and 30 851, and drifts linearly in between. Only
/// the packet count, the starting p_GG and the jump positions are fixed; the
/// jump targets, drift endpoints and the p_BB path are a reconstruction.
ScenarioSpec builtin_scenario(std::uint64_t seed = 42);

/// JSON scenario files:
///   { "states": 2, "total_packets": 100000, "initial_state": 1, "seed": 42,
///     "segments": [ { "start": 0, "matrix": [[0.9, 0.1], [0.6, 0.4]] },
///                   { "start": 500, "drift": { "from": [[...]], "to": [[...]] } } ] }
/// "initial_state" defaults to 1 and "seed" to 0. Throws ConfigError.
ScenarioSpec parse_scenario(std::string_view json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioSpec& spec);

/// `packet_index,state` CSV with a header row.
void write_trace_csv(std::ostream& out, const std::vector<StateId>& states);
/// Reads the trace CSV written above; throws TraceError with line numbers.
std::vector<StateId> read_trace_csv(std::istream& in);

} // namespace slmc
