#pragma once

// Online identification of a time-varying Markov chain from directly observed
// states.
//
// The stream is cut into consecutive windows of `window_len` observations.
// Each window yields per-row transition counts, which map to one opinion per
// current state. The running opinion and the window opinion are both trust
// discounted, compared through their degree of conflict, and then either
// fused (consistent) or the running opinion is replaced by the window opinion
// (a detected change). Projecting the resulting opinions gives the estimated
// transition matrix, and their uncertainty mass quantifies how much evidence
// backs each row.

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "slmc/opinion.hpp"
#include "slmc/transition_matrix.hpp"

namespace slmc {

struct IdentifierConfig
{
  std::size_t num_states = 2;
  std::size_t window_len = 100;
  double prior_weight = default_prior_weight;
  /// One base-rate row per state; empty means uniform.
  std::vector<std::vector<double>> base_rates;
  /// Discount applied to the running opinion, per row.
  std::vector<double> discount_prev;
  /// Discount applied to the window opinion, per row.
  std::vector<double> discount_new;
  /// Rows whose degree of conflict exceeds this are reset.
  double conflict_threshold = 0.15;

  /// Defaults for an N-state chain: l_w = 100, W = 2, uniform base rates,
  /// both discounts 0.999, threshold 0.15.
  static IdentifierConfig defaults(std::size_t num_states);

  /// Fills empty base rates / discounts with their defaults and checks every
  /// invariant; throws ConfigError.
  void validate();

  const std::vector<double>& base_rate(std::size_t row) const { return base_rates.at(row); }
};

inline constexpr double default_discount = 0.999;
inline constexpr double never_reset = std::numeric_limits<double>::infinity();

/// Transition counts s_ij of one window.
struct WindowStats
{
  std::size_t num_states = 0;
  std::vector<std::uint64_t> counts; // row-major N x N
  std::size_t window_index = 0;
  /// Boundary state carried in from the previous window, if any.
  std::optional<StateId> first_state;
  /// Last observation of the window, carried into the next one.
  StateId last_state = 0;

  std::uint64_t count(std::size_t i, std::size_t j) const { return counts[i * num_states + j]; }
  std::uint64_t row_total(std::size_t i) const;
  std::uint64_t total() const;
};

/// One opinion per current state.
struct OpinionMatrix
{
  std::vector<Opinion> rows;

  std::size_t size() const noexcept { return rows.size(); }
  /// Row-wise projection.
  TransitionMatrix project() const;
};

struct IdentifierOutput
{
  TransitionMatrix transition;
  OpinionMatrix opinions;
  /// Per-row degree of conflict; zero for the bootstrap window.
  std::vector<double> conflicts;
  /// Rows whose consistency test failed and whose history was discarded.
  std::set<std::size_t> reset_rows;
  /// The counts this output was computed from.
  WindowStats stats;
};

/// Pull interface over an observation stream.
class ObservationSource
{
public:
  virtual ~ObservationSource() = default;
  /// Next observation, or nullopt at end of stream.
  virtual std::optional<StateId> next() = 0;
};

/// Source reading from a contiguous buffer. The buffer must outlive it.
class SpanSource final : public ObservationSource
{
public:
  explicit SpanSource(std::span<const StateId> states) : states_{states} {}

  std::optional<StateId> next() override
  {
    if (pos_ == states_.size())
    {
      return std::nullopt;
    }
    return states_[pos_++];
  }

  std::size_t consumed() const noexcept { return pos_; }

private:
  std::span<const StateId> states_;
  std::size_t pos_ = 0;
};

/// Counts consecutive pairs of carry + window. Throws ObservationError for
/// ids outside 1..num_states.
WindowStats count_transitions(std::span<const StateId> window, std::size_t num_states,
                              std::optional<StateId> carry, std::size_t window_index = 0);

/// Pulls exactly cfg.window_len observations and counts their transitions.
/// Returns nullopt when the stream ends first; the partial window is dropped.
std::optional<WindowStats> accumulate_window(ObservationSource& source, const IdentifierConfig& cfg,
                                             std::optional<StateId> carry, std::size_t window_index = 0);

/// Row i is the equivalent-mapping opinion of counts row i with base rate a_i.
/// Unvisited rows come out vacuous.
OpinionMatrix window_opinions(const WindowStats& stats, const IdentifierConfig& cfg);

/// One identification step. `prev` is empty for the first window, in which
/// case the discounted window opinions are emitted without a consistency test.
IdentifierOutput step(const std::optional<OpinionMatrix>& prev, const WindowStats& stats,
                      const IdentifierConfig& cfg);

/// Stateful wrapper owning the running opinion matrix and the boundary carry.
class Identifier
{
public:
  explicit Identifier(IdentifierConfig cfg);

  const IdentifierConfig& config() const noexcept { return cfg_; }
  const std::optional<OpinionMatrix>& state() const noexcept { return state_; }

  /// Consumes one window's counts.
  IdentifierOutput update(const WindowStats& stats);

  /// Pulls the next full window from `source` and processes it; nullopt at
  /// end of stream.
  std::optional<IdentifierOutput> advance(ObservationSource& source);

private:
  IdentifierConfig cfg_;
  std::optional<OpinionMatrix> state_;
  std::optional<StateId> carry_;
  std::size_t next_window_ = 0;
};

/// Runs the identifier over every complete window of the stream.
std::vector<IdentifierOutput> run(ObservationSource& source, const IdentifierConfig& cfg);
std::vector<IdentifierOutput> run(std::span<const StateId> states, const IdentifierConfig& cfg);

/// Per-window maximum-likelihood estimate p_ij = s_ij / sum_l s_il.
struct ClassicalEstimate
{
  TransitionMatrix transition;
  /// Rows without any observed transition; they hold the uniform distribution.
  std::vector<bool> empty_rows;
};

ClassicalEstimate classical_estimate(const WindowStats& stats);

} // namespace slmc
