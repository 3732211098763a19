#pragma once

// Turns packet-delay measurements into three-state channel observations:
//
//   state 1  decoded at the first attempt    delay <= t1
//   state 2  recovered by one HARQ round     t1 < delay <= t2
//   state 3  needed further correction       delay > t2
//
// with t1 = baseline + margin and t2 = t1 + harq_offset. The baseline is a
// moving average over the most recent state-1 delays, so it follows slow
// changes of the nominal latency while ignoring retransmitted packets.

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "slmc/transition_matrix.hpp"

namespace slmc {

struct DelayRecord
{
  std::uint64_t packet_index = 0;
  double delay_ms = 0.0;
};

struct DelayConfig
{
  double margin_ms = 3.0;
  double harq_offset_ms = 7.0;
  /// Number of recent inliers averaged into the baseline.
  std::size_t baseline_window = 500;
  /// The baseline stays at its seed until this many inliers were seen.
  std::size_t cold_start = 50;

  /// Throws ConfigError.
  void validate() const;
};

struct ThresholdState
{
  double baseline = 0.0;
  double margin = 3.0;
  double harq_offset = 7.0;
  std::size_t window = 500;
  std::size_t cold_start = 50;
  /// Most recent state-1 delays, oldest first, at most `window` of them.
  std::deque<double> inliers;
  std::size_t inliers_seen = 0;

  /// Thresholds seeded by the first observed delay.
  static ThresholdState seeded(const DelayConfig& cfg, double first_delay_ms);

  double lower() const noexcept { return baseline + margin; }
  double upper() const noexcept { return baseline + margin + harq_offset; }
};

/// State 1, 2 or 3 for the record's delay under the given thresholds.
StateId classify(const DelayRecord& rec, const ThresholdState& th);

/// Classifies `rec`; a state-1 delay enters the moving average, anything
/// else is an outlier and leaves the baseline untouched.
ThresholdState update_thresholds(ThresholdState th, const DelayRecord& rec);

/// Stream form of the pipeline: classify, then update.
class DelayClassifier
{
public:
  explicit DelayClassifier(DelayConfig cfg);

  /// Throws TraceError for non-positive delays or non-increasing indices.
  StateId push(const DelayRecord& rec);

  /// Empty until the first record arrived.
  const std::optional<ThresholdState>& thresholds() const noexcept { return th_; }

private:
  DelayConfig cfg_;
  std::optional<ThresholdState> th_;
  std::optional<std::uint64_t> last_index_;
};

/// One state per record.
std::vector<StateId> pipeline(std::span<const DelayRecord> trace, const DelayConfig& cfg);

/*------------------------------------------------------------------------------------------------*/

/// Synthetic stand-in for a recorded delay trace: a drifting baseline with
/// Gaussian jitter, plus a fixed extra delay on HARQ-corrected packets and a
/// larger one on packets needing further correction. Labels are i.i.d.
struct SyntheticDelaySpec
{
  std::size_t packets = 127'400;
  double baseline_ms = 20.0;
  double noise_sigma_ms = 0.5;
  /// Total baseline change from the first to the last packet.
  double drift_ms = 2.0;
  double harq_offset_ms = 7.0;
  double harq_rate = 0.09;
  double severe_offset_ms = 40.0;
  double severe_rate = 0.01;
  std::uint64_t seed = 1;

  /// The chain the labels follow: every row is (1 - h - s, h, s).
  TransitionMatrix truth() const;
};

struct SyntheticDelayTrace
{
  std::vector<DelayRecord> records;
  std::vector<StateId> labels;
};

SyntheticDelayTrace synthesize_delays(const SyntheticDelaySpec& spec);

/*------------------------------------------------------------------------------------------------*/

/// Reads `packet_index,delay_ms` or `packet_index,t_send_us,t_recv_us`
/// (header optional; the shape is fixed by the first data row). Throws
/// TraceError with line numbers.
std::vector<DelayRecord> read_delay_csv(std::istream& in);

/// Writes `packet_index,delay_ms,state`.
void write_state_csv(std::ostream& out, std::span<const DelayRecord> records, std::span<const StateId> states);

} // namespace slmc
