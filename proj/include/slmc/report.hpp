#pragma once

// Per-window run reports and comparison metrics.
//
// Report CSV layout (header row, 1-based state indices, N states):
//   window_index, first_packet,
//   sl_p_i_j      SL projected transition probabilities      (N*N)
//   u_i           row uncertainty mass                       (N)
//   dc_i          row degree of conflict                     (N)
//   reset_i       1 if the row was reset in this window      (N)
//   cl_p_i_j      classical per-window estimate              (N*N)
//   cl_empty_i    1 if the row had no transitions (uniform)  (N)
//   gt_p_i_j      ground truth, only when available          (N*N)

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "slmc/channel_sim.hpp"
#include "slmc/identifier.hpp"
#include "slmc/transition_matrix.hpp"

namespace slmc {

struct ReportRow
{
  std::size_t window_index = 0;
  std::size_t first_packet = 0;
  TransitionMatrix sl;
  std::vector<double> uncertainty;
  std::vector<double> conflict;
  std::vector<bool> reset;
  TransitionMatrix classical;
  std::vector<bool> classical_empty;
  std::optional<TransitionMatrix> truth;
};

struct RunReport
{
  std::size_t num_states = 0;
  std::size_t window_len = 0;
  std::vector<ReportRow> rows;

  bool has_truth() const;
};

RunReport make_report(std::span<const IdentifierOutput> outputs, std::size_t window_len);

/// Ground truth per window: mean scenario matrix over the window's transitions.
void attach_truth(RunReport& report, const ScenarioSpec& scenario);
/// Same matrix for every window.
void attach_truth(RunReport& report, const TransitionMatrix& truth);
/// Ground truth from a centered moving average of the classical estimates,
/// 2 * half_width + 1 windows wide (truncated at the ends).
void attach_smoothed_truth(RunReport& report, std::size_t half_width);

void write_report_csv(std::ostream& out, const RunReport& report);
/// Throws TraceError on malformed input.
RunReport read_report_csv(std::istream& in);

double rmse(std::span<const double> estimate, std::span<const double> truth);

struct EntryError
{
  std::size_t row = 0; // 0-based
  std::size_t col = 0;
  double rmse_sl = 0.0;
  double rmse_classical = 0.0;
};

struct JumpLatency
{
  std::size_t jump_packet = 0;
  std::size_t jump_window = 0;
  /// Windows from the jump window to the first reset; empty if none occurred
  /// before the next jump (or the end of the run).
  std::optional<std::size_t> latency;
};

struct Summary
{
  std::vector<EntryError> entries;
  double rmse_sl = 0.0;
  double rmse_classical = 0.0;
  std::vector<JumpLatency> jumps;
};

/// RMSE against the report's ground truth (InvalidInput if it has none) and
/// reset latency for each jump packet.
Summary summarize(const RunReport& report, std::span<const std::size_t> jump_packets);

void write_summary(std::ostream& out, const Summary& summary);

} // namespace slmc
