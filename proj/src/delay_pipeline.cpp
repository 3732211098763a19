#include "slmc/delay_pipeline.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "slmc/channel_sim.hpp"
#include "slmc/csv.hpp"
#include "slmc/errors.hpp"

namespace slmc {

void DelayConfig::validate() const
{
  if (!(margin_ms > 0.0) || !(harq_offset_ms > 0.0))
  {
    throw ConfigError{"delay margin and HARQ offset must be positive"};
  }
  if (baseline_window < 1)
  {
    throw ConfigError{"baseline window must hold at least one delay"};
  }
}

ThresholdState ThresholdState::seeded(const DelayConfig& cfg, double first_delay_ms)
{
  ThresholdState th;
  th.baseline = first_delay_ms;
  th.margin = cfg.margin_ms;
  th.harq_offset = cfg.harq_offset_ms;
  th.window = cfg.baseline_window;
  th.cold_start = cfg.cold_start;
  return th;
}

StateId classify(const DelayRecord& rec, const ThresholdState& th)
{
  if (rec.delay_ms <= th.lower())
  {
    return 1;
  }
  if (rec.delay_ms <= th.upper())
  {
    return 2;
  }
  return 3;
}

ThresholdState update_thresholds(ThresholdState th, const DelayRecord& rec)
{
  if (classify(rec, th) != 1)
  {
    return th;
  }
  th.inliers.push_back(rec.delay_ms);
  if (th.inliers.size() > th.window)
  {
    th.inliers.pop_front();
  }
  ++th.inliers_seen;
  if (th.inliers_seen >= th.cold_start)
  {
    th.baseline = std::accumulate(th.inliers.begin(), th.inliers.end(), 0.0) / static_cast<double>(th.inliers.size());
  }
  return th;
}

DelayClassifier::DelayClassifier(DelayConfig cfg)
  : cfg_{cfg}
{
  cfg_.validate();
}

StateId DelayClassifier::push(const DelayRecord& rec)
{
  if (!(rec.delay_ms > 0.0))
  {
    throw TraceError{"packet " + std::to_string(rec.packet_index) + ": delay must be positive"};
  }
  if (last_index_ && rec.packet_index <= *last_index_)
  {
    throw TraceError{"packet_index " + std::to_string(rec.packet_index) + " is not increasing"};
  }
  last_index_ = rec.packet_index;
  if (!th_)
  {
    th_ = ThresholdState::seeded(cfg_, rec.delay_ms);
  }
  const StateId state = classify(rec, *th_);
  th_ = update_thresholds(std::move(*th_), rec);
  return state;
}

std::vector<StateId> pipeline(std::span<const DelayRecord> trace, const DelayConfig& cfg)
{
  DelayClassifier classifier{cfg};
  std::vector<StateId> states;
  states.reserve(trace.size());
  for (const auto& rec : trace)
  {
    states.push_back(classifier.push(rec));
  }
  return states;
}

/*------------------------------------------------------------------------------------------------*/

TransitionMatrix SyntheticDelaySpec::truth() const
{
  const std::vector<double> row{1.0 - harq_rate - severe_rate, harq_rate, severe_rate};
  return TransitionMatrix{{row, row, row}};
}

SyntheticDelayTrace synthesize_delays(const SyntheticDelaySpec& spec)
{
  if (spec.harq_rate < 0.0 || spec.severe_rate < 0.0 || spec.harq_rate + spec.severe_rate > 1.0)
  {
    throw ConfigError{"synthetic delay rates must be non-negative and sum to at most 1"};
  }
  ChannelRng rng{spec.seed};
  // Box-Muller on the portable uniform source keeps traces reproducible.
  auto gaussian = [&rng] {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };

  SyntheticDelayTrace trace;
  trace.records.reserve(spec.packets);
  trace.labels.reserve(spec.packets);
  const double slope = spec.packets > 1 ? spec.drift_ms / static_cast<double>(spec.packets - 1) : 0.0;
  for (std::size_t k = 0; k < spec.packets; ++k)
  {
    const double u = rng.uniform();
    StateId label = 1;
    double extra = 0.0;
    if (u < spec.severe_rate)
    {
      label = 3;
      extra = spec.severe_offset_ms;
    }
    else if (u < spec.severe_rate + spec.harq_rate)
    {
      label = 2;
      extra = spec.harq_offset_ms;
    }
    const double delay = spec.baseline_ms + slope * static_cast<double>(k) + spec.noise_sigma_ms * gaussian() + extra;
    trace.records.push_back({k, delay});
    trace.labels.push_back(label);
  }
  return trace;
}

/*------------------------------------------------------------------------------------------------*/

std::vector<DelayRecord> read_delay_csv(std::istream& in)
{
  csv::Reader reader{in};
  std::vector<std::string_view> fields;
  std::vector<DelayRecord> records;
  std::size_t shape = 0;
  bool first_line = true;
  while (reader.next(fields))
  {
    const bool header = first_line && csv::looks_like_header(fields);
    first_line = false;
    if (header)
    {
      continue;
    }
    if (shape == 0)
    {
      shape = fields.size();
      if (shape != 2 && shape != 3)
      {
        throw TraceError{"expected packet_index,delay_ms or packet_index,t_send_us,t_recv_us", reader.line()};
      }
    }
    if (fields.size() != shape)
    {
      throw TraceError{"expected " + std::to_string(shape) + " fields, got " + std::to_string(fields.size()),
                       reader.line()};
    }
    DelayRecord rec;
    rec.packet_index = csv::to_uint(fields[0], reader.line());
    rec.delay_ms = shape == 2 ? csv::to_double(fields[1], reader.line())
                              : (csv::to_double(fields[2], reader.line()) - csv::to_double(fields[1], reader.line())) /
                                  1000.0;
    if (!(rec.delay_ms > 0.0))
    {
      throw TraceError{"delay must be positive", reader.line()};
    }
    if (!records.empty() && rec.packet_index <= records.back().packet_index)
    {
      throw TraceError{"packet_index must be strictly increasing", reader.line()};
    }
    records.push_back(rec);
  }
  return records;
}

void write_state_csv(std::ostream& out, std::span<const DelayRecord> records, std::span<const StateId> states)
{
  if (records.size() != states.size())
  {
    throw InvalidInput{"records and states differ in length"};
  }
  out << "packet_index,delay_ms,state\n";
  for (std::size_t k = 0; k < records.size(); ++k)
  {
    out << records[k].packet_index << ',' << csv::format(records[k].delay_ms) << ',' << states[k] << '\n';
  }
}

} // namespace slmc
