#include "slmc/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "slmc/csv.hpp"
#include "slmc/errors.hpp"

namespace slmc {

using nlohmann::json;

StateId step_chain(StateId current, const TransitionMatrix& matrix, ChannelRng& rng)
{
  const auto row = matrix.row(current - 1);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_possible = 0;
  for (std::size_t j = 0; j < row.size(); ++j)
  {
    if (row[j] > 0.0)
    {
      last_possible = j;
    }
    cumulative += row[j];
    if (u < cumulative)
    {
      return static_cast<StateId>(j + 1);
    }
  }
  // Row sums a hair below 1 and u landed in the gap.
  return static_cast<StateId>(last_possible + 1);
}

/*------------------------------------------------------------------------------------------------*/

namespace {

std::size_t segment_end(const ScenarioSpec& spec, std::size_t s)
{
  return s + 1 < spec.segments.size() ? spec.segments[s + 1].start : spec.total_packets;
}

std::size_t segment_of(const ScenarioSpec& spec, std::size_t packet)
{
  const auto it = std::upper_bound(spec.segments.begin(), spec.segments.end(), packet,
                                   [](std::size_t p, const ScenarioSegment& seg) { return p < seg.start; });
  return static_cast<std::size_t>(it - spec.segments.begin()) - 1;
}

double max_abs_difference(const TransitionMatrix& a, const TransitionMatrix& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    for (std::size_t j = 0; j < a.size(); ++j)
    {
      d = std::max(d, std::abs(a(i, j) - b(i, j)));
    }
  }
  return d;
}

} // namespace

void ScenarioSpec::validate() const
{
  if (num_states < 2)
  {
    throw ConfigError{"scenario needs at least two states"};
  }
  if (total_packets < 1)
  {
    throw ConfigError{"scenario needs at least one packet"};
  }
  if (initial_state < 1 || initial_state > num_states)
  {
    throw ConfigError{"initial state outside 1.." + std::to_string(num_states)};
  }
  if (segments.empty() || segments.front().start != 0)
  {
    throw ConfigError{"first segment must start at packet 0"};
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
  {
    if (s > 0 && segments[s].start <= segments[s - 1].start)
    {
      throw ConfigError{"segment starts must be strictly increasing"};
    }
    if (segments[s].start >= total_packets)
    {
      throw ConfigError{"segment " + std::to_string(s) + " starts beyond the last packet"};
    }
    const auto check = [&](const TransitionMatrix& m) {
      if (m.size() != num_states)
      {
        throw ConfigError{"segment " + std::to_string(s) + " matrix is not " + std::to_string(num_states) + "x" +
                          std::to_string(num_states)};
      }
    };
    std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, ConstantSegment>)
        {
          check(shape.matrix);
        }
        else
        {
          check(shape.from);
          check(shape.to);
        }
      },
      segments[s].shape);
  }
}

TransitionMatrix ScenarioSpec::matrix_at(std::size_t packet) const
{
  const std::size_t s = segment_of(*this, packet);
  const auto& seg = segments[s];
  if (const auto* c = std::get_if<ConstantSegment>(&seg.shape))
  {
    return c->matrix;
  }
  const auto& drift = std::get<DriftSegment>(seg.shape);
  const std::size_t length = segment_end(*this, s) - seg.start;
  const double t = length > 1 ? static_cast<double>(packet - seg.start) / static_cast<double>(length - 1) : 0.0;
  return TransitionMatrix::interpolate(drift.from, drift.to, std::min(t, 1.0));
}

std::vector<std::size_t> ScenarioSpec::jump_points() const
{
  std::vector<std::size_t> jumps;
  for (std::size_t s = 1; s < segments.size(); ++s)
  {
    const std::size_t start = segments[s].start;
    if (max_abs_difference(matrix_at(start - 1), matrix_at(start)) > 1e-12)
    {
      jumps.push_back(start);
    }
  }
  return jumps;
}

TransitionMatrix ScenarioSpec::mean_matrix(std::size_t first, std::size_t last) const
{
  first = std::max<std::size_t>(first, 1);
  last = std::min(last, total_packets);
  if (first >= last)
  {
    return matrix_at(std::min(first, total_packets - 1));
  }
  std::vector<std::vector<double>> acc(num_states, std::vector<double>(num_states, 0.0));
  for (std::size_t k = first; k < last; ++k)
  {
    const auto m = matrix_at(k);
    for (std::size_t i = 0; i < num_states; ++i)
    {
      for (std::size_t j = 0; j < num_states; ++j)
      {
        acc[i][j] += m(i, j);
      }
    }
  }
  const double n = static_cast<double>(last - first);
  for (auto& row : acc)
  {
    for (double& x : row)
    {
      x /= n;
    }
  }
  return TransitionMatrix{std::move(acc)};
}

ObservationTrace generate(const ScenarioSpec& spec)
{
  spec.validate();
  ObservationTrace trace;
  trace.scenario = spec;
  trace.states.reserve(spec.total_packets);

  ChannelRng rng{spec.seed};
  StateId current = spec.initial_state;
  trace.states.push_back(current);
  for (std::size_t s = 0; s < spec.segments.size(); ++s)
  {
    const std::size_t first = std::max<std::size_t>(spec.segments[s].start, 1);
    const std::size_t end = segment_end(spec, s);
    const bool constant = std::holds_alternative<ConstantSegment>(spec.segments[s].shape);
    for (std::size_t k = first; k < end; ++k)
    {
      current = constant ? step_chain(current, std::get<ConstantSegment>(spec.segments[s].shape).matrix, rng)
                         : step_chain(current, spec.matrix_at(k), rng);
      trace.states.push_back(current);
    }
  }
  return trace;
}

ScenarioSpec builtin_scenario(std::uint64_t seed)
{
  ScenarioSpec spec;
  spec.num_states = 2;
  spec.total_packets = 100'000;
  spec.initial_state = 1;
  spec.seed = seed;
  // Rows: [p_GG, 1 - p_GG], [1 - p_BB, p_BB].
  spec.segments.push_back({0, ConstantSegment{TransitionMatrix{{{0.90, 0.10}, {0.60, 0.40}}}}});
  spec.segments.push_back({19'081, DriftSegment{TransitionMatrix{{{0.65, 0.35}, {0.70, 0.30}}},
                                                TransitionMatrix{{{0.72, 0.28}, {0.65, 0.35}}}}});
  spec.segments.push_back({30'851, ConstantSegment{TransitionMatrix{{{0.95, 0.05}, {0.75, 0.25}}}}});
  return spec;
}

/*------------------------------------------------------------------------------------------------*/

namespace {

TransitionMatrix matrix_from_json(const json& j, const std::string& where)
{
  if (!j.is_array())
  {
    throw ConfigError{where + ": matrix must be an array of rows"};
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : j)
  {
    if (!row.is_array())
    {
      throw ConfigError{where + ": matrix row must be an array"};
    }
    std::vector<double> r;
    for (const auto& x : row)
    {
      if (!x.is_number())
      {
        throw ConfigError{where + ": matrix entries must be numbers"};
      }
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  try
  {
    return TransitionMatrix{std::move(rows)};
  }
  catch (const InvalidInput& e)
  {
    throw ConfigError{where + ": " + e.what()};
  }
}

template <typename T>
T required(const json& j, const char* key)
{
  if (!j.contains(key))
  {
    throw ConfigError{std::string{"scenario: missing key '"} + key + "'"};
  }
  try
  {
    return j.at(key).get<T>();
  }
  catch (const json::exception&)
  {
    throw ConfigError{std::string{"scenario: key '"} + key + "' has the wrong type"};
  }
}

} // namespace

ScenarioSpec parse_scenario(std::string_view json_text)
{
  json doc;
  try
  {
    doc = json::parse(json_text);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError{std::string{"scenario: invalid JSON: "} + e.what()};
  }
  if (!doc.is_object())
  {
    throw ConfigError{"scenario: top level must be an object"};
  }

  ScenarioSpec spec;
  spec.num_states = required<std::size_t>(doc, "states");
  spec.total_packets = required<std::size_t>(doc, "total_packets");
  spec.initial_state = doc.contains("initial_state") ? required<StateId>(doc, "initial_state") : 1;
  spec.seed = doc.contains("seed") ? required<std::uint64_t>(doc, "seed") : 0;

  const auto segments = required<json>(doc, "segments");
  if (!segments.is_array())
  {
    throw ConfigError{"scenario: 'segments' must be an array"};
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
  {
    const auto& seg = segments[s];
    const std::string where = "scenario segment " + std::to_string(s);
    if (!seg.is_object() || !seg.contains("start"))
    {
      throw ConfigError{where + ": needs a 'start'"};
    }
    ScenarioSegment out;
    out.start = required<std::size_t>(seg, "start");
    if (seg.contains("matrix") == seg.contains("drift"))
    {
      throw ConfigError{where + ": exactly one of 'matrix' or 'drift' is required"};
    }
    if (seg.contains("matrix"))
    {
      out.shape = ConstantSegment{matrix_from_json(seg["matrix"], where)};
    }
    else
    {
      const auto& d = seg["drift"];
      if (!d.is_object() || !d.contains("from") || !d.contains("to"))
      {
        throw ConfigError{where + ": 'drift' needs 'from' and 'to'"};
      }
      out.shape = DriftSegment{matrix_from_json(d["from"], where), matrix_from_json(d["to"], where)};
    }
    spec.segments.push_back(std::move(out));
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path)
{
  std::ifstream in{path};
  if (!in)
  {
    throw IoError{"cannot open scenario file " + path.string()};
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string scenario_to_json(const ScenarioSpec& spec)
{
  json doc;
  doc["states"] = spec.num_states;
  doc["total_packets"] = spec.total_packets;
  doc["initial_state"] = spec.initial_state;
  doc["seed"] = spec.seed;
  doc["segments"] = json::array();
  for (const auto& seg : spec.segments)
  {
    json s;
    s["start"] = seg.start;
    if (const auto* c = std::get_if<ConstantSegment>(&seg.shape))
    {
      s["matrix"] = c->matrix.rows();
    }
    else
    {
      const auto& d = std::get<DriftSegment>(seg.shape);
      s["drift"] = {{"from", d.from.rows()}, {"to", d.to.rows()}};
    }
    doc["segments"].push_back(std::move(s));
  }
  return doc.dump(2);
}

/*------------------------------------------------------------------------------------------------*/

void write_trace_csv(std::ostream& out, const std::vector<StateId>& states)
{
  out << "packet_index,state\n";
  for (std::size_t k = 0; k < states.size(); ++k)
  {
    out << k << ',' << states[k] << '\n';
  }
}

std::vector<StateId> read_trace_csv(std::istream& in)
{
  csv::Reader reader{in};
  std::vector<std::string_view> fields;
  std::vector<StateId> states;
  bool first_line = true;
  std::uint64_t last_index = 0;
  while (reader.next(fields))
  {
    const bool header = first_line && csv::looks_like_header(fields);
    first_line = false;
    if (header)
    {
      continue;
    }
    if (fields.size() != 2)
    {
      throw TraceError{"expected 2 fields (packet_index,state), got " + std::to_string(fields.size()),
                       reader.line()};
    }
    const auto index = csv::to_uint(fields[0], reader.line());
    const auto state = csv::to_uint(fields[1], reader.line());
    if (!states.empty() && index <= last_index)
    {
      throw TraceError{"packet_index must be strictly increasing", reader.line()};
    }
    if (state < 1 || state > 0xffffffffu)
    {
      throw TraceError{"state id must be a positive integer", reader.line()};
    }
    last_index = index;
    states.push_back(static_cast<StateId>(state));
  }
  return states;
}

} // namespace slmc
