#include "slmc/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>

#include "slmc/csv.hpp"
#include "slmc/errors.hpp"

namespace slmc {

namespace {

std::string idx(std::size_t i)
{
  return std::to_string(i + 1);
}

std::string entry_name(const char* prefix, std::size_t i, std::size_t j)
{
  return std::string{prefix} + idx(i) + "_" + idx(j);
}

} // namespace

bool RunReport::has_truth() const
{
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.truth.has_value(); });
}

RunReport make_report(std::span<const IdentifierOutput> outputs, std::size_t window_len)
{
  RunReport report;
  report.window_len = window_len;
  report.num_states = outputs.empty() ? 0 : outputs.front().transition.size();
  report.rows.reserve(outputs.size());
  for (const auto& out : outputs)
  {
    const std::size_t n = out.transition.size();
    ReportRow row;
    row.window_index = out.stats.window_index;
    row.first_packet = out.stats.window_index * window_len;
    row.sl = out.transition;
    row.conflict = out.conflicts;
    row.reset.assign(n, false);
    for (std::size_t i : out.reset_rows)
    {
      row.reset[i] = true;
    }
    for (const auto& op : out.opinions.rows)
    {
      row.uncertainty.push_back(op.uncertainty());
    }
    auto classical = classical_estimate(out.stats);
    row.classical = std::move(classical.transition);
    row.classical_empty = std::move(classical.empty_rows);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void attach_truth(RunReport& report, const ScenarioSpec& scenario)
{
  for (auto& row : report.rows)
  {
    row.truth = scenario.mean_matrix(row.first_packet, row.first_packet + report.window_len);
  }
}

void attach_truth(RunReport& report, const TransitionMatrix& truth)
{
  for (auto& row : report.rows)
  {
    row.truth = truth;
  }
}

void attach_smoothed_truth(RunReport& report, std::size_t half_width)
{
  const std::size_t n = report.num_states;
  const std::size_t count = report.rows.size();
  std::vector<TransitionMatrix> smoothed;
  smoothed.reserve(count);
  for (std::size_t w = 0; w < count; ++w)
  {
    const std::size_t lo = w >= half_width ? w - half_width : 0;
    const std::size_t hi = std::min(count - 1, w + half_width);
    std::vector<std::vector<double>> acc(n, std::vector<double>(n, 0.0));
    for (std::size_t v = lo; v <= hi; ++v)
    {
      for (std::size_t i = 0; i < n; ++i)
      {
        for (std::size_t j = 0; j < n; ++j)
        {
          acc[i][j] += report.rows[v].classical(i, j);
        }
      }
    }
    for (auto& r : acc)
    {
      for (double& x : r)
      {
        x /= static_cast<double>(hi - lo + 1);
      }
    }
    smoothed.emplace_back(std::move(acc));
  }
  for (std::size_t w = 0; w < count; ++w)
  {
    report.rows[w].truth = std::move(smoothed[w]);
  }
}

/*------------------------------------------------------------------------------------------------*/

void write_report_csv(std::ostream& out, const RunReport& report)
{
  const std::size_t n = report.num_states;
  const bool truth = report.has_truth();

  out << "window_index,first_packet";
  auto matrix_header = [&](const char* prefix) {
    for (std::size_t i = 0; i < n; ++i)
    {
      for (std::size_t j = 0; j < n; ++j)
      {
        out << ',' << entry_name(prefix, i, j);
      }
    }
  };
  auto vector_header = [&](const char* prefix) {
    for (std::size_t i = 0; i < n; ++i)
    {
      out << ',' << prefix << idx(i);
    }
  };
  matrix_header("sl_p_");
  vector_header("u_");
  vector_header("dc_");
  vector_header("reset_");
  matrix_header("cl_p_");
  vector_header("cl_empty_");
  if (truth)
  {
    matrix_header("gt_p_");
  }
  out << '\n';

  for (const auto& row : report.rows)
  {
    out << row.window_index << ',' << row.first_packet;
    auto matrix = [&](const TransitionMatrix& m) {
      for (std::size_t i = 0; i < n; ++i)
      {
        for (std::size_t j = 0; j < n; ++j)
        {
          out << ',' << csv::format(m(i, j));
        }
      }
    };
    matrix(row.sl);
    for (double u : row.uncertainty)
    {
      out << ',' << csv::format(u);
    }
    for (double dc : row.conflict)
    {
      out << ',' << csv::format(dc);
    }
    for (bool r : row.reset)
    {
      out << ',' << (r ? 1 : 0);
    }
    matrix(row.classical);
    for (bool e : row.classical_empty)
    {
      out << ',' << (e ? 1 : 0);
    }
    if (truth)
    {
      matrix(*row.truth);
    }
    out << '\n';
  }
}

RunReport read_report_csv(std::istream& in)
{
  csv::Reader reader{in};
  std::vector<std::string_view> fields;
  if (!reader.next(fields) || !csv::looks_like_header(fields))
  {
    throw TraceError{"report must start with a header row", reader.line()};
  }
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < fields.size(); ++c)
  {
    column[std::string{fields[c]}] = c;
  }
  const std::size_t width = fields.size();

  std::size_t n = 0;
  while (column.count(entry_name("sl_p_", n, n)) != 0)
  {
    ++n;
  }
  if (n < 2 || column.count("window_index") == 0 || column.count("first_packet") == 0)
  {
    throw TraceError{"report header lacks window_index, first_packet or sl_p_i_j columns", reader.line()};
  }
  const bool truth = column.count("gt_p_1_1") != 0;

  auto require = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end())
    {
      throw TraceError{"report header lacks column " + name, 1};
    }
    return it->second;
  };

  RunReport report;
  report.num_states = n;
  while (reader.next(fields))
  {
    const std::size_t line = reader.line();
    if (fields.size() != width)
    {
      throw TraceError{"expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()), line};
    }
    auto number = [&](const std::string& name) { return csv::to_double(fields[require(name)], line); };
    auto flag = [&](const std::string& name) { return csv::to_uint(fields[require(name)], line) != 0; };
    auto matrix = [&](const char* prefix) {
      std::vector<std::vector<double>> m(n, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i)
      {
        for (std::size_t j = 0; j < n; ++j)
        {
          m[i][j] = number(entry_name(prefix, i, j));
        }
      }
      try
      {
        return TransitionMatrix{std::move(m)};
      }
      catch (const InvalidInput& e)
      {
        throw TraceError{std::string{prefix} + ": " + e.what(), line};
      }
    };

    ReportRow row;
    row.window_index = csv::to_uint(fields[require("window_index")], line);
    row.first_packet = csv::to_uint(fields[require("first_packet")], line);
    row.sl = matrix("sl_p_");
    row.classical = matrix("cl_p_");
    for (std::size_t i = 0; i < n; ++i)
    {
      row.uncertainty.push_back(number("u_" + idx(i)));
      row.conflict.push_back(number("dc_" + idx(i)));
      row.reset.push_back(flag("reset_" + idx(i)));
      row.classical_empty.push_back(flag("cl_empty_" + idx(i)));
    }
    if (truth)
    {
      row.truth = matrix("gt_p_");
    }
    report.rows.push_back(std::move(row));
  }

  if (report.rows.size() >= 2 && report.rows[1].window_index > report.rows[0].window_index)
  {
    report.window_len = (report.rows[1].first_packet - report.rows[0].first_packet) /
                        (report.rows[1].window_index - report.rows[0].window_index);
  }
  else if (!report.rows.empty() && report.rows[0].window_index > 0)
  {
    report.window_len = report.rows[0].first_packet / report.rows[0].window_index;
  }
  return report;
}

/*------------------------------------------------------------------------------------------------*/

double rmse(std::span<const double> estimate, std::span<const double> truth)
{
  if (estimate.size() != truth.size())
  {
    throw InvalidInput{"rmse operands differ in length"};
  }
  if (estimate.empty())
  {
    return 0.0;
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k)
  {
    const double d = estimate[k] - truth[k];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(estimate.size()));
}

Summary summarize(const RunReport& report, std::span<const std::size_t> jump_packets)
{
  if (!report.has_truth())
  {
    throw InvalidInput{"report has no ground-truth columns"};
  }
  const std::size_t n = report.num_states;
  Summary summary;

  std::vector<double> all_sl, all_cl, all_gt;
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = 0; j < n; ++j)
    {
      std::vector<double> sl, cl, gt;
      for (const auto& row : report.rows)
      {
        sl.push_back(row.sl(i, j));
        cl.push_back(row.classical(i, j));
        gt.push_back((*row.truth)(i, j));
      }
      summary.entries.push_back({i, j, rmse(sl, gt), rmse(cl, gt)});
      all_sl.insert(all_sl.end(), sl.begin(), sl.end());
      all_cl.insert(all_cl.end(), cl.begin(), cl.end());
      all_gt.insert(all_gt.end(), gt.begin(), gt.end());
    }
  }
  summary.rmse_sl = rmse(all_sl, all_gt);
  summary.rmse_classical = rmse(all_cl, all_gt);

  if (report.window_len == 0 && !jump_packets.empty())
  {
    throw InvalidInput{"report window length unknown; cannot place jumps"};
  }
  std::vector<std::size_t> jumps(jump_packets.begin(), jump_packets.end());
  std::sort(jumps.begin(), jumps.end());
  for (std::size_t k = 0; k < jumps.size(); ++k)
  {
    JumpLatency jl;
    jl.jump_packet = jumps[k];
    jl.jump_window = jumps[k] / report.window_len;
    const std::size_t limit = k + 1 < jumps.size() ? jumps[k + 1] / report.window_len : SIZE_MAX;
    for (const auto& row : report.rows)
    {
      if (row.window_index < jl.jump_window || row.window_index >= limit)
      {
        continue;
      }
      if (std::any_of(row.reset.begin(), row.reset.end(), [](bool r) { return r; }))
      {
        jl.latency = row.window_index - jl.jump_window;
        break;
      }
    }
    summary.jumps.push_back(jl);
  }
  return summary;
}

void write_summary(std::ostream& out, const Summary& summary)
{
  out << "entry,rmse_sl,rmse_classical\n";
  for (const auto& e : summary.entries)
  {
    out << "p_" << idx(e.row) << '_' << idx(e.col) << ',' << csv::format(e.rmse_sl) << ','
        << csv::format(e.rmse_classical) << '\n';
  }
  out << "all," << csv::format(summary.rmse_sl) << ',' << csv::format(summary.rmse_classical) << '\n';
  for (const auto& j : summary.jumps)
  {
    out << "jump_packet=" << j.jump_packet << " window=" << j.jump_window << " reset_latency=";
    if (j.latency)
    {
      out << *j.latency << '\n';
    }
    else
    {
      out << "undetected\n";
    }
  }
}

} // namespace slmc
