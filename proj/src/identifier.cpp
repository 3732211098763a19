#include "slmc/identifier.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "slmc/errors.hpp"

namespace slmc {

IdentifierConfig IdentifierConfig::defaults(std::size_t num_states)
{
  IdentifierConfig cfg;
  cfg.num_states = num_states;
  cfg.validate();
  return cfg;
}

void IdentifierConfig::validate()
{
  if (num_states < 2)
  {
    throw ConfigError{"identifier needs at least two states"};
  }
  if (window_len < 1)
  {
    throw ConfigError{"window length must be at least 1"};
  }
  if (!(prior_weight > 0.0) || !std::isfinite(prior_weight))
  {
    throw ConfigError{"prior weight W must be positive"};
  }
  if (!(conflict_threshold > 0.0))
  {
    throw ConfigError{"conflict threshold must be positive"};
  }

  if (base_rates.empty())
  {
    base_rates.assign(num_states, Opinion::uniform_base_rate(num_states));
  }
  if (base_rates.size() != num_states)
  {
    throw ConfigError{"expected " + std::to_string(num_states) + " base-rate rows"};
  }
  for (std::size_t i = 0; i < num_states; ++i)
  {
    const auto& row = base_rates[i];
    if (row.size() != num_states)
    {
      throw ConfigError{"base-rate row " + std::to_string(i + 1) + " has wrong length"};
    }
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    bool in_range = true;
    for (double a : row)
    {
      in_range = in_range && a >= 0.0 && a <= 1.0;
    }
    if (!in_range || std::abs(total - 1.0) > mass_tolerance)
    {
      throw ConfigError{"base-rate row " + std::to_string(i + 1) + " is not a probability vector"};
    }
  }

  auto check_discounts = [this](std::vector<double>& d, const char* name) {
    if (d.empty())
    {
      d.assign(num_states, default_discount);
    }
    else if (d.size() == 1)
    {
      d.assign(num_states, d.front());
    }
    if (d.size() != num_states)
    {
      throw ConfigError{std::string{name} + ": expected one entry per state"};
    }
    for (double x : d)
    {
      if (!(x >= 0.0 && x <= 1.0))
      {
        throw ConfigError{std::string{name} + " entries must lie in [0,1]"};
      }
    }
  };
  check_discounts(discount_prev, "discount_prev");
  check_discounts(discount_new, "discount_new");
}

/*------------------------------------------------------------------------------------------------*/

std::uint64_t WindowStats::row_total(std::size_t i) const
{
  const auto first = counts.begin() + static_cast<std::ptrdiff_t>(i * num_states);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(num_states), std::uint64_t{0});
}

std::uint64_t WindowStats::total() const
{
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

TransitionMatrix OpinionMatrix::project() const
{
  std::vector<std::vector<double>> probs;
  probs.reserve(rows.size());
  for (const auto& row : rows)
  {
    probs.push_back(slmc::project(row));
  }
  return TransitionMatrix{std::move(probs)};
}

/*------------------------------------------------------------------------------------------------*/

WindowStats count_transitions(std::span<const StateId> window, std::size_t num_states,
                              std::optional<StateId> carry, std::size_t window_index)
{
  auto check = [&](StateId s, std::size_t pos) {
    if (s < 1 || s > num_states)
    {
      throw ObservationError{"state id " + std::to_string(s) + " at position " + std::to_string(pos) +
                               " outside 1.." + std::to_string(num_states),
                             window_index};
    }
  };

  WindowStats stats;
  stats.num_states = num_states;
  stats.counts.assign(num_states * num_states, 0);
  stats.window_index = window_index;
  stats.first_state = carry;

  std::optional<StateId> prev = carry;
  if (prev)
  {
    check(*prev, 0);
  }
  for (std::size_t k = 0; k < window.size(); ++k)
  {
    const StateId s = window[k];
    check(s, k);
    if (prev)
    {
      ++stats.counts[(*prev - 1) * num_states + (s - 1)];
    }
    prev = s;
  }
  stats.last_state = prev.value_or(0);
  return stats;
}

std::optional<WindowStats> accumulate_window(ObservationSource& source, const IdentifierConfig& cfg,
                                             std::optional<StateId> carry, std::size_t window_index)
{
  std::vector<StateId> buffer;
  buffer.reserve(cfg.window_len);
  while (buffer.size() < cfg.window_len)
  {
    const auto s = source.next();
    if (!s)
    {
      return std::nullopt;
    }
    buffer.push_back(*s);
  }
  return count_transitions(buffer, cfg.num_states, carry, window_index);
}

OpinionMatrix window_opinions(const WindowStats& stats, const IdentifierConfig& cfg)
{
  if (stats.num_states != cfg.num_states)
  {
    throw ConfigError{"window statistics do not match the configured number of states"};
  }
  OpinionMatrix out;
  out.rows.reserve(cfg.num_states);
  for (std::size_t i = 0; i < cfg.num_states; ++i)
  {
    std::vector<double> r(cfg.num_states);
    for (std::size_t j = 0; j < cfg.num_states; ++j)
    {
      r[j] = static_cast<double>(stats.count(i, j));
    }
    out.rows.push_back(opinion_from_evidence(EvidenceVector{std::move(r), cfg.prior_weight, cfg.base_rate(i)}));
  }
  return out;
}

namespace {

// Cumulative fusion extended to vacuous operands, which act as the neutral
// element (the u -> 1 limit of the operator).
Opinion merge(const Opinion& next, const Opinion& prev)
{
  if (next.is_vacuous())
  {
    return prev;
  }
  if (prev.is_vacuous())
  {
    return next;
  }
  return cumulative_fuse(next, prev);
}

} // namespace

IdentifierOutput step(const std::optional<OpinionMatrix>& prev, const WindowStats& stats,
                      const IdentifierConfig& cfg)
{
  const std::size_t n = cfg.num_states;
  if (prev)
  {
    if (prev->size() != n)
    {
      throw ConfigError{"previous opinion matrix has " + std::to_string(prev->size()) + " rows, expected " +
                        std::to_string(n)};
    }
    for (const auto& row : prev->rows)
    {
      if (row.size() != n)
      {
        throw ConfigError{"previous opinion row cardinality does not match the number of states"};
      }
    }
  }

  const OpinionMatrix window = window_opinions(stats, cfg);

  IdentifierOutput out;
  out.conflicts.assign(n, 0.0);
  out.opinions.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    Opinion fresh = trust_discount(window.rows[i], cfg.discount_new[i]);
    if (!prev)
    {
      out.opinions.rows.push_back(std::move(fresh));
      continue;
    }
    const Opinion running = trust_discount(prev->rows[i], cfg.discount_prev[i]);
    const double dc = degree_of_conflict(running, fresh);
    out.conflicts[i] = dc;
    if (dc <= cfg.conflict_threshold)
    {
      out.opinions.rows.push_back(merge(fresh, running));
    }
    else
    {
      out.opinions.rows.push_back(std::move(fresh));
      out.reset_rows.insert(i);
    }
  }
  out.transition = out.opinions.project();
  out.stats = stats;
  return out;
}

/*------------------------------------------------------------------------------------------------*/

Identifier::Identifier(IdentifierConfig cfg)
  : cfg_{std::move(cfg)}
{
  cfg_.validate();
}

IdentifierOutput Identifier::update(const WindowStats& stats)
{
  auto out = step(state_, stats, cfg_);
  state_ = out.opinions;
  carry_ = stats.last_state;
  next_window_ = stats.window_index + 1;
  return out;
}

std::optional<IdentifierOutput> Identifier::advance(ObservationSource& source)
{
  auto stats = accumulate_window(source, cfg_, carry_, next_window_);
  if (!stats)
  {
    return std::nullopt;
  }
  return update(*stats);
}

std::vector<IdentifierOutput> run(ObservationSource& source, const IdentifierConfig& cfg)
{
  Identifier ident{cfg};
  std::vector<IdentifierOutput> outputs;
  while (auto out = ident.advance(source))
  {
    outputs.push_back(std::move(*out));
  }
  return outputs;
}

std::vector<IdentifierOutput> run(std::span<const StateId> states, const IdentifierConfig& cfg)
{
  SpanSource source{states};
  return run(source, cfg);
}

ClassicalEstimate classical_estimate(const WindowStats& stats)
{
  const std::size_t n = stats.num_states;
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  std::vector<bool> empty(n, false);
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto total = stats.row_total(i);
    if (total == 0)
    {
      empty[i] = true;
      rows[i].assign(n, 1.0 / static_cast<double>(n));
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      rows[i][j] = static_cast<double>(stats.count(i, j)) / static_cast<double>(total);
    }
  }
  return {TransitionMatrix{std::move(rows)}, std::move(empty)};
}

} // namespace slmc
