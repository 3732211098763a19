#pragma once

// JSON run configuration. Every key is optional:
//
//   {
//     "identifier": {
//       "window": 100,
//       "prior_weight": 2,
//       "theta": 0.15,                 // number, or "inf" to never reset
//       "discount_prev": 0.999,        // number or one entry per state
//       "discount_new": 0.999,
//       "base_rates": [[0.5, 0.5], [0.5, 0.5]]
//     },
//     "delays": {
//       "margin_ms": 3, "harq_offset_ms": 7,
//       "baseline_window": 500, "cold_start": 50
//     },
//     "smooth_half_width": 25
//   }
//
// Precedence is command-line flag > config file > built-in default; the
// overrides below are layered in that order.

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "slmc/delay_pipeline.hpp"
#include "slmc/identifier.hpp"

namespace slmc {

struct IdentifierOverrides
{
  std::optional<std::size_t> window;
  std::optional<double> prior_weight;
  std::optional<double> theta;
  std::optional<std::vector<double>> discount_prev;
  std::optional<std::vector<double>> discount_new;
  std::optional<std::vector<std::vector<double>>> base_rates;

  /// Values set here replace those in `cfg`.
  void apply_to(IdentifierConfig& cfg) const;
};

struct DelayOverrides
{
  std::optional<double> margin_ms;
  std::optional<double> harq_offset_ms;
  std::optional<std::size_t> baseline_window;
  std::optional<std::size_t> cold_start;

  void apply_to(DelayConfig& cfg) const;
};

struct ConfigFile
{
  IdentifierOverrides identifier;
  DelayOverrides delays;
  std::optional<std::size_t> smooth_half_width;
};

/// Throws ConfigError on malformed JSON, unknown keys or wrong types.
ConfigFile parse_config(std::string_view json_text);
ConfigFile load_config(const std::filesystem::path& path);

} // namespace slmc
