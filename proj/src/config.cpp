#include "slmc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "slmc/errors.hpp"

namespace slmc {

using nlohmann::json;

void IdentifierOverrides::apply_to(IdentifierConfig& cfg) const
{
  if (window)
  {
    cfg.window_len = *window;
  }
  if (prior_weight)
  {
    cfg.prior_weight = *prior_weight;
  }
  if (theta)
  {
    cfg.conflict_threshold = *theta;
  }
  if (discount_prev)
  {
    cfg.discount_prev = *discount_prev;
  }
  if (discount_new)
  {
    cfg.discount_new = *discount_new;
  }
  if (base_rates)
  {
    cfg.base_rates = *base_rates;
  }
}

void DelayOverrides::apply_to(DelayConfig& cfg) const
{
  if (margin_ms)
  {
    cfg.margin_ms = *margin_ms;
  }
  if (harq_offset_ms)
  {
    cfg.harq_offset_ms = *harq_offset_ms;
  }
  if (baseline_window)
  {
    cfg.baseline_window = *baseline_window;
  }
  if (cold_start)
  {
    cfg.cold_start = *cold_start;
  }
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where)
{
  for (const auto& [key, value] : obj.items())
  {
    if (known.count(key) == 0)
    {
      throw ConfigError{where + ": unknown key '" + key + "'"};
    }
  }
}

template <typename T>
std::optional<T> get(const json& obj, const char* key, const std::string& where)
{
  if (!obj.contains(key))
  {
    return std::nullopt;
  }
  try
  {
    return obj.at(key).get<T>();
  }
  catch (const json::exception&)
  {
    throw ConfigError{where + ": key '" + key + "' has the wrong type"};
  }
}

std::optional<std::vector<double>> get_per_row(const json& obj, const char* key, const std::string& where)
{
  if (!obj.contains(key))
  {
    return std::nullopt;
  }
  if (obj.at(key).is_number())
  {
    return std::vector<double>{obj.at(key).get<double>()};
  }
  return get<std::vector<double>>(obj, key, where);
}

} // namespace

ConfigFile parse_config(std::string_view json_text)
{
  json doc;
  try
  {
    doc = json::parse(json_text);
  }
  catch (const json::parse_error& e)
  {
    throw ConfigError{std::string{"config: invalid JSON: "} + e.what()};
  }
  if (!doc.is_object())
  {
    throw ConfigError{"config: top level must be an object"};
  }
  reject_unknown(doc, {"identifier", "delays", "smooth_half_width"}, "config");

  ConfigFile cfg;
  cfg.smooth_half_width = get<std::size_t>(doc, "smooth_half_width", "config");

  if (doc.contains("identifier"))
  {
    const auto& id = doc["identifier"];
    const std::string where = "config.identifier";
    if (!id.is_object())
    {
      throw ConfigError{where + " must be an object"};
    }
    reject_unknown(id, {"window", "prior_weight", "theta", "discount_prev", "discount_new", "base_rates"}, where);
    auto& o = cfg.identifier;
    o.window = get<std::size_t>(id, "window", where);
    o.prior_weight = get<double>(id, "prior_weight", where);
    if (id.contains("theta") && id["theta"].is_string())
    {
      if (id["theta"].get<std::string>() != "inf")
      {
        throw ConfigError{where + ": theta must be a number or \"inf\""};
      }
      o.theta = never_reset;
    }
    else
    {
      o.theta = get<double>(id, "theta", where);
    }
    o.discount_prev = get_per_row(id, "discount_prev", where);
    o.discount_new = get_per_row(id, "discount_new", where);
    o.base_rates = get<std::vector<std::vector<double>>>(id, "base_rates", where);
  }

  if (doc.contains("delays"))
  {
    const auto& d = doc["delays"];
    const std::string where = "config.delays";
    if (!d.is_object())
    {
      throw ConfigError{where + " must be an object"};
    }
    reject_unknown(d, {"margin_ms", "harq_offset_ms", "baseline_window", "cold_start"}, where);
    cfg.delays.margin_ms = get<double>(d, "margin_ms", where);
    cfg.delays.harq_offset_ms = get<double>(d, "harq_offset_ms", where);
    cfg.delays.baseline_window = get<std::size_t>(d, "baseline_window", where);
    cfg.delays.cold_start = get<std::size_t>(d, "cold_start", where);
  }
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path)
{
  std::ifstream in{path};
  if (!in)
  {
    throw IoError{"cannot open config file " + path.string()};
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

} // namespace slmc
