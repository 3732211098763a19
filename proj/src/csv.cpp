#include "slmc/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <string>

#include "slmc/errors.hpp"

namespace slmc::csv {

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
  {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
  {
    s.remove_suffix(1);
  }
  return s;
}

} // namespace

std::vector<std::string_view> split(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true)
  {
    const auto comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos)
    {
      break;
    }
    pos = comma + 1;
  }
  return fields;
}

double to_double(std::string_view field, std::size_t line)
{
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value))
  {
    throw TraceError{"expected a number, got '" + std::string{field} + "'", line};
  }
  return value;
}

std::uint64_t to_uint(std::string_view field, std::size_t line)
{
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end)
  {
    throw TraceError{"expected a non-negative integer, got '" + std::string{field} + "'", line};
  }
  return value;
}

std::string format(double value)
{
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string{buf, ptr} : std::string{"nan"};
}

bool Reader::next(std::vector<std::string_view>& fields)
{
  while (std::getline(in_, buffer_))
  {
    ++line_;
    std::string_view view = buffer_;
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ' || view.back() == '\t'))
    {
      view.remove_suffix(1);
    }
    if (view.empty())
    {
      continue;
    }
    fields = split(view);
    return true;
  }
  return false;
}

bool looks_like_header(const std::vector<std::string_view>& fields)
{
  if (fields.empty() || fields.front().empty())
  {
    return false;
  }
  double value = 0.0;
  const auto f = fields.front();
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  return ec != std::errc{} || ptr != f.data() + f.size();
}

} // namespace slmc::csv
