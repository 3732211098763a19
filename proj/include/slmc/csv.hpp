#pragma once

// Minimal CSV helpers for the flat numeric files this project reads and
// writes: comma-separated, no quoting, optional header row.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace slmc::csv {

/// Splits on commas and trims surrounding blanks (and a trailing '\r').
std::vector<std::string_view> split(std::string_view line);

/// Whole-field conversions; throw TraceError carrying `line`.
double to_double(std::string_view field, std::size_t line);
std::uint64_t to_uint(std::string_view field, std::size_t line);

/// Shortest representation that round-trips.
std::string format(double value);

/// Line reader that tracks 1-based line numbers and skips blank lines.
class Reader
{
public:
  explicit Reader(std::istream& in) : in_{in} {}

  /// Next non-blank line split into fields; false at end of input.
  bool next(std::vector<std::string_view>& fields);
  std::size_t line() const noexcept { return line_; }

private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

/// True if the first field does not parse as a number.
bool looks_like_header(const std::vector<std::string_view>& fields);

} // namespace slmc::csv
