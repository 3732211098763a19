#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace slmc {

/// Markov state identifier as it appears in observation streams: 1..N.
using StateId = std::uint32_t;

/// Row-stochastic N x N matrix, row i holding P(next = j | current = i).
class TransitionMatrix
{
public:
  TransitionMatrix() = default;

  /// Validates shape, entries in [0,1] and row sums within `tolerance`;
  /// throws InvalidInput otherwise.
  explicit TransitionMatrix(std::vector<std::vector<double>> rows, double tolerance = 1e-9);

  static TransitionMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return probs_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {probs_.data() + i * n_, n_}; }

  std::vector<std::vector<double>> rows() const;

  /// Convex combination (1 - t) * from + t * to, t in [0,1].
  static TransitionMatrix interpolate(const TransitionMatrix& from, const TransitionMatrix& to, double t);

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> probs_;
};

} // namespace slmc
