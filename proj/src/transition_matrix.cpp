#include "slmc/transition_matrix.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "slmc/errors.hpp"

namespace slmc {

TransitionMatrix::TransitionMatrix(std::vector<std::vector<double>> rows, double tolerance)
  : n_{rows.size()}
{
  if (n_ < 2)
  {
    throw InvalidInput{"transition matrix needs at least two states"};
  }
  probs_.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
  {
    if (rows[i].size() != n_)
    {
      throw InvalidInput{"transition matrix row " + std::to_string(i + 1) + " has wrong length"};
    }
    for (double p : rows[i])
    {
      if (!(p >= 0.0 && p <= 1.0))
      {
        throw InvalidInput{"transition matrix row " + std::to_string(i + 1) + " has entry outside [0,1]"};
      }
    }
    const double total = std::accumulate(rows[i].begin(), rows[i].end(), 0.0);
    if (std::abs(total - 1.0) > tolerance)
    {
      throw InvalidInput{"transition matrix row " + std::to_string(i + 1) + " sums to " + std::to_string(total)};
    }
    probs_.insert(probs_.end(), rows[i].begin(), rows[i].end());
  }
}

TransitionMatrix TransitionMatrix::identity(std::size_t n)
{
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
  {
    rows[i][i] = 1.0;
  }
  return TransitionMatrix{std::move(rows)};
}

std::vector<std::vector<double>> TransitionMatrix::rows() const
{
  std::vector<std::vector<double>> out(n_);
  for (std::size_t i = 0; i < n_; ++i)
  {
    out[i].assign(probs_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                  probs_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_));
  }
  return out;
}

TransitionMatrix TransitionMatrix::interpolate(const TransitionMatrix& from, const TransitionMatrix& to, double t)
{
  if (from.size() != to.size())
  {
    throw DomainMismatch{"cannot interpolate matrices of different size"};
  }
  TransitionMatrix out = from;
  for (std::size_t k = 0; k < out.probs_.size(); ++k)
  {
    out.probs_[k] = (1.0 - t) * from.probs_[k] + t * to.probs_[k];
  }
  return out;
}

} // namespace slmc
