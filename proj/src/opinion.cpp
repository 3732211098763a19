#include "slmc/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "slmc/errors.hpp"

namespace slmc {

namespace {

// Rounding noise below this is left alone.
constexpr double renormalize_threshold = 1e-12;
// Drift beyond this after an operation signals a logic error, not rounding.
constexpr double drift_limit = 1e-6;

double sum(std::span<const double> v)
{
  return std::accumulate(v.begin(), v.end(), 0.0);
}

void check_unit_interval(std::span<const double> v, double tol, const char* what)
{
  for (double x : v)
  {
    if (!(x >= -tol && x <= 1.0 + tol))
    {
      throw InvalidInput{std::string{what} + " component " + std::to_string(x) + " outside [0,1]"};
    }
  }
}

void clamp_unit(std::vector<double>& v)
{
  for (double& x : v)
  {
    x = std::clamp(x, 0.0, 1.0);
  }
}

void check_base_rate(std::span<const double> a, double tol)
{
  check_unit_interval(a, tol, "base rate");
  if (std::abs(sum(a) - 1.0) > tol)
  {
    throw InvalidInput{"base rate sums to " + std::to_string(sum(a)) + ", expected 1"};
  }
}

void renormalize_base_rate(std::vector<double>& a)
{
  clamp_unit(a);
  const double total = sum(a);
  if (std::abs(total - 1.0) > renormalize_threshold)
  {
    for (double& x : a)
    {
      x /= total;
    }
  }
}

} // namespace

Opinion::Opinion(std::vector<double> belief, double uncertainty, std::vector<double> base_rate)
{
  if (belief.size() < 2)
  {
    throw InvalidInput{"opinion domain needs at least two outcomes"};
  }
  if (belief.size() != base_rate.size())
  {
    throw InvalidInput{"belief and base rate have different lengths"};
  }
  check_unit_interval(belief, mass_tolerance, "belief");
  check_unit_interval(std::span<const double>{&uncertainty, 1}, mass_tolerance, "uncertainty");
  check_base_rate(base_rate, mass_tolerance);
  if (std::abs(uncertainty + sum(belief) - 1.0) > mass_tolerance)
  {
    throw InvalidInput{"belief and uncertainty masses do not sum to 1"};
  }
  *this = settle(std::move(belief), uncertainty, std::move(base_rate));
}

Opinion::Opinion(trusted_tag, std::vector<double> belief, double uncertainty, std::vector<double> base_rate)
  : belief_{std::move(belief)}
  , uncertainty_{uncertainty}
  , base_rate_{std::move(base_rate)}
{}

Opinion Opinion::settle(std::vector<double> belief, double uncertainty, std::vector<double> base_rate)
{
  if (belief.size() < 2 || belief.size() != base_rate.size())
  {
    throw InvariantViolation{"opinion cardinality mismatch"};
  }
  try
  {
    check_unit_interval(belief, drift_limit, "belief");
    check_unit_interval(std::span<const double>{&uncertainty, 1}, drift_limit, "uncertainty");
    check_base_rate(base_rate, drift_limit);
  }
  catch (const InvalidInput& e)
  {
    throw InvariantViolation{e.what()};
  }

  clamp_unit(belief);
  uncertainty = std::clamp(uncertainty, 0.0, 1.0);
  renormalize_base_rate(base_rate);

  const double total = uncertainty + sum(belief);
  const double drift = total - 1.0;
  if (std::abs(drift) > drift_limit)
  {
    throw InvariantViolation{"u + sum(b) drifted to " + std::to_string(total)};
  }
  if (std::abs(drift) > renormalize_threshold)
  {
    for (double& b : belief)
    {
      b /= total;
    }
    uncertainty /= total;
  }
  return Opinion{trusted_tag{}, std::move(belief), uncertainty, std::move(base_rate)};
}

Opinion Opinion::vacuous(std::vector<double> base_rate)
{
  std::vector<double> belief(base_rate.size(), 0.0);
  return Opinion{std::move(belief), 1.0, std::move(base_rate)};
}

std::vector<double> Opinion::uniform_base_rate(std::size_t k)
{
  if (k < 2)
  {
    throw InvalidInput{"opinion domain needs at least two outcomes"};
  }
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

/*------------------------------------------------------------------------------------------------*/

EvidenceVector::EvidenceVector(std::vector<double> evidence, double prior_weight, std::vector<double> base_rate)
  : evidence_{std::move(evidence)}
  , prior_weight_{prior_weight}
  , base_rate_{std::move(base_rate)}
{
  if (evidence_.size() < 2)
  {
    throw InvalidInput{"evidence domain needs at least two outcomes"};
  }
  if (evidence_.size() != base_rate_.size())
  {
    throw InvalidInput{"evidence and base rate have different lengths"};
  }
  for (double r : evidence_)
  {
    if (!(r >= 0.0) || !std::isfinite(r))
    {
      throw InvalidInput{"evidence must be finite and non-negative"};
    }
  }
  if (!(prior_weight_ > 0.0) || !std::isfinite(prior_weight_))
  {
    throw InvalidInput{"prior weight must be positive"};
  }
  check_base_rate(base_rate_, mass_tolerance);
}

double EvidenceVector::total() const noexcept
{
  return sum(evidence_);
}

std::vector<double> EvidenceVector::alpha() const
{
  std::vector<double> a(evidence_.size());
  for (std::size_t x = 0; x < a.size(); ++x)
  {
    a[x] = evidence_[x] + base_rate_[x] * prior_weight_;
  }
  return a;
}

/*------------------------------------------------------------------------------------------------*/

std::vector<double> project(const Opinion& op)
{
  std::vector<double> p(op.size());
  const auto b = op.belief();
  const auto a = op.base_rate();
  for (std::size_t x = 0; x < p.size(); ++x)
  {
    p[x] = std::clamp(b[x] + a[x] * op.uncertainty(), 0.0, 1.0);
  }
  return p;
}

Opinion opinion_from_evidence(const EvidenceVector& ev)
{
  const double denom = ev.prior_weight() + ev.total();
  std::vector<double> belief(ev.size());
  for (std::size_t x = 0; x < belief.size(); ++x)
  {
    belief[x] = ev.evidence()[x] / denom;
  }
  const auto a = ev.base_rate();
  return Opinion::settle(std::move(belief), ev.prior_weight() / denom, {a.begin(), a.end()});
}

EvidenceVector evidence_from_opinion(const Opinion& op, double prior_weight)
{
  if (op.is_dogmatic())
  {
    throw DogmaticOpinion{"dogmatic opinion (u = 0) has no finite evidence"};
  }
  if (!(prior_weight > 0.0))
  {
    throw ParameterError{"prior weight must be positive"};
  }
  std::vector<double> r(op.size());
  for (std::size_t x = 0; x < r.size(); ++x)
  {
    r[x] = prior_weight * op.belief()[x] / op.uncertainty();
  }
  const auto a = op.base_rate();
  return EvidenceVector{std::move(r), prior_weight, {a.begin(), a.end()}};
}

double dirichlet_pdf(const EvidenceVector& ev, std::span<const double> p)
{
  if (p.size() != ev.size())
  {
    throw DomainMismatch{"probability vector and evidence differ in length"};
  }
  const auto alpha = ev.alpha();
  for (double a : alpha)
  {
    if (!(a > 0.0))
    {
      throw ParameterError{"Dirichlet parameter alpha must be positive"};
    }
  }
  check_unit_interval(p, 0.0, "probability");
  if (std::abs(sum(p) - 1.0) > mass_tolerance)
  {
    throw InvalidInput{"probability vector does not sum to 1"};
  }

  double log_density = std::lgamma(sum(alpha));
  for (std::size_t x = 0; x < alpha.size(); ++x)
  {
    log_density -= std::lgamma(alpha[x]);
    if (p[x] == 0.0)
    {
      if (alpha[x] < 1.0)
      {
        throw InvalidInput{"density unbounded: zero probability where alpha < 1"};
      }
      if (alpha[x] > 1.0)
      {
        return 0.0;
      }
      continue;
    }
    log_density += (alpha[x] - 1.0) * std::log(p[x]);
  }
  return std::exp(log_density);
}

Opinion cumulative_fuse(const Opinion& a, const Opinion& b)
{
  if (a.size() != b.size())
  {
    throw DomainMismatch{"cannot fuse opinions over domains of different size"};
  }
  const double ua = a.uncertainty();
  const double ub = b.uncertainty();
  if (!(ua > 0.0 && ua < 1.0) || !(ub > 0.0 && ub < 1.0))
  {
    throw FusionDomainError{"cumulative fusion needs 0 < u < 1 on both operands"};
  }

  const std::size_t k = a.size();
  const double denom = ua + ub - ua * ub;
  std::vector<double> belief(k);
  for (std::size_t x = 0; x < k; ++x)
  {
    belief[x] = (a.belief()[x] * ub + b.belief()[x] * ua) / denom;
  }
  const double u = ua * ub / denom;

  const auto aa = a.base_rate();
  const auto ab = b.base_rate();
  const bool shared = std::equal(aa.begin(), aa.end(), ab.begin(),
                                 [](double x, double y) { return std::abs(x - y) <= mass_tolerance; });
  std::vector<double> base_rate(aa.begin(), aa.end());
  if (!shared)
  {
    const double denom_a = ua + ub - 2.0 * ua * ub;
    for (std::size_t x = 0; x < k; ++x)
    {
      base_rate[x] = (aa[x] * ub + ab[x] * ua - (aa[x] + ab[x]) * ua * ub) / denom_a;
    }
  }
  return Opinion::settle(std::move(belief), u, std::move(base_rate));
}

Opinion trust_discount(const Opinion& op, double discount)
{
  if (!(discount >= 0.0 && discount <= 1.0))
  {
    throw ParameterError{"discount probability must lie in [0,1]"};
  }
  std::vector<double> belief(op.belief().begin(), op.belief().end());
  for (double& b : belief)
  {
    b *= discount;
  }
  const double u = 1.0 - discount * sum(op.belief());
  const auto a = op.base_rate();
  return Opinion::settle(std::move(belief), u, {a.begin(), a.end()});
}

double degree_of_conflict(const Opinion& prev, const Opinion& next)
{
  if (prev.size() != next.size())
  {
    throw DomainMismatch{"degree of conflict needs opinions over the same domain"};
  }
  const auto p_prev = project(prev);
  const auto p_next = project(next);
  double distance = 0.0;
  for (std::size_t x = 0; x < p_prev.size(); ++x)
  {
    distance += std::abs(p_prev[x] - p_next[x]);
  }
  const double dc = 0.5 * distance * (1.0 - prev.uncertainty()) * (1.0 - next.uncertainty());
  return std::clamp(dc, 0.0, 1.0);
}

} // namespace slmc
