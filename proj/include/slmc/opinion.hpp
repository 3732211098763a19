#pragma once

// Subjective-logic algebra over a finite domain of k >= 2 outcomes.
//
// An Opinion is the triple (belief, uncertainty, base rate) with
// u + sum(belief) = 1 and sum(base rate) = 1. It corresponds one-to-one to a
// Dirichlet distribution whose parameters are alpha(x) = r(x) + a(x) W, where
// r is the evidence and W the non-informative prior weight.
//
// All values are immutable and every operation is a pure function.

#include <span>
#include <vector>

namespace slmc {

/// Absolute tolerance used when validating user-supplied masses.
inline constexpr double mass_tolerance = 1e-9;

/// Non-informative prior weight of the binomial/multinomial convention.
inline constexpr double default_prior_weight = 2.0;

class Opinion
{
public:
  /// Validates the invariants (k >= 2, masses in [0,1], sums equal to 1
  /// within mass_tolerance); throws InvalidInput otherwise.
  Opinion(std::vector<double> belief, double uncertainty, std::vector<double> base_rate);

  /// Opinion with no belief mass at all (u = 1).
  static Opinion vacuous(std::vector<double> base_rate);

  /// Uniform base rate over k outcomes.
  static std::vector<double> uniform_base_rate(std::size_t k);

  std::size_t size() const noexcept { return belief_.size(); }
  std::span<const double> belief() const noexcept { return belief_; }
  double belief(std::size_t x) const { return belief_.at(x); }
  double uncertainty() const noexcept { return uncertainty_; }
  std::span<const double> base_rate() const noexcept { return base_rate_; }

  bool is_vacuous() const noexcept { return uncertainty_ == 1.0; }
  bool is_dogmatic() const noexcept { return uncertainty_ == 0.0; }

  /// Builds the result of an internal computation. Drift of u + sum(b) from
  /// 1 above 1e-12 is renormalized away; above 1e-6 it is treated as a logic
  /// error and raises InvariantViolation.
  static Opinion settle(std::vector<double> belief, double uncertainty, std::vector<double> base_rate);

private:
  struct trusted_tag {};
  Opinion(trusted_tag, std::vector<double> belief, double uncertainty, std::vector<double> base_rate);

  std::vector<double> belief_;
  double uncertainty_;
  std::vector<double> base_rate_;
};

/// Dirichlet evidence r, prior weight W and base rate a.
class EvidenceVector
{
public:
  /// Throws InvalidInput unless r >= 0, W > 0, sum(a) = 1 and sizes agree.
  EvidenceVector(std::vector<double> evidence, double prior_weight, std::vector<double> base_rate);

  std::size_t size() const noexcept { return evidence_.size(); }
  std::span<const double> evidence() const noexcept { return evidence_; }
  double prior_weight() const noexcept { return prior_weight_; }
  std::span<const double> base_rate() const noexcept { return base_rate_; }

  /// Sum of r over the domain.
  double total() const noexcept;

  /// Dirichlet parameters alpha(x) = r(x) + a(x) W.
  std::vector<double> alpha() const;

private:
  std::vector<double> evidence_;
  double prior_weight_;
  std::vector<double> base_rate_;
};

/// Projected probability P(x) = b(x) + a(x) u.
std::vector<double> project(const Opinion& op);

/// Equivalent mapping, evidence to opinion: b = r / (W + sum r), u = W / (W + sum r).
Opinion opinion_from_evidence(const EvidenceVector& ev);

/// Equivalent mapping, opinion to evidence: r = W b / u.
/// Throws DogmaticOpinion when u = 0 and ParameterError when W <= 0.
EvidenceVector evidence_from_opinion(const Opinion& op, double prior_weight);

/// Dirichlet density at the probability vector p.
///
/// p must lie on the simplex (components >= 0, sum 1 within mass_tolerance);
/// a zero component is only admissible where alpha(x) >= 1. Throws
/// ParameterError when some alpha(x) <= 0 and InvalidInput for p outside the
/// support.
double dirichlet_pdf(const EvidenceVector& ev, std::span<const double> p);

/// Aleatory cumulative belief fusion. Both operands need 0 < u < 1
/// (FusionDomainError otherwise) and equal cardinality (DomainMismatch).
/// When the operand base rates agree within mass_tolerance the shared base
/// rate is carried through unchanged.
Opinion cumulative_fuse(const Opinion& a, const Opinion& b);

/// Trust discounting: b' = d b, u' = 1 - d sum(b), base rate unchanged.
/// Throws ParameterError unless 0 <= discount <= 1.
Opinion trust_discount(const Opinion& op, double discount);

/// Degree of conflict
///   DC = 1/2 sum |P_prev(x) - P_new(x)| (1 - u_prev)(1 - u_new),
/// in [0,1]. Throws DomainMismatch on cardinality mismatch.
double degree_of_conflict(const Opinion& prev, const Opinion& next);

} // namespace slmc
