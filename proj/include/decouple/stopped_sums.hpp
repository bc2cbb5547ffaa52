#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decouple/bounds.hpp"
#include "decouple/discrete_law.hpp"

namespace decouple {

// Decides tau = i after seeing X_1..X_i (i = prefix.size()). The signature
// enforces the stopping-time property: the rule never sees the future. It is
// also consulted once with the empty prefix so that tau = 0 is expressible.
struct StoppingRule {
  std::string name;
  std::function<bool(std::span<const double>)> stop;
};

StoppingRule fixed_rule(int m);                     // tau = m
StoppingRule first_success_rule(double threshold);  // first i with X_i >= threshold
StoppingRule sum_at_least_rule(double threshold);   // first i with X_1+..+X_i >= threshold

// Randomly stopped sum of i.i.d. increments: increment mean/variance, an
// optional finite support (for enumeration and sampling), the stopping-time
// tail q_j = P(tau >= j) up to a finite horizon J, and an optional rule for
// path-dependent tau (used by samplers and the exact enumerator). q_1 < 1
// encodes P(tau = 0) = 1 - q_1 with S_tau = 0 on that event.
struct StoppedSumSpec {
  double mu = 0.0;
  double sigma2 = 0.0;
  std::optional<DiscreteLaw> increment_support;
  std::vector<double> tail;
  std::optional<StoppingRule> rule;

  std::size_t horizon() const { return tail.size(); }
  // Monotone tail in [0,1]; support moments match mu/sigma2 within 1e-9.
  void validate() const;
};

struct TauMoments {
  double e_tau = 0.0;
  double e_tau2 = 0.0;
};
// E tau = sum_j q_j and E tau^2 = sum_j (2j-1) q_j.
TauMoments tau_moments(std::span<const double> tail);

// Moments of S_tau' for tau' an independent copy of tau:
//   mean = mu E tau,
//   second moment = (mu^2 + sigma^2) E tau + 2 mu^2 sum_{j>=2} (j-1) q_j.
struct DecoupledStoppedMoments {
  double mean = 0.0;
  double second_moment = 0.0;
};
DecoupledStoppedMoments decoupled_stopped_moments(const StoppedSumSpec& spec);

// 2 E S_tau'^2 - (E S_tau')^2, the upper bound for E S_tau^2.
double decoupled_bound_rhs(const StoppedSumSpec& spec);

// Alternate series expression for the same bound,
// 2 mu^2 sum_{j>=2} (j-1) q_j + (2 mu^2 + 2 sigma^2 - mu) E tau, reported for
// cross-checking only; no equality with decoupled_bound_rhs is asserted.
double stopped_bound_series_form(const StoppedSumSpec& spec);

// Report with rhs from decoupled_bound_rhs; lhs (exact or Monte Carlo
// E S_tau^2) supplied by the caller when available.
BoundReport stopped_sum_upper_bound(const StoppedSumSpec& spec,
                                    std::optional<double> lhs,
                                    double tol = kDefaultTol);

// sigma^2 * E tau: the exact second moment when the increments are centered.
double wald_second_moment(double sigma2, double e_tau);

struct StoppedDraw {
  int tau = 0;
  double s_tau = 0.0;
  bool hit_horizon = false;  // stop forced at J without the rule firing
};

// Draw increments until the rule fires or the horizon J = tail.size() is hit.
// Requires increment_support and rule. Deterministic given the stream state.
StoppedDraw sample_stopped_sum(const StoppedSumSpec& spec, RngStream& rng);

// Draw tau' from the declared tail, then tau' independent increments. The
// result is distributed as S_tau' regardless of any rule.
StoppedDraw sample_decoupled_stopped_sum(const StoppedSumSpec& spec, RngStream& rng);

// Exact enumeration over increment paths with the rule applied after every
// draw (horizon-capped). Requires increment_support and rule.
struct ExactStopped {
  double mean = 0.0;
  double second_moment = 0.0;
  std::vector<double> tau_tail;  // P(tau >= j) induced by the rule
  double horizon_mass = 0.0;     // probability that the cap forced the stop
  std::vector<double> s_values;  // law of S_tau (merged)
  std::vector<double> s_probs;
};
ExactStopped enumerate_stopped(const StoppedSumSpec& spec,
                               std::size_t cap = kDefaultCap);

}  // namespace decouple
