#pragma once

#include <optional>
#include <string>

#include "decouple/moments.hpp"

namespace decouple {

// Whether the bound sits on the rhs above the lhs (upper-style, slack =
// rhs - lhs) or below it (lower-style, slack = lhs - rhs). In both cases a
// nonnegative slack means the inequality holds.
enum class SlackOrientation { rhs_minus_lhs, lhs_minus_rhs };

// One inequality evaluation. lhs/slack/holds are absent only when the bounded
// quantity is not computable (rhs-only stopped-sum reports).
struct BoundReport {
  std::string inequality_id;
  std::string detail;  // parameter tag for families, e.g. "t=0.5"
  std::optional<double> lhs;
  double rhs = 0.0;
  std::optional<double> slack;
  std::optional<bool> holds;
  double tol = kDefaultTol;
};

BoundReport make_bound_report(std::string id, std::optional<double> lhs, double rhs,
                              SlackOrientation orientation, double tol,
                              std::string detail = {});

// lhs = (1/2) E(sum z)^2 from the step marginals, rhs = E(sum d)^2. Requires
// every step value to be nonnegative; without that the lower bound fails
// (opposite-sign steps can cancel the dependent sum entirely).
BoundReport complete_lower_bound(const OutcomeTree& tree, double tol = kDefaultTol,
                                 std::size_t cap = kDefaultCap);

// lhs = E(sum d)^2, rhs = 2 E(sum e)^2.
BoundReport second_moment_upper(const JointDecoupledSpace& space,
                                double tol = kDefaultTol);

// lhs = Var(sum d), rhs = 2 Var(sum e); computed on the centered sums
// (d_i - E d_i and e_i - E e_i have the same tangent structure).
BoundReport variance_upper(const JointDecoupledSpace& space, double tol = kDefaultTol);

// lhs = E(sum d)^2, rhs = 2 E(sum e)^2 - [E(sum e)]^2; never looser than the
// plain second-moment bound.
BoundReport refined_upper(const JointDecoupledSpace& space, double tol = kDefaultTol);

// min(1, 2 var_decoupled / t^2), an upper bound for P(|S - ES| > t) when
// var_decoupled = Var(sum e). Requires t > 0 and var_decoupled >= 0.
double chebyshev_bound(double var_decoupled, double t);

// (1-theta)^2 (E S)^2 / (2 E S'^2 - (E S)^2), clamped to [0,1]: a lower bound
// for P(S > theta E S) for nonnegative S, with S' the decoupled sum. Requires
// 0 < theta < 1, E S > 0, and a positive denominator (2 E S'^2 >= E S^2 >=
// (E S)^2 holds for every valid tangent pair, so a nonpositive denominator
// signals inconsistent inputs).
double paley_zygmund_bound(double mean_s, double second_moment_decoupled,
                           double theta);

}  // namespace decouple
