#include "decouple/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

namespace decouple {

BoundReport make_bound_report(std::string id, std::optional<double> lhs, double rhs,
                              SlackOrientation orientation, double tol,
                              std::string detail) {
  BoundReport report;
  report.inequality_id = std::move(id);
  report.detail = std::move(detail);
  report.lhs = lhs;
  report.rhs = rhs;
  report.tol = tol;
  if (lhs) {
    const double slack = orientation == SlackOrientation::rhs_minus_lhs
                             ? rhs - *lhs
                             : *lhs - rhs;
    if (!std::isfinite(slack))
      throw ValidationError("bound report: non-finite slack for " +
                            report.inequality_id);
    report.slack = slack;
    report.holds = slack >= -tol;
  }
  return report;
}

BoundReport complete_lower_bound(const OutcomeTree& tree, double tol,
                                 std::size_t cap) {
  if (!tree.all_values_nonnegative())
    throw ValidationError(
        "complete_lower: the lower bound requires nonnegative step values");
  const DiscreteLaw z_sum = MarginalProduct{tree.step_marginals()}.sum_law();
  const double lhs = 0.5 * exact_moments(z_sum).second_moment;
  const double rhs = exact_moments(sum_law(tree, cap)).second_moment;
  return make_bound_report("complete_lower", lhs, rhs,
                           SlackOrientation::rhs_minus_lhs, tol);
}

BoundReport second_moment_upper(const JointDecoupledSpace& space, double tol) {
  const double lhs = d_sum_moments(space).second_moment;
  const double rhs = 2.0 * e_sum_moments(space).second_moment;
  return make_bound_report("second_moment_upper", lhs, rhs,
                           SlackOrientation::rhs_minus_lhs, tol);
}

BoundReport variance_upper(const JointDecoupledSpace& space, double tol) {
  const PathTable& paths = space.index().paths;
  const double d_mean = kernels::dot(paths.sums, paths.probs);
  const double e_mean = kernels::dot(space.e_sums(), space.probs());
  const double lhs = kernels::weighted_centered_sq(paths.sums, paths.probs, d_mean);
  const double rhs =
      2.0 * kernels::weighted_centered_sq(space.e_sums(), space.probs(), e_mean);
  return make_bound_report("variance_upper", lhs, rhs,
                           SlackOrientation::rhs_minus_lhs, tol);
}

BoundReport refined_upper(const JointDecoupledSpace& space, double tol) {
  const double lhs = d_sum_moments(space).second_moment;
  const MomentSummary e = e_sum_moments(space);
  const double rhs = 2.0 * e.second_moment - e.mean * e.mean;
  return make_bound_report("refined_upper", lhs, rhs,
                           SlackOrientation::rhs_minus_lhs, tol);
}

double chebyshev_bound(double var_decoupled, double t) {
  if (!(t > 0.0)) throw ValidationError("chebyshev: t must be > 0");
  if (!(var_decoupled >= 0.0))
    throw ValidationError("chebyshev: decoupled variance must be >= 0");
  return std::min(1.0, 2.0 * var_decoupled / (t * t));
}

double paley_zygmund_bound(double mean_s, double second_moment_decoupled,
                           double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw ValidationError("paley_zygmund: theta must be in (0, 1)");
  if (!(mean_s > 0.0)) throw ValidationError("paley_zygmund: E S must be > 0");
  const double denom = 2.0 * second_moment_decoupled - mean_s * mean_s;
  if (!(denom > 0.0))
    throw ValidationError(
        "paley_zygmund: nonpositive denominator; 2 E S'^2 >= (E S)^2 must hold "
        "for a valid tangent pair, so the inputs are inconsistent");
  const double raw = (1.0 - theta) * (1.0 - theta) * mean_s * mean_s / denom;
  return std::clamp(raw, 0.0, 1.0);
}

}  // namespace decouple
