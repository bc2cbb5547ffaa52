#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decouple/decoupling.hpp"

namespace decouple {

// Mean / second moment / variance, computed exactly or estimated with a
// standard error. Estimated summaries also carry the SE of the second-moment
// estimate so both fields can be z-gated.
struct MomentSummary {
  enum class Kind { exact, estimated };

  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  Kind kind = Kind::exact;
  double std_error = 0.0;                // SE of the mean (estimated only)
  double second_moment_std_error = 0.0;  // SE of the second moment (estimated only)
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

MomentSummary exact_moments(std::span<const double> values,
                            std::span<const double> probs);
MomentSummary exact_moments(const DiscreteLaw& law);

// Moments of sum d_i / sum e_i over the enumerated joint space.
MomentSummary d_sum_moments(const JointDecoupledSpace& space);
MomentSummary e_sum_moments(const JointDecoupledSpace& space);

// E(sum e | G) per d-path: the running sum of conditional means along each
// path, read off the tree nodes directly rather than by dividing joint sums.
struct ProjectionTable {
  std::vector<double> values;  // aligned with the space's path table
  std::vector<double> probs;
  double expectation() const;
  // d-path values, probability, projection value; one path per row.
  std::string to_csv(const PathTable& paths) const;
};

ProjectionTable project_on_G(const JointDecoupledSpace& space);

// |E(sum e)^2 - E[sum e - E(sum e|G)]^2 - E[E(sum e|G)]^2|
double check_decomposition(const JointDecoupledSpace& space);

// lhs = E[sum d - E(sum e|G)]^2, rhs = E[sum e - E(sum e|G)]^2; the two agree
// on every valid tangent construction.
struct DistancePair {
  double lhs = 0.0;
  double rhs = 0.0;
};
DistancePair check_distance_equality(const JointDecoupledSpace& space);

// Max over i<j of |E[(d_i - E(e_i|G))(d_j - E(e_j|G))]| and the analogous
// e-side term; zero (to rounding) on valid spaces.
double max_cross_term(const JointDecoupledSpace& space);

}  // namespace decouple
