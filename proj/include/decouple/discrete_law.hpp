#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "decouple/rng.hpp"

namespace decouple {

// Tolerances shared across the library.
inline constexpr double kValueMergeTol = 1e-12;  // atoms closer than this are one atom
inline constexpr double kProbSumTol = 1e-12;     // node/input normalization tolerance
inline constexpr double kMassTol = 1e-9;         // enumeration total-mass tolerance
inline constexpr double kDefaultTol = 1e-9;      // default check tolerance
inline constexpr std::size_t kDefaultCap = 10'000'000;  // enumeration cap (atoms)

// Finite law on the reals. Construction validates (finite values, probs >= 0,
// total within sum_tol of 1), sorts atoms by value, merges values within
// kValueMergeTol, drops zero-probability atoms, and renormalizes exactly.
class DiscreteLaw {
public:
  DiscreteLaw(std::vector<double> values, std::vector<double> probs,
              double sum_tol = kProbSumTol);

  static DiscreteLaw point_mass(double v);
  static DiscreteLaw bernoulli(double p);
  static DiscreteLaw rademacher();

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> probs() const { return probs_; }

  double mean() const;
  double second_moment() const;
  double variance() const;
  bool all_nonnegative() const;

  double sample(RngStream& rng) const;
  std::size_t sample_index(RngStream& rng) const;

  // Law of X + Y for independent X ~ *this, Y ~ other.
  DiscreteLaw convolve(const DiscreteLaw& other) const;

private:
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cum_;  // cumulative probabilities for inverse-CDF sampling
};

// Law of the sum of independent draws, one from each input law.
DiscreteLaw sum_of_independent(std::span<const DiscreteLaw> laws);

// Max |p - q| over the union of atom values (values matched within
// kValueMergeTol). Used by marginal-preservation checks.
double law_linf_distance(const DiscreteLaw& a, const DiscreteLaw& b);

}  // namespace decouple
