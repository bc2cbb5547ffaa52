#include "doctest.h"

#include <cmath>
#include <vector>

#include "decouple/bounds.hpp"
#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

using namespace decouple;

TEST_CASE("complete lower bound on the unit-vector model") {
  for (int n : {2, 3, 6, 10}) {
    const BoundReport r = complete_lower_bound(gallery_unit_vector(n));
    CHECK(*r.lhs == doctest::Approx((2.0 - 1.0 / n) / 2.0).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*r.slack == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-9));
    CHECK(*r.holds);
  }
}

TEST_CASE("complete lower bound halves exactly under independence") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::bernoulli(0.3),
                                          DiscreteLaw({0.0, 2.0}, {0.25, 0.75})};
  const BoundReport r = complete_lower_bound(tree_from_step_laws(steps));
  CHECK(*r.lhs == doctest::Approx(r.rhs / 2.0).epsilon(1e-9));
  CHECK(*r.slack == doctest::Approx(r.rhs / 2.0).epsilon(1e-9));
}

TEST_CASE("complete lower bound requires nonnegative values") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::rademacher()};
  CHECK_THROWS_AS(complete_lower_bound(tree_from_step_laws(steps)), ValidationError);
}

TEST_CASE("tangent upper bounds are tight on the remark-equality model") {
  const JointDecoupledSpace space = tangent_decouple(gallery_remark_equality());
  const BoundReport m2 = second_moment_upper(space);
  CHECK(*m2.lhs == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(m2.rhs == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(*m2.slack == doctest::Approx(0.0).epsilon(1e-9));
  const BoundReport var = variance_upper(space);
  CHECK(*var.lhs == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(var.rhs == doctest::Approx(4.0).epsilon(1e-9));
  const BoundReport ref = refined_upper(space);
  CHECK(ref.rhs == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(*ref.slack == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("upper bounds double under independence") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::bernoulli(0.6),
                                          DiscreteLaw::bernoulli(0.2)};
  const JointDecoupledSpace space = tangent_decouple(tree_from_step_laws(steps));
  const BoundReport m2 = second_moment_upper(space);
  CHECK(m2.rhs == doctest::Approx(2.0 * *m2.lhs).epsilon(1e-9));
}

TEST_CASE("variance bound on constant trees is zero on both sides") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::point_mass(1.5),
                                          DiscreteLaw::point_mass(1.5)};
  const JointDecoupledSpace space = tangent_decouple(tree_from_step_laws(steps));
  const BoundReport var = variance_upper(space);
  CHECK(*var.lhs == doctest::Approx(0.0));
  CHECK(var.rhs == doctest::Approx(0.0));
  CHECK(*var.holds);
  // refined bound collapses to equality: (nc)^2 on both sides
  const BoundReport ref = refined_upper(space);
  CHECK(*ref.lhs == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(ref.rhs == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("refined bound is never looser than the plain one") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const OutcomeTree tree =
        random_tree(1 + static_cast<int>(seed % 4), 3, -2.0, 2.0, false, seed);
    const JointDecoupledSpace space = tangent_decouple(tree);
    const BoundReport plain = second_moment_upper(space);
    const BoundReport refined = refined_upper(space);
    CHECK(refined.rhs <= plain.rhs + 1e-12);
    CHECK(*plain.slack >= -1e-9);
    CHECK(*variance_upper(space).slack >= -1e-9);
    CHECK(*refined.slack >= -1e-9);
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const OutcomeTree tree =
        random_tree(1 + static_cast<int>(seed % 4), 3, 0.0, 2.0, true, seed);
    CHECK(*complete_lower_bound(tree).slack >= -1e-9);
  }
}

TEST_CASE("chebyshev calculator") {
  CHECK(chebyshev_bound(0.5, 1.0) == doctest::Approx(1.0));
  CHECK(chebyshev_bound(0.0, 1.0) == doctest::Approx(0.0));
  CHECK(chebyshev_bound(0.1, 1.0) == doctest::Approx(0.2));
  double prev = 1.0;
  for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double b = chebyshev_bound(1.0, t);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
  CHECK_THROWS_AS(chebyshev_bound(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(chebyshev_bound(-1.0, 1.0), ValidationError);
}

TEST_CASE("chebyshev bound dominates the exact deviation probability") {
  // comonotone Ber(2, 1/2): S in {0, 2}, ES = 1, Var(sum e) = 1/2
  const OutcomeTree tree = gallery_comonotone_bernoulli(2, 0.5);
  const JointDecoupledSpace space = tangent_decouple(tree);
  const MomentSummary e = e_sum_moments(space);
  CHECK(e.variance == doctest::Approx(0.5).epsilon(1e-9));
  const PathTable& paths = space.index().paths;
  const double exact =
      kernels::mass_abs_deviation_above(paths.sums, paths.probs, 1.0, 1.0);
  CHECK(exact == doctest::Approx(0.0));  // |S-1| equals 1, never exceeds it
  CHECK(chebyshev_bound(e.variance, 1.0) >= exact);
}

TEST_CASE("paley-zygmund calculator") {
  // comonotone Ber(2, 1/2): ES = 1, E S'^2 = 1.5 by enumeration
  const JointDecoupledSpace space =
      tangent_decouple(gallery_comonotone_bernoulli(2, 0.5));
  const MomentSummary d = d_sum_moments(space);
  const MomentSummary e = e_sum_moments(space);
  CHECK(d.mean == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(e.second_moment == doctest::Approx(1.5).epsilon(1e-9));
  const double bound = paley_zygmund_bound(d.mean, e.second_moment, 0.5);
  CHECK(bound == doctest::Approx(0.125).epsilon(1e-9));
  const PathTable& paths = space.index().paths;
  const double exact = kernels::mass_above(paths.sums, paths.probs, 0.5 * d.mean);
  CHECK(exact == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(exact >= bound);

  // theta -> 1 sends the bound to zero
  CHECK(paley_zygmund_bound(1.0, 1.5, 0.999) ==
        doctest::Approx(0.0).epsilon(1e-4));
  // deterministic positive sum: E S'^2 = (E S)^2, bound = (1-theta)^2
  CHECK(paley_zygmund_bound(2.0, 4.0, 0.25) == doctest::Approx(0.5625));

  CHECK_THROWS_AS(paley_zygmund_bound(1.0, 1.5, 0.0), ValidationError);
  CHECK_THROWS_AS(paley_zygmund_bound(1.0, 1.5, 1.0), ValidationError);
  CHECK_THROWS_AS(paley_zygmund_bound(-1.0, 1.5, 0.5), ValidationError);
  CHECK_THROWS_AS(paley_zygmund_bound(2.0, 1.0, 0.5), ValidationError);
}

TEST_CASE("bound reports keep holds consistent with slack") {
  const BoundReport upper =
      make_bound_report("second_moment_upper", 1.0, 1.5,
                        SlackOrientation::rhs_minus_lhs, 1e-9);
  CHECK(*upper.slack == doctest::Approx(0.5));
  CHECK(*upper.holds);
  const BoundReport lower = make_bound_report(
      "paley_zygmund", 0.1, 0.4, SlackOrientation::lhs_minus_rhs, 1e-9);
  CHECK(*lower.slack == doctest::Approx(-0.3));
  CHECK(!*lower.holds);
  const BoundReport open =
      make_bound_report("stopped_sum_upper", std::nullopt, 2.0,
                        SlackOrientation::rhs_minus_lhs, 1e-9);
  CHECK(!open.lhs.has_value());
  CHECK(!open.holds.has_value());
}
