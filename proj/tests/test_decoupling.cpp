#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "decouple/decoupling.hpp"
#include "decouple/errors.hpp"

using namespace decouple;

namespace {

double law_prob_at(const DiscreteLaw& law, double value) {
  for (std::size_t i = 0; i < law.size(); ++i)
    if (std::fabs(law.values()[i] - value) <= 1e-9) return law.probs()[i];
  return 0.0;
}

// Empirical law of one e column, straight off the atoms.
std::map<double, double> e_marginal(const JointDecoupledSpace& space, int step) {
  std::map<double, double> out;
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    out[space.e_value(a, step)] += space.probs()[a];
  return out;
}

}  // namespace

TEST_CASE("complete decoupling of the unit-vector model") {
  const int n = 4;
  const MarginalProduct z = complete_decouple(gallery_unit_vector(n));
  REQUIRE(z.laws.size() == static_cast<std::size_t>(n));
  for (const DiscreteLaw& law : z.laws) {
    CHECK(law_prob_at(law, 1.0) == doctest::Approx(1.0 / n).epsilon(1e-9));
    CHECK(law_prob_at(law, 0.0) == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-9));
  }
  CHECK(z.sum_law().second_moment() ==
        doctest::Approx(2.0 - 1.0 / n).epsilon(1e-9));
}

TEST_CASE("complete decoupling is idempotent on independent-step trees") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::bernoulli(0.25),
                                          DiscreteLaw({-1.0, 0.0, 2.0},
                                                      {0.25, 0.5, 0.25})};
  const OutcomeTree tree = tree_from_step_laws(steps);
  const MarginalProduct once = complete_decouple(tree);
  REQUIRE(once.laws.size() == steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    CHECK(law_linf_distance(once.laws[i], steps[i]) <= 1e-12);
  // again through the induced product tree: the same laws come back
  const MarginalProduct twice = complete_decouple(tree_from_step_laws(once.laws));
  for (std::size_t i = 0; i < steps.size(); ++i)
    CHECK(law_linf_distance(twice.laws[i], once.laws[i]) <= 1e-12);
}

TEST_CASE("complete decoupling of the comonotone model") {
  const double p = 0.35;
  const MarginalProduct z = complete_decouple(gallery_comonotone_bernoulli(2, p));
  for (const DiscreteLaw& law : z.laws)
    CHECK(law_prob_at(law, 1.0) == doctest::Approx(p).epsilon(1e-12));
  CHECK(z.sum_law().second_moment() ==
        doctest::Approx(2 * p * (2 * p + 1 - p)).epsilon(1e-9));
}

TEST_CASE("tangent construction on the remark-equality model") {
  const JointDecoupledSpace space = tangent_decouple(gallery_remark_equality());
  CHECK(space.atom_count() == 4);  // 2 d-paths x 2 e1 choices x forced e2
  // e1 is an unconditional Rademacher draw, e2 copies d1
  const auto m1 = e_marginal(space, 0);
  CHECK(m1.at(1.0) == doctest::Approx(0.5));
  CHECK(m1.at(-1.0) == doctest::Approx(0.5));
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    CHECK(space.e_value(a, 1) == space.d_values_of(a)[0]);
  CHECK(verify_tangency(space) <= 1e-9);
  CHECK(verify_conditional_independence(space) <= 1e-9);
}

TEST_CASE("tangent construction on a one-step tree is an independent copy") {
  const DiscreteLaw law({0.0, 1.0, 3.0}, {0.2, 0.5, 0.3});
  const OutcomeTree tree = tree_from_step_laws(std::vector<DiscreteLaw>{law});
  const JointDecoupledSpace space = tangent_decouple(tree);
  CHECK(space.atom_count() == 9);
  for (std::size_t a = 0; a < space.atom_count(); ++a) {
    const double pd = law_prob_at(law, space.d_values_of(a)[0]);
    const double pe = law_prob_at(law, space.e_value(a, 0));
    CHECK(space.probs()[a] == doctest::Approx(pd * pe).epsilon(1e-12));
  }
}

TEST_CASE("independent two-step tree: e-sum law equals d-sum law") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::rademacher(),
                                          DiscreteLaw::rademacher()};
  const OutcomeTree tree = tree_from_step_laws(steps);
  const JointDecoupledSpace space = tangent_decouple(tree);
  CHECK(space.atom_count() == 16);
  std::map<double, double> e_sum_law;
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    e_sum_law[space.e_sums()[a]] += space.probs()[a];
  const DiscreteLaw d = sum_law(tree);  // oracle for the independent case
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(e_sum_law.at(d.values()[i]) == doctest::Approx(d.probs()[i]).epsilon(1e-12));
}

TEST_CASE("d-marginal of the joint space reproduces the path table") {
  const OutcomeTree tree = random_tree(3, 3, -1.0, 1.0, false, 17);
  const JointDecoupledSpace space = tangent_decouple(tree);
  std::vector<double> mass(space.index().paths.count, 0.0);
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    mass[space.path_idx()[a]] += space.probs()[a];
  for (std::size_t p = 0; p < mass.size(); ++p)
    CHECK(mass[p] == doctest::Approx(space.index().paths.probs[p]).epsilon(1e-9));
  CHECK(space.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tangency detects a perturbed conditional law") {
  // start from remark-equality and move 0.1 of e2's conditional mass
  const OutcomeTree tree = gallery_remark_equality();
  const JointDecoupledSpace base = tangent_decouple(tree);
  std::vector<std::uint32_t> path_idx(base.path_idx().begin(),
                                      base.path_idx().end());
  std::vector<double> e_values(base.e_values().begin(), base.e_values().end());
  std::vector<double> probs(base.probs().begin(), base.probs().end());
  // clone the atoms of d-path 0 with e2 flipped and shift 0.1 of their mass
  const std::size_t n = 2;
  const std::size_t base_count = probs.size();
  for (std::size_t a = 0; a < base_count; ++a) {
    if (path_idx[a] != 0) continue;
    path_idx.push_back(path_idx[a]);
    e_values.push_back(e_values[a * n]);
    e_values.push_back(-e_values[a * n + 1]);
    const double moved = 0.1 * probs[a] / 0.5;  // 0.1 total across the path
    probs.push_back(moved);
    probs[a] -= moved;
  }
  const JointDecoupledSpace perturbed = JointDecoupledSpace::from_atoms(
      tree, std::move(path_idx), std::move(e_values), std::move(probs));
  CHECK(verify_tangency(perturbed) >= 0.1 - 1e-9);
  CHECK(verify_tangency(base) <= 1e-9);
}

TEST_CASE("conditional independence detects coupled e-steps") {
  // independent Rademacher steps, but e2 = e1 within every d-path
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::rademacher(),
                                          DiscreteLaw::rademacher()};
  const OutcomeTree tree = tree_from_step_laws(steps);
  const PathTable paths = enumerate_paths(tree);
  std::vector<std::uint32_t> path_idx;
  std::vector<double> e_values;
  std::vector<double> probs;
  for (std::size_t p = 0; p < paths.count; ++p)
    for (double e1 : {-1.0, 1.0}) {
      path_idx.push_back(static_cast<std::uint32_t>(p));
      e_values.push_back(e1);
      e_values.push_back(e1);
      probs.push_back(paths.probs[p] * 0.5);
    }
  const JointDecoupledSpace coupled = JointDecoupledSpace::from_atoms(
      tree, std::move(path_idx), std::move(e_values), std::move(probs));
  // marginals per step are still correct, so tangency passes
  CHECK(verify_tangency(coupled) <= 1e-9);
  CHECK(verify_conditional_independence(coupled) >= 0.25 - 1e-9);
}

TEST_CASE("deterministic trees give exactly zero discrepancies") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::point_mass(2.0),
                                          DiscreteLaw::point_mass(-1.0)};
  const JointDecoupledSpace space = tangent_decouple(tree_from_step_laws(steps));
  CHECK(space.atom_count() == 1);
  CHECK(verify_tangency(space) == 0.0);
  CHECK(verify_conditional_independence(space) == 0.0);
}

TEST_CASE("tangent spaces preserve marginals and means over random models") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const OutcomeTree tree =
        random_tree(1 + static_cast<int>(seed % 4), 3, -2.0, 2.0, false, seed);
    const JointDecoupledSpace space = tangent_decouple(tree);
    CHECK(verify_tangency(space) <= 1e-9);
    CHECK(verify_conditional_independence(space) <= 1e-9);
    CHECK(verify_marginal_preservation(space) <= 1e-9);
  }
}

TEST_CASE("joint space enumeration respects the cap") {
  std::vector<DiscreteLaw> steps(6, DiscreteLaw::rademacher());
  const OutcomeTree tree = tree_from_step_laws(steps);  // 64 paths, 4096 atoms
  CHECK_THROWS_AS(tangent_decouple(tree, 4095), ResourceError);
  CHECK_NOTHROW(tangent_decouple(tree, 4096));
}

TEST_CASE("quadratic-form space conditions on tree prefixes, not value prefixes") {
  // two distinct depth-1 nodes share the d-value 0; conditioning must keep
  // them separate
  const QuadraticCoeff coeffs[] = {{1, 2, 1.0}};
  const OutcomeTree tree =
      gallery_quadratic_form(2, coeffs, DiscreteLaw::rademacher());
  const JointDecoupledSpace space = tangent_decouple(tree);
  CHECK(verify_tangency(space) <= 1e-9);
  CHECK(verify_conditional_independence(space) <= 1e-9);
  CHECK(verify_marginal_preservation(space) <= 1e-9);
}
