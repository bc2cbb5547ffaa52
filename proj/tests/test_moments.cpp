#include "doctest.h"

#include <cmath>
#include <vector>

#include "decouple/errors.hpp"
#include "decouple/moments.hpp"

using namespace decouple;

TEST_CASE("exact moments basics") {
  const MomentSummary point = exact_moments(DiscreteLaw::point_mass(1.0));
  CHECK(point.mean == doctest::Approx(1.0));
  CHECK(point.second_moment == doctest::Approx(1.0));
  CHECK(point.variance == doctest::Approx(0.0));
  CHECK(std::fabs(point.variance - (point.second_moment - point.mean * point.mean)) <=
        1e-9);

  CHECK_THROWS_AS(exact_moments(std::span<const double>{}, std::span<const double>{}),
                  ValidationError);
}

TEST_CASE("binomial z-sum and comonotone d-sum second moments") {
  for (int n : {2, 5, 10}) {
    const DiscreteLaw z_sum =
        complete_decouple(gallery_unit_vector(n)).sum_law();
    CHECK(exact_moments(z_sum).second_moment ==
          doctest::Approx(2.0 - 1.0 / n).epsilon(1e-9));
  }
  const int n = 7;
  const double p = 0.15;
  CHECK(exact_moments(sum_law(gallery_comonotone_bernoulli(n, p))).second_moment ==
        doctest::Approx(n * n * p).epsilon(1e-9));
}

TEST_CASE("moments are linear in mixtures") {
  const DiscreteLaw a({0.0, 1.0}, {0.5, 0.5});
  const DiscreteLaw b({2.0, 4.0}, {0.25, 0.75});
  const double w = 0.3;
  std::vector<double> values(a.values().begin(), a.values().end());
  std::vector<double> probs;
  for (double p : a.probs()) probs.push_back(w * p);
  values.insert(values.end(), b.values().begin(), b.values().end());
  for (double p : b.probs()) probs.push_back((1 - w) * p);
  const MomentSummary mix = exact_moments(values, probs);
  const MomentSummary ma = exact_moments(a);
  const MomentSummary mb = exact_moments(b);
  CHECK(mix.mean == doctest::Approx(w * ma.mean + (1 - w) * mb.mean));
  CHECK(mix.second_moment ==
        doctest::Approx(w * ma.second_moment + (1 - w) * mb.second_moment));
}

TEST_CASE("projection on the remark-equality model") {
  const JointDecoupledSpace space = tangent_decouple(gallery_remark_equality());
  const ProjectionTable proj = project_on_G(space);
  const PathTable& paths = space.index().paths;
  // oracle by hand: E(e1|path) = 0, E(e2|path) = d1, so projection = d1
  for (std::size_t p = 0; p < paths.count; ++p)
    CHECK(proj.values[p] == doctest::Approx(paths.path_values(p)[0]).epsilon(1e-12));
  // tower property
  CHECK(proj.expectation() ==
        doctest::Approx(e_sum_moments(space).mean).epsilon(1e-9));
}

TEST_CASE("projection is constant on independent-step trees") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::bernoulli(0.3),
                                          DiscreteLaw({-1.0, 2.0}, {0.5, 0.5})};
  const OutcomeTree tree = tree_from_step_laws(steps);
  const JointDecoupledSpace space = tangent_decouple(tree);
  const ProjectionTable proj = project_on_G(space);
  const double expected = steps[0].mean() + steps[1].mean();
  for (double v : proj.values) CHECK(v == doctest::Approx(expected).epsilon(1e-12));

  const OutcomeTree one =
      tree_from_step_laws(std::vector<DiscreteLaw>{DiscreteLaw::bernoulli(0.7)});
  const ProjectionTable pone = project_on_G(tangent_decouple(one));
  for (double v : pone.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("second-moment decomposition residual vanishes") {
  CHECK(check_decomposition(tangent_decouple(gallery_remark_equality())) <= 1e-9);
  CHECK(check_decomposition(tangent_decouple(gallery_unit_vector(4))) <= 1e-9);
  // deterministic tree: both sides reduce to (ES)^2
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::point_mass(3.0),
                                          DiscreteLaw::point_mass(-1.0)};
  CHECK(check_decomposition(tangent_decouple(tree_from_step_laws(steps))) == 0.0);
}

TEST_CASE("distance equality on the remark-equality model") {
  const JointDecoupledSpace space = tangent_decouple(gallery_remark_equality());
  const DistancePair pair = check_distance_equality(space);
  // hand enumeration: sum d - proj = 2 d1 - d1 = d1 and sum e - proj = e1,
  // both Rademacher, so both second moments are 1
  CHECK(pair.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.rhs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance equality reduces to the variance under independence") {
  const std::vector<DiscreteLaw> steps = {DiscreteLaw::bernoulli(0.4),
                                          DiscreteLaw::rademacher()};
  const OutcomeTree tree = tree_from_step_laws(steps);
  const JointDecoupledSpace space = tangent_decouple(tree);
  const DistancePair pair = check_distance_equality(space);
  const double var = exact_moments(sum_law(tree)).variance;
  CHECK(pair.lhs == doctest::Approx(var).epsilon(1e-9));
  CHECK(pair.rhs == doctest::Approx(var).epsilon(1e-9));
}

TEST_CASE("lemma residuals vanish across random models") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const OutcomeTree tree =
        random_tree(1 + static_cast<int>(seed % 4), 3, -2.0, 2.0, false, seed);
    const JointDecoupledSpace space = tangent_decouple(tree);
    CHECK(check_decomposition(space) <= 1e-9);
    const DistancePair pair = check_distance_equality(space);
    CHECK(std::fabs(pair.lhs - pair.rhs) <= 1e-9);
    CHECK(max_cross_term(space) <= 1e-9);
  }
}

TEST_CASE("cross terms expose broken conditional independence") {
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
      e_values.push_back(e1);  // e2 coupled to e1
      probs.push_back(paths.probs[p] * 0.5);
    }
  const JointDecoupledSpace coupled = JointDecoupledSpace::from_atoms(
      tree, std::move(path_idx), std::move(e_values), std::move(probs));
  CHECK(max_cross_term(coupled) >= 1.0 - 1e-9);  // E[e1 e2] = E[e1^2] = 1

  const OutcomeTree one =
      tree_from_step_laws(std::vector<DiscreteLaw>{DiscreteLaw::rademacher()});
  CHECK(max_cross_term(tangent_decouple(one)) == 0.0);  // no pairs
}

TEST_CASE("projection table CSV lists one path per row") {
  const JointDecoupledSpace space = tangent_decouple(gallery_remark_equality());
  const std::string csv = project_on_G(space).to_csv(space.index().paths);
  CHECK(csv.find("d1,d2,prob,projection\n") == 0);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + space.index().paths.count);
}
