#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "decouple/errors.hpp"
#include "decouple/montecarlo.hpp"
#include "decouple/stopped_sums.hpp"

using namespace decouple;

namespace {

bool bit_equal(const MomentSummary& a, const MomentSummary& b) {
  return std::memcmp(&a.mean, &b.mean, sizeof a.mean) == 0 &&
         std::memcmp(&a.second_moment, &b.second_moment, sizeof a.second_moment) ==
             0 &&
         std::memcmp(&a.std_error, &b.std_error, sizeof a.std_error) == 0 &&
         std::memcmp(&a.second_moment_std_error, &b.second_moment_std_error,
                     sizeof a.second_moment_std_error) == 0;
}

}  // namespace

TEST_CASE("point-mass sampler estimates exactly") {
  auto sampler = [](RngStream&) { return 2.5; };
  const MomentSummary est = estimate_moments(sampler, {1'000, 1, 1});
  CHECK(est.mean == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(est.std_error == doctest::Approx(0.0));
  CHECK(est.kind == MomentSummary::Kind::estimated);
  CHECK(est.n_samples == 1'000);
}

TEST_CASE("tree sampler agrees with enumeration within 3 SE") {
  const OutcomeTree tree = gallery_comonotone_bernoulli(2, 0.5);
  const MomentSummary exact = exact_moments(sum_law(tree));
  CHECK(exact.second_moment == doctest::Approx(2.0).epsilon(1e-9));
  auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
  const MomentSummary est = estimate_moments(sampler, {100'000, 17, 1});
  CHECK(std::fabs(est.second_moment - 2.0) <= 3.0 * est.second_moment_std_error);
  CHECK(std::fabs(est.mean - exact.mean) <= 3.0 * est.std_error);
}

TEST_CASE("gallery samplers pass the |z| <= 4 gate") {
  const OutcomeTree models[] = {gallery_unit_vector(4), gallery_remark_equality()};
  std::uint64_t seed = 100;
  for (const OutcomeTree& tree : models) {
    const MomentSummary exact = exact_moments(sum_law(tree));
    auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
    const MomentSummary est = estimate_moments(sampler, {100'000, seed++, 2});
    CHECK(zscore(est, exact) <= 4.0);
  }
}

TEST_CASE("tail estimator") {
  auto constant = [](RngStream&) { return 1.0; };
  const TailEstimate zero = estimate_tail(constant, 2.0, TailSide::above, {500, 1, 1});
  CHECK(zero.p_hat == doctest::Approx(0.0));

  const OutcomeTree tree = gallery_comonotone_bernoulli(2, 0.5);
  auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
  const TailEstimate above =
      estimate_tail(sampler, 0.5, TailSide::above, {100'000, 23, 1});
  CHECK(std::fabs(above.p_hat - 0.5) <= 3.0 * above.std_error);
  // deviation form: P(|S - 1| > 1.5) = 0
  const TailEstimate dev = estimate_tail(sampler, 1.5, TailSide::two_sided_centered,
                                         {10'000, 23, 1}, 1.0);
  CHECK(dev.p_hat == doctest::Approx(0.0));

  const OutcomeTree unit = gallery_unit_vector(4);
  auto unit_sampler = [&unit](RngStream& rng) { return sample_path_sum(unit, rng); };
  const TailEstimate sure =
      estimate_tail(unit_sampler, 0.5, TailSide::above, {1'000, 5, 1});
  CHECK(sure.p_hat == doctest::Approx(1.0));
  CHECK(sure.std_error == doctest::Approx(0.0));
}

TEST_CASE("identical configs give bit-identical estimates") {
  const OutcomeTree tree = random_tree(4, 3, -2.0, 2.0, false, 3);
  auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
  for (int streams : {1, 4}) {
    const EstimatorConfig cfg{50'000, 77, streams};
    const MomentSummary a = estimate_moments(sampler, cfg);
    const MomentSummary b = estimate_moments(sampler, cfg);
    CHECK(bit_equal(a, b));
  }
  // stream splitting changes only how work is divided, not the sample count
  const MomentSummary one = estimate_moments(sampler, {50'000, 77, 1});
  const MomentSummary four = estimate_moments(sampler, {50'000, 77, 4});
  CHECK(one.n_samples == four.n_samples);
}

TEST_CASE("standard error halves when samples quadruple") {
  const OutcomeTree tree = random_tree(3, 3, -2.0, 2.0, false, 8);
  auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const MomentSummary small = estimate_moments(sampler, {20'000, seed, 1});
    const MomentSummary big = estimate_moments(sampler, {80'000, seed, 1});
    const double ratio = big.std_error / small.std_error;
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
  }
}

TEST_CASE("zscore semantics") {
  MomentSummary exact;
  exact.kind = MomentSummary::Kind::exact;
  exact.mean = 0.75;
  exact.second_moment = 0.75;

  MomentSummary est;
  est.kind = MomentSummary::Kind::estimated;
  est.mean = 0.75;
  est.second_moment = 0.752;
  est.std_error = 0.001;
  est.second_moment_std_error = 0.001;
  CHECK(zscores(est, exact).second_moment == doctest::Approx(2.0));
  CHECK(zscore(est, exact) == doctest::Approx(2.0));

  est.second_moment = 0.75;
  CHECK(zscore(est, exact) == doctest::Approx(0.0));

  est.second_moment = 0.8;
  est.second_moment_std_error = 0.0;  // zero SE with a real discrepancy
  CHECK_THROWS_AS(zscore(est, exact), ValidationError);

  MomentSummary wrong_kind = exact;
  CHECK_THROWS_AS(zscore(wrong_kind, exact), ValidationError);
}

TEST_CASE("estimator config validation") {
  auto sampler = [](RngStream&) { return 0.0; };
  CHECK_THROWS_AS(estimate_moments(sampler, {50, 1, 1}), ValidationError);
  CHECK_THROWS_AS(estimate_moments(sampler, {1'000, 1, 0}), ValidationError);
}
