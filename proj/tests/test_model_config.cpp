#include "doctest.h"

#include <cmath>

#include "decouple/errors.hpp"
#include "decouple/model_config.hpp"
#include "decouple/moments.hpp"

using namespace decouple;

TEST_CASE("product model from json") {
  const nlohmann::json config = nlohmann::json::parse(R"({
    "kind": "product",
    "steps": [
      {"atoms": [[0, 0.5], [1, 0.5]]},
      {"atoms": [[-1, 0.5], [1, 0.5]]}
    ]
  })");
  const OutcomeTree tree = model_from_json(config);
  CHECK(tree.steps() == 2);
  CHECK(enumerate_paths(tree).count == 4);
}

TEST_CASE("explicit tree from json") {
  const nlohmann::json config = nlohmann::json::parse(R"({
    "kind": "explicit_tree",
    "n": 2,
    "root": {"branches": [
      {"value": 1, "prob": 0.3, "child": {"branches": [{"value": 1, "prob": 1.0}]}},
      {"value": 0, "prob": 0.7, "child": {"branches": [{"value": 0, "prob": 1.0}]}}
    ]}
  })");
  const OutcomeTree tree = model_from_json(config);
  const MomentSummary m = exact_moments(sum_law(tree));
  CHECK(m.second_moment == doctest::Approx(4 * 0.3).epsilon(1e-12));
}

TEST_CASE("gallery model from json") {
  const nlohmann::json config = nlohmann::json::parse(R"({
    "kind": "gallery", "name": "unit_vector", "params": {"n": 3}
  })");
  const OutcomeTree tree = model_from_json(config);
  const DiscreteLaw law = sum_law(tree);
  REQUIRE(law.size() == 1);
  CHECK(law.values()[0] == doctest::Approx(1.0));
}

TEST_CASE("quadratic form params default to all-ones and rademacher") {
  const nlohmann::json config = nlohmann::json::parse(R"({
    "kind": "gallery", "name": "quadratic_form", "params": {"n": 3}
  })");
  const OutcomeTree tree = model_from_json(config);
  CHECK(tree.steps() == 3);
  CHECK(enumerate_paths(tree).count == 8);
}

TEST_CASE("model validation failures") {
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"kind": "nope"})")),
                  ValidationError);
  CHECK_THROWS_AS(
      model_from_json(nlohmann::json::parse(
          R"({"kind": "gallery", "name": "mystery", "params": {}})")),
      ValidationError);
  // negative probability
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({
        "kind": "product",
        "steps": [{"atoms": [[0, -0.25], [1, 1.25]]}]
      })")),
      ValidationError);
  // non-normalized node
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({
        "kind": "explicit_tree", "n": 1,
        "root": {"branches": [{"value": 1, "prob": 0.4}, {"value": 0, "prob": 0.4}]}
      })")),
      ValidationError);
}

TEST_CASE("stopped spec from json") {
  const nlohmann::json config = nlohmann::json::parse(R"({
    "kind": "stopped_sum",
    "mu": 0.5, "sigma2": 0.25,
    "support": [[0, 0.5], [1, 0.5]],
    "tail": [1.0, 0.5],
    "rule": {"name": "first_success", "threshold": 0.5}
  })");
  const StoppedSumSpec spec = stopped_spec_from_json(config);
  CHECK(spec.horizon() == 2);
  REQUIRE(spec.rule.has_value());
  CHECK(spec.rule->name == "first_success");
  REQUIRE(spec.increment_support.has_value());
  CHECK(spec.increment_support->mean() == doctest::Approx(0.5));

  CHECK_THROWS_AS(stopped_spec_from_json(nlohmann::json::parse(R"({
        "kind": "stopped_sum", "mu": 0, "sigma2": 1, "tail": [0.5, 0.9]
      })")),
      ValidationError);
  CHECK_THROWS_AS(stopped_spec_from_json(nlohmann::json::parse(R"({
        "kind": "stopped_sum", "mu": 0, "sigma2": 1, "tail": [1.0],
        "rule": {"name": "sometimes"}
      })")),
      ValidationError);
}
