#pragma once

#include <string>

#include "json.hpp"

#include "decouple/outcome_tree.hpp"
#include "decouple/stopped_sums.hpp"

namespace decouple {

// Structured model descriptions (see docs/formats.md). kind selects the
// payload:
//   explicit_tree: {"kind":"explicit_tree","n":N,"root":{node}} where a node
//     is {"branches":[{"value":v,"prob":p,"child":{node}?}, ...]} and child
//     is omitted at the final depth;
//   product:       {"kind":"product","steps":[{"atoms":[[v,p],...]}, ...]};
//   gallery:       {"kind":"gallery","name":...,"params":{...}}.
nlohmann::json load_json_file(const std::string& path);
OutcomeTree model_from_json(const nlohmann::json& config,
                            std::size_t cap = kDefaultCap);

// Gallery dispatch; params carries n, p, coeffs ([[i,j,a],...], default
// all-ones), step_law ([[v,p],...], default Rademacher) as applicable.
OutcomeTree gallery_by_name(const std::string& name, const nlohmann::json& params,
                            std::size_t cap = kDefaultCap);

// {"kind":"stopped_sum","mu":...,"sigma2":...,"tail":[q1..qJ],
//  "support":[[v,p],...]?,
//  "rule":{"name":"fixed","m":M} | {"name":"first_success","threshold":t}
//        | {"name":"sum_at_least","threshold":t}?}
StoppedSumSpec stopped_spec_from_json(const nlohmann::json& config);

DiscreteLaw law_from_json(const nlohmann::json& atoms);

}  // namespace decouple
