#include "decouple/model_config.hpp"

#include <fstream>

#include "decouple/errors.hpp"

namespace decouple {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ValidationError(msg); }

double num(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) bad(std::string("expected a number for ") + what);
  return j.get<double>();
}

std::shared_ptr<const TreeNode> node_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("branches"))
    bad("explicit_tree: node must be an object with a branches array");
  auto node = std::make_shared<TreeNode>();
  for (const auto& b : j.at("branches")) {
    TreeNode::Branch branch;
    branch.value = num(b.at("value"), "branch value");
    branch.prob = num(b.at("prob"), "branch prob");
    if (b.contains("child") && !b.at("child").is_null())
      branch.child = node_from_json(b.at("child"));
    node->branches.push_back(std::move(branch));
  }
  return node;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

DiscreteLaw law_from_json(const nlohmann::json& atoms) {
  if (!atoms.is_array() || atoms.empty()) bad("law: expected a non-empty [[value,prob],...] array");
  std::vector<double> vs;
  std::vector<double> ps;
  for (const auto& a : atoms) {
    if (!a.is_array() || a.size() != 2) bad("law: each atom must be [value, prob]");
    vs.push_back(num(a[0], "atom value"));
    ps.push_back(num(a[1], "atom prob"));
  }
  return DiscreteLaw(std::move(vs), std::move(ps));
}

OutcomeTree gallery_by_name(const std::string& name, const nlohmann::json& params,
                            std::size_t cap) {
  auto get_int = [&](const char* key) {
    if (!params.contains(key)) bad("gallery " + name + ": missing parameter " + key);
    return params.at(key).get<int>();
  };
  if (name == "comonotone_bernoulli") {
    if (!params.contains("p")) bad("gallery comonotone_bernoulli: missing parameter p");
    return gallery_comonotone_bernoulli(get_int("n"), num(params.at("p"), "p"));
  }
  if (name == "unit_vector") return gallery_unit_vector(get_int("n"));
  if (name == "remark_equality") return gallery_remark_equality();
  if (name == "quadratic_form") {
    const int n = get_int("n");
    std::vector<QuadraticCoeff> coeffs;
    if (params.contains("coeffs")) {
      for (const auto& c : params.at("coeffs")) {
        if (!c.is_array() || c.size() != 3)
          bad("quadratic_form: each coefficient must be [i, j, a]");
        coeffs.push_back(
            {c[0].get<int>(), c[1].get<int>(), num(c[2], "coefficient")});
      }
    } else {
      for (int i = 1; i < n; ++i)
        for (int j = i + 1; j <= n; ++j) coeffs.push_back({i, j, 1.0});
    }
    const DiscreteLaw step = params.contains("step_law")
                                 ? law_from_json(params.at("step_law"))
                                 : DiscreteLaw::rademacher();
    return gallery_quadratic_form(n, coeffs, step, cap);
  }
  bad("unknown gallery model: " + name);
}

OutcomeTree model_from_json(const nlohmann::json& config, std::size_t cap) {
  if (!config.is_object() || !config.contains("kind"))
    bad("model: expected an object with a kind field");
  const std::string kind = config.at("kind").get<std::string>();
  if (kind == "explicit_tree") {
    const int n = config.at("n").get<int>();
    return OutcomeTree(n, node_from_json(config.at("root")));
  }
  if (kind == "product") {
    if (!config.contains("steps") || !config.at("steps").is_array())
      bad("product model: missing steps array");
    std::vector<DiscreteLaw> laws;
    for (const auto& s : config.at("steps")) laws.push_back(law_from_json(s.at("atoms")));
    if (config.contains("n") &&
        config.at("n").get<std::size_t>() != laws.size())
      bad("product model: n disagrees with the number of steps");
    OutcomeTree tree = tree_from_step_laws(laws);
    if (tree.path_count(cap) > cap)
      throw ResourceError("product model exceeds the enumeration cap");
    return tree;
  }
  if (kind == "gallery")
    return gallery_by_name(config.at("name").get<std::string>(),
                           config.contains("params") ? config.at("params")
                                                     : nlohmann::json::object(),
                           cap);
  bad("model: unknown kind '" + kind + "'");
}

StoppedSumSpec stopped_spec_from_json(const nlohmann::json& config) {
  if (!config.is_object()) bad("stopped spec: expected an object");
  if (config.contains("kind") && config.at("kind").get<std::string>() != "stopped_sum")
    bad("stopped spec: kind must be stopped_sum");
  StoppedSumSpec spec;
  spec.mu = num(config.at("mu"), "mu");
  spec.sigma2 = num(config.at("sigma2"), "sigma2");
  if (!config.contains("tail") || !config.at("tail").is_array())
    bad("stopped spec: missing tail array");
  for (const auto& q : config.at("tail")) spec.tail.push_back(num(q, "tail entry"));
  if (config.contains("support") && !config.at("support").is_null())
    spec.increment_support = law_from_json(config.at("support"));
  if (config.contains("rule") && !config.at("rule").is_null()) {
    const auto& r = config.at("rule");
    const std::string name = r.at("name").get<std::string>();
    if (name == "fixed")
      spec.rule = fixed_rule(r.at("m").get<int>());
    else if (name == "first_success")
      spec.rule = first_success_rule(num(r.at("threshold"), "threshold"));
    else if (name == "sum_at_least")
      spec.rule = sum_at_least_rule(num(r.at("threshold"), "threshold"));
    else
      bad("stopped spec: unknown rule '" + name + "'");
  }
  spec.validate();
  return spec;
}

}  // namespace decouple
