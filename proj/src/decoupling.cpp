#include "decouple/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

namespace decouple {

namespace {

// Sort-and-merge (value, mass) pairs into an empirical conditional law,
// normalized by the group mass. Values within kValueMergeTol collapse.
struct EmpiricalLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

EmpiricalLaw empirical_law(std::vector<std::pair<double, double>>& atoms) {
  std::sort(atoms.begin(), atoms.end());
  EmpiricalLaw law;
  double mass = 0.0;
  for (const auto& [v, p] : atoms) {
    mass += p;
    if (!law.values.empty() && std::fabs(law.values.back() - v) <= kValueMergeTol)
      law.probs.back() += p;
    else {
      law.values.push_back(v);
      law.probs.push_back(p);
    }
  }
  if (mass > 0.0)
    for (double& p : law.probs) p /= mass;
  return law;
}

double linf_against(const EmpiricalLaw& emp, const DiscreteLaw& ref) {
  const auto rv = ref.values();
  const auto rp = ref.probs();
  double worst = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < emp.values.size() || j < rv.size()) {
    if (i < emp.values.size() && j < rv.size() &&
        std::fabs(emp.values[i] - rv[j]) <= kValueMergeTol) {
      worst = std::max(worst, std::fabs(emp.probs[i] - rp[j]));
      ++i;
      ++j;
    } else if (j >= rv.size() ||
               (i < emp.values.size() && emp.values[i] < rv[j])) {
      worst = std::max(worst, emp.probs[i]);
      ++i;
    } else {
      worst = std::max(worst, rp[j]);
      ++j;
    }
  }
  return worst;
}

}  // namespace

JointDecoupledSpace::JointDecoupledSpace(const OutcomeTree& source, std::size_t cap)
    : source_(source), index_(index_tree(source, cap)) {}

JointDecoupledSpace JointDecoupledSpace::build(const OutcomeTree& source,
                                               std::size_t cap) {
  JointDecoupledSpace space(source, cap);
  const PathTable& paths = space.index_.paths;
  const auto& laws = space.index_.node_laws;
  const int n = paths.n;

  std::size_t total = 0;
  for (std::size_t p = 0; p < paths.count; ++p) {
    std::size_t combos = 1;
    for (int k = 0; k < n; ++k) {
      combos *= laws[paths.nodes[p * static_cast<std::size_t>(n) +
                                 static_cast<std::size_t>(k)]]
                    .size();
      if (combos > cap) break;
    }
    total += std::min(combos, cap + 1);
    if (total > cap)
      throw ResourceError("joint decoupled space would exceed the enumeration cap");
  }

  space.path_idx_.reserve(total);
  space.probs_.reserve(total);
  space.e_values_.reserve(total * static_cast<std::size_t>(n));

  std::vector<std::size_t> pick(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < paths.count; ++p) {
    const double path_prob = paths.probs[p];
    const std::uint32_t* node_row = paths.nodes.data() + p * static_cast<std::size_t>(n);
    std::fill(pick.begin(), pick.end(), 0);
    // odometer over one conditional choice per step
    for (;;) {
      double prob = path_prob;
      for (int k = 0; k < n; ++k)
        prob *= laws[node_row[k]].probs()[pick[static_cast<std::size_t>(k)]];
      space.path_idx_.push_back(static_cast<std::uint32_t>(p));
      space.probs_.push_back(prob);
      for (int k = 0; k < n; ++k)
        space.e_values_.push_back(
            laws[node_row[k]].values()[pick[static_cast<std::size_t>(k)]]);
      int k = n - 1;
      while (k >= 0) {
        if (++pick[static_cast<std::size_t>(k)] < laws[node_row[k]].size()) break;
        pick[static_cast<std::size_t>(k)] = 0;
        --k;
      }
      if (k < 0) break;
    }
  }

  space.e_sums_.resize(space.probs_.size());
  for (std::size_t a = 0; a < space.probs_.size(); ++a)
    space.e_sums_[a] = kernels::sum(
        std::span<const double>(space.e_values_.data() + a * static_cast<std::size_t>(n),
                                static_cast<std::size_t>(n)));
  return space;
}

JointDecoupledSpace JointDecoupledSpace::from_atoms(const OutcomeTree& source,
                                                    std::vector<std::uint32_t> path_idx,
                                                    std::vector<double> e_values,
                                                    std::vector<double> probs,
                                                    std::size_t cap) {
  JointDecoupledSpace space(source, cap);
  const std::size_t n = static_cast<std::size_t>(space.index_.paths.n);
  if (path_idx.size() != probs.size() || e_values.size() != probs.size() * n)
    throw ValidationError("joint space: atom array sizes are inconsistent");
  double mass = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (path_idx[a] >= space.index_.paths.count)
      throw ValidationError("joint space: atom references an unknown d-path");
    if (!std::isfinite(probs[a]) || probs[a] < 0.0)
      throw ValidationError("joint space: negative or non-finite atom probability");
    mass += probs[a];
  }
  for (double v : e_values)
    if (!std::isfinite(v)) throw ValidationError("joint space: non-finite e value");
  if (std::fabs(mass - 1.0) > kMassTol)
    throw ValidationError("joint space: total mass differs from 1 beyond 1e-9");

  space.path_idx_ = std::move(path_idx);
  space.e_values_ = std::move(e_values);
  space.probs_ = std::move(probs);
  space.e_sums_.resize(space.probs_.size());
  for (std::size_t a = 0; a < space.probs_.size(); ++a)
    space.e_sums_[a] =
        kernels::sum(std::span<const double>(space.e_values_.data() + a * n, n));
  return space;
}

double JointDecoupledSpace::total_mass() const { return kernels::sum(probs_); }

std::string JointDecoupledSpace::to_csv() const {
  const int n = steps();
  std::string out;
  for (int k = 1; k <= n; ++k) out += "d" + std::to_string(k) + ",";
  for (int k = 1; k <= n; ++k) out += "e" + std::to_string(k) + ",";
  out += "prob\n";
  char buf[40];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.12g%c", v, sep);
    out += buf;
  };
  for (std::size_t a = 0; a < atom_count(); ++a) {
    for (double v : d_values_of(a)) put(v, ',');
    for (int k = 0; k < n; ++k) put(e_value(a, k), ',');
    put(probs_[a], '\n');
  }
  return out;
}

MarginalProduct complete_decouple(const OutcomeTree& tree) {
  return MarginalProduct{tree.step_marginals()};
}

double verify_tangency(const JointDecoupledSpace& space) {
  const TreeIndex& idx = space.index();
  const int n = space.steps();
  const std::size_t stride = static_cast<std::size_t>(n);
  double worst = 0.0;
  std::vector<std::vector<std::pair<double, double>>> per_node(idx.node_laws.size());
  for (int k = 0; k < n; ++k) {
    for (auto& bucket : per_node) bucket.clear();
    for (std::size_t a = 0; a < space.atom_count(); ++a) {
      const std::uint32_t node =
          idx.paths.nodes[space.path_idx()[a] * stride + static_cast<std::size_t>(k)];
      per_node[node].emplace_back(space.e_value(a, k), space.probs()[a]);
    }
    for (std::size_t node = 0; node < per_node.size(); ++node) {
      if (per_node[node].empty()) continue;  // zero-mass prefixes carry nothing
      const EmpiricalLaw emp = empirical_law(per_node[node]);
      worst = std::max(worst, linf_against(emp, idx.node_laws[node]));
    }
  }
  return worst;
}

double verify_conditional_independence(const JointDecoupledSpace& space) {
  const int n = space.steps();
  const std::size_t stride = static_cast<std::size_t>(n);
  const std::size_t path_count = space.index().paths.count;

  std::vector<std::vector<std::uint32_t>> groups(path_count);
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    groups[space.path_idx()[a]].push_back(static_cast<std::uint32_t>(a));

  double worst = 0.0;
  for (const auto& group : groups) {
    if (group.empty()) continue;
    double group_mass = 0.0;
    for (std::uint32_t a : group) group_mass += space.probs()[a];
    if (group_mass <= 0.0) continue;

    // per-step conditional marginals within the group
    std::vector<EmpiricalLaw> marginals(stride);
    for (std::size_t k = 0; k < stride; ++k) {
      std::vector<std::pair<double, double>> atoms;
      atoms.reserve(group.size());
      for (std::uint32_t a : group)
        atoms.emplace_back(space.e_value(a, static_cast<int>(k)), space.probs()[a]);
      marginals[k] = empirical_law(atoms);
    }
    auto marginal_prob = [&](std::size_t k, double v) {
      const auto& m = marginals[k];
      const auto it = std::lower_bound(m.values.begin(), m.values.end(),
                                       v - kValueMergeTol);
      if (it != m.values.end() && std::fabs(*it - v) <= kValueMergeTol)
        return m.probs[static_cast<std::size_t>(it - m.values.begin())];
      return 0.0;
    };

    // joint conditional per distinct e-vector (duplicates merged exactly)
    std::vector<std::uint32_t> order(group.begin(), group.end());
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      for (std::size_t k = 0; k < stride; ++k) {
        const double va = space.e_value(a, static_cast<int>(k));
        const double vb = space.e_value(b, static_cast<int>(k));
        if (va != vb) return va < vb;
      }
      return false;
    });
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      double joint = 0.0;
      auto same = [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t k = 0; k < stride; ++k)
          if (space.e_value(a, static_cast<int>(k)) !=
              space.e_value(b, static_cast<int>(k)))
            return false;
        return true;
      };
      while (j < order.size() && same(order[i], order[j])) {
        joint += space.probs()[order[j]];
        ++j;
      }
      double product = 1.0;
      for (std::size_t k = 0; k < stride; ++k)
        product *= marginal_prob(k, space.e_value(order[i], static_cast<int>(k)));
      worst = std::max(worst, std::fabs(joint / group_mass - product));
      i = j;
    }
  }
  return worst;
}

double verify_marginal_preservation(const JointDecoupledSpace& space) {
  const auto d_marginals = space.source().step_marginals();
  const int n = space.steps();
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(space.atom_count());
    for (std::size_t a = 0; a < space.atom_count(); ++a)
      atoms.emplace_back(space.e_value(a, k), space.probs()[a]);
    const EmpiricalLaw emp = empirical_law(atoms);
    worst = std::max(worst, linf_against(emp, d_marginals[static_cast<std::size_t>(k)]));
  }
  return worst;
}

}  // namespace decouple
