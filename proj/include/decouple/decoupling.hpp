#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decouple/outcome_tree.hpp"

namespace decouple {

// Product of the step marginals: the joint law of mutually independent
// z_1..z_n with z_i distributed as d_i.
struct MarginalProduct {
  std::vector<DiscreteLaw> laws;
  DiscreteLaw sum_law() const { return sum_of_independent(laws); }
};

MarginalProduct complete_decouple(const OutcomeTree& tree);

// Enumerated joint law of (d_1..d_n, e_1..e_n). For every d-path the e_i are
// drawn independently from the source branch law at the d-prefix, so the
// d-path plays the role of the conditioning information G. Atoms keep their
// d-path identity and are never merged across equal value vectors; merging
// happens only in derived laws.
class JointDecoupledSpace {
public:
  // The tangent construction described above.
  static JointDecoupledSpace build(const OutcomeTree& source,
                                   std::size_t cap = kDefaultCap);

  // Assemble from explicit atoms (stride-n e_values), e.g. perturbed spaces
  // in tests. Validates structure and total mass only; the tangency and
  // conditional-independence properties are what the verifiers measure.
  static JointDecoupledSpace from_atoms(const OutcomeTree& source,
                                        std::vector<std::uint32_t> path_idx,
                                        std::vector<double> e_values,
                                        std::vector<double> probs,
                                        std::size_t cap = kDefaultCap);

  int steps() const { return index_.paths.n; }
  std::size_t atom_count() const { return probs_.size(); }
  const OutcomeTree& source() const { return source_; }
  const TreeIndex& index() const { return index_; }

  std::span<const std::uint32_t> path_idx() const { return path_idx_; }
  std::span<const double> e_values() const { return e_values_; }
  std::span<const double> probs() const { return probs_; }
  std::span<const double> e_sums() const { return e_sums_; }

  double e_value(std::size_t atom, int step) const {
    return e_values_[atom * static_cast<std::size_t>(steps()) +
                     static_cast<std::size_t>(step)];
  }
  std::span<const double> d_values_of(std::size_t atom) const {
    return index_.paths.path_values(path_idx_[atom]);
  }
  double total_mass() const;

  // One atom per row: d-values, e-values, probability.
  std::string to_csv() const;

private:
  JointDecoupledSpace(const OutcomeTree& source, std::size_t cap);

  OutcomeTree source_;
  TreeIndex index_;
  std::vector<std::uint32_t> path_idx_;
  std::vector<double> e_values_;  // stride n
  std::vector<double> probs_;
  std::vector<double> e_sums_;
};

inline JointDecoupledSpace tangent_decouple(const OutcomeTree& tree,
                                            std::size_t cap = kDefaultCap) {
  return JointDecoupledSpace::build(tree, cap);
}

// Max over prefixes and atom values of |L(d_i | prefix) - L(e_i | prefix)|,
// comparing the empirical conditional law of e_i given the d-prefix against
// the source branch law there. <= 1e-9 for spaces built by tangent_decouple.
double verify_tangency(const JointDecoupledSpace& space);

// Max over d-paths and e-vectors of |P(e-vector | d-path) - prod_i P(e_i | d-path)|.
double verify_conditional_independence(const JointDecoupledSpace& space);

// Max over steps of the L-inf distance between the unconditional laws of e_i
// and d_i; a consequence of tangency, tested directly.
double verify_marginal_preservation(const JointDecoupledSpace& space);

}  // namespace decouple
