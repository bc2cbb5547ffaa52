#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "decouple/discrete_law.hpp"

namespace decouple {

// Node of a finite outcome tree. Branch k carries the step value, its
// conditional probability, and the subtree after taking it; child is null at
// the final depth. Subtrees may be shared (product models are built as
// chains), so the structure is a DAG walked as a tree: each distinct prefix
// is its own conditioning atom.
struct TreeNode {
  struct Branch {
    double value = 0.0;
    double prob = 0.0;
    std::shared_ptr<const TreeNode> child;
  };
  std::vector<Branch> branches;
};

// A length-n adapted sequence as a depth-n probability tree; tree depth plays
// the role of the information filtration. Immutable after construction;
// construction validates:
//   - every node's branch probabilities are >= 0 and sum to 1 within 1e-12,
//   - every root-to-leaf path has exactly n edges,
//   - total path mass is 1 within 1e-9,
//   - all values and probabilities finite.
class OutcomeTree {
public:
  OutcomeTree(int n, std::shared_ptr<const TreeNode> root);

  int steps() const { return n_; }
  const TreeNode& root() const { return *root_; }
  std::shared_ptr<const TreeNode> root_ptr() const { return root_; }

  // Number of positive-probability root-to-leaf paths, saturated at cap+1.
  std::size_t path_count(std::size_t cap = kDefaultCap) const;
  bool all_values_nonnegative() const;

  // Unconditional marginal law / mean of each step.
  std::vector<DiscreteLaw> step_marginals() const;
  std::vector<double> step_means() const;

private:
  int n_;
  std::shared_ptr<const TreeNode> root_;
};

// Independent steps: step i drawn from laws[i] regardless of history.
OutcomeTree tree_from_step_laws(std::span<const DiscreteLaw> laws);

// Flat enumeration of all positive-probability root-to-leaf paths in
// depth-first branch order. values and nodes are row-major with stride n;
// nodes[p*n + k] is the id (DFS visit order) of the conditioning node the
// path sits at before step k+1. Shared subtrees get one id per distinct
// prefix, so ids identify filtration atoms, not node objects.
struct PathTable {
  int n = 0;
  std::size_t count = 0;
  std::vector<double> values;
  std::vector<double> probs;
  std::vector<double> sums;
  std::vector<std::uint32_t> nodes;

  std::span<const double> path_values(std::size_t p) const {
    return {values.data() + p * static_cast<std::size_t>(n),
            static_cast<std::size_t>(n)};
  }
  double total_mass() const;
};

// One realization with its probability; a view into a PathTable row.
struct PathAtom {
  std::span<const double> values;
  double prob = 0.0;
};

// Path table plus per-prefix data needed for conditioning: the value-merged
// branch law and the conditional mean at every visited prefix.
struct TreeIndex {
  PathTable paths;
  std::vector<DiscreteLaw> node_laws;
  std::vector<double> node_means;
};

PathTable enumerate_paths(const OutcomeTree& tree, std::size_t cap = kDefaultCap);
PathAtom path_atom(const PathTable& table, std::size_t p);
TreeIndex index_tree(const OutcomeTree& tree, std::size_t cap = kDefaultCap);

// Law of d_1 + ... + d_n by exact enumeration.
DiscreteLaw sum_law(const OutcomeTree& tree, std::size_t cap = kDefaultCap);

// One root-to-leaf draw; returns the path sum.
double sample_path_sum(const OutcomeTree& tree, RngStream& rng);

// Seeded generator for property tests: branch counts in {2..max_branching}
// (or 1 when max_branching is 1), values uniform on the given range
// (restricted to >= 0 when nonnegative is set), strictly positive branch
// probabilities. Pure function of its arguments. Requires n <= 6 and
// max_branching <= 4 to keep the joint decoupled space enumerable.
OutcomeTree random_tree(int n, int max_branching, double value_lo, double value_hi,
                        bool nonnegative, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gallery models
// ---------------------------------------------------------------------------

// d_1 = ... = d_n, all equal to one Bernoulli(p) draw.
OutcomeTree gallery_comonotone_bernoulli(int n, double p);

// (d_1,...,d_n) is a uniformly chosen standard unit vector; the sum is
// identically 1 while the independent-marginals sum is Binomial(n, 1/n).
OutcomeTree gallery_unit_vector(int n);

// Two steps: d_1 is Rademacher and d_2 = d_1 almost surely. All three
// tangent comparison inequalities are tight on this model.
OutcomeTree gallery_remark_equality();

// d_{j} = X_j * sum_{i<j} a_{ij} X_i on the natural filtration of i.i.d.
// X_1..X_n with the given finite-support step law (d_1 = 0).
struct QuadraticCoeff {
  int i = 0;  // 1-based, i < j
  int j = 0;
  double a = 0.0;
};
OutcomeTree gallery_quadratic_form(int n_vars, std::span<const QuadraticCoeff> coeffs,
                                   const DiscreteLaw& step_law,
                                   std::size_t cap = kDefaultCap);

// Closed forms for the comonotone Bernoulli model: E(sum d)^2 = n^2 p,
// E(sum z)^2 = np(np+1-p), and their ratio n/(np+1-p). The unbounded ratio is
// what rules out a universal complete-decoupling upper bound.
struct ComonotoneClosedForms {
  double d_second_moment = 0.0;
  double z_second_moment = 0.0;
  double ratio = 0.0;
};
ComonotoneClosedForms comonotone_closed_forms(int n, double p);

}  // namespace decouple
