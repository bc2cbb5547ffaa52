#include "decouple/outcome_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

namespace decouple {

namespace {

// Memoized height in edges; nodes at the final depth are null children.
int node_height(const TreeNode* node, std::unordered_map<const TreeNode*, int>& memo) {
  if (auto it = memo.find(node); it != memo.end()) return it->second;
  if (node->branches.empty())
    throw ValidationError("outcome tree: internal node with no branches");
  int height = -1;
  for (const auto& b : node->branches) {
    const int h = b.child ? 1 + node_height(b.child.get(), memo) : 1;
    if (height == -1) height = h;
    if (h != height)
      throw ValidationError("outcome tree: paths of unequal depth (depth mismatch)");
  }
  memo[node] = height;
  return height;
}

double node_mass(const TreeNode* node,
                 std::unordered_map<const TreeNode*, double>& memo) {
  if (auto it = memo.find(node); it != memo.end()) return it->second;
  double mass = 0.0;
  for (const auto& b : node->branches)
    mass += b.prob * (b.child ? node_mass(b.child.get(), memo) : 1.0);
  memo[node] = mass;
  return mass;
}

void validate_node(const TreeNode* node,
                   std::unordered_map<const TreeNode*, bool>& seen) {
  if (seen.contains(node)) return;
  seen[node] = true;
  double total = 0.0;
  for (const auto& b : node->branches) {
    if (!std::isfinite(b.value))
      throw ValidationError("outcome tree: non-finite branch value");
    if (!std::isfinite(b.prob) || b.prob < 0.0)
      throw ValidationError("outcome tree: negative or non-finite branch probability");
    total += b.prob;
  }
  if (std::fabs(total - 1.0) > kProbSumTol)
    throw ValidationError("outcome tree: node branch probabilities sum to " +
                          std::to_string(total) + ", expected 1 within 1e-12");
  for (const auto& b : node->branches)
    if (b.child) validate_node(b.child.get(), seen);
}

std::size_t count_paths(const TreeNode* node, std::size_t cap,
                        std::unordered_map<const TreeNode*, std::size_t>& memo) {
  if (auto it = memo.find(node); it != memo.end()) return it->second;
  std::size_t count = 0;
  for (const auto& b : node->branches) {
    if (b.prob == 0.0) continue;
    const std::size_t sub = b.child ? count_paths(b.child.get(), cap, memo) : 1;
    count += std::min(sub, cap + 1);
    if (count > cap) {
      count = cap + 1;
      break;
    }
  }
  memo[node] = count;
  return count;
}

bool values_nonnegative(const TreeNode* node,
                        std::unordered_map<const TreeNode*, bool>& memo) {
  if (auto it = memo.find(node); it != memo.end()) return it->second;
  bool ok = true;
  for (const auto& b : node->branches) {
    if (b.value < 0.0) ok = false;
    if (ok && b.child) ok = values_nonnegative(b.child.get(), memo);
    if (!ok) break;
  }
  memo[node] = ok;
  return ok;
}

DiscreteLaw branch_law(const TreeNode& node) {
  std::vector<double> vs;
  std::vector<double> ps;
  vs.reserve(node.branches.size());
  ps.reserve(node.branches.size());
  for (const auto& b : node.branches) {
    vs.push_back(b.value);
    ps.push_back(b.prob);
  }
  return DiscreteLaw(std::move(vs), std::move(ps));
}

}  // namespace

OutcomeTree::OutcomeTree(int n, std::shared_ptr<const TreeNode> root)
    : n_(n), root_(std::move(root)) {
  if (n_ < 1) throw ValidationError("outcome tree: step count must be >= 1");
  if (!root_) throw ValidationError("outcome tree: null root");
  std::unordered_map<const TreeNode*, bool> seen;
  validate_node(root_.get(), seen);
  std::unordered_map<const TreeNode*, int> hmemo;
  if (node_height(root_.get(), hmemo) != n_)
    throw ValidationError("outcome tree: path length does not match declared step count");
  std::unordered_map<const TreeNode*, double> mmemo;
  const double mass = node_mass(root_.get(), mmemo);
  if (std::fabs(mass - 1.0) > kMassTol)
    throw ValidationError("outcome tree: total path mass " + std::to_string(mass) +
                          " differs from 1 beyond 1e-9");
}

std::size_t OutcomeTree::path_count(std::size_t cap) const {
  std::unordered_map<const TreeNode*, std::size_t> memo;
  return count_paths(root_.get(), cap, memo);
}

bool OutcomeTree::all_values_nonnegative() const {
  std::unordered_map<const TreeNode*, bool> memo;
  return values_nonnegative(root_.get(), memo);
}

std::vector<DiscreteLaw> OutcomeTree::step_marginals() const {
  // In-mass dynamic programming over the DAG: every distinct node object is
  // processed once per accumulated inflow, level by level.
  std::vector<std::vector<std::pair<double, double>>> acc(
      static_cast<std::size_t>(n_));  // (value, mass) per depth
  std::unordered_map<const TreeNode*, double> level{{root_.get(), 1.0}};
  for (int depth = 0; depth < n_; ++depth) {
    std::unordered_map<const TreeNode*, double> next;
    for (const auto& [node, inflow] : level) {
      for (const auto& b : node->branches) {
        const double m = inflow * b.prob;
        if (m == 0.0) continue;
        acc[static_cast<std::size_t>(depth)].emplace_back(b.value, m);
        if (b.child) next[b.child.get()] += m;
      }
    }
    level = std::move(next);
  }
  std::vector<DiscreteLaw> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (auto& atoms : acc) {
    std::vector<double> vs;
    std::vector<double> ps;
    vs.reserve(atoms.size());
    ps.reserve(atoms.size());
    for (auto& [v, p] : atoms) {
      vs.push_back(v);
      ps.push_back(p);
    }
    out.emplace_back(std::move(vs), std::move(ps), kMassTol);
  }
  return out;
}

std::vector<double> OutcomeTree::step_means() const {
  std::vector<double> out;
  const auto marginals = step_marginals();
  out.reserve(marginals.size());
  for (const auto& law : marginals) out.push_back(law.mean());
  return out;
}

OutcomeTree tree_from_step_laws(std::span<const DiscreteLaw> laws) {
  if (laws.empty()) throw ValidationError("product model: no step laws");
  std::shared_ptr<const TreeNode> below;  // shared chain, one node per level
  for (std::size_t k = laws.size(); k-- > 0;) {
    auto node = std::make_shared<TreeNode>();
    const auto vs = laws[k].values();
    const auto ps = laws[k].probs();
    node->branches.reserve(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i)
      node->branches.push_back({vs[i], ps[i], below});
    below = std::move(node);
  }
  return OutcomeTree(static_cast<int>(laws.size()), below);
}

double PathTable::total_mass() const { return kernels::sum(probs); }

PathAtom path_atom(const PathTable& table, std::size_t p) {
  return {table.path_values(p), table.probs[p]};
}

TreeIndex index_tree(const OutcomeTree& tree, std::size_t cap) {
  const std::size_t count = tree.path_count(cap);
  if (count > cap)
    throw ResourceError(
        "enumeration cap exceeded (" + std::to_string(cap) +
        " paths); raise the cap or use Monte Carlo estimation instead");

  TreeIndex idx;
  const int n = tree.steps();
  idx.paths.n = n;
  idx.paths.values.reserve(count * static_cast<std::size_t>(n));
  idx.paths.probs.reserve(count);
  idx.paths.nodes.reserve(count * static_cast<std::size_t>(n));

  std::vector<double> vals(static_cast<std::size_t>(n));
  std::vector<std::uint32_t> nodes(static_cast<std::size_t>(n));

  // DFS; every distinct prefix gets its own visit id even through shared
  // subtrees, because prefixes are the conditioning atoms.
  auto walk = [&](auto&& self, const TreeNode* node, int depth, double prob) -> void {
    const auto id = static_cast<std::uint32_t>(idx.node_laws.size());
    idx.node_laws.push_back(branch_law(*node));
    idx.node_means.push_back(idx.node_laws.back().mean());
    for (const auto& b : node->branches) {
      const double p = prob * b.prob;
      if (p == 0.0) continue;
      vals[static_cast<std::size_t>(depth)] = b.value;
      nodes[static_cast<std::size_t>(depth)] = id;
      if (depth + 1 == n) {
        idx.paths.values.insert(idx.paths.values.end(), vals.begin(), vals.end());
        idx.paths.nodes.insert(idx.paths.nodes.end(), nodes.begin(), nodes.end());
        idx.paths.probs.push_back(p);
      } else {
        self(self, b.child.get(), depth + 1, p);
      }
    }
  };
  walk(walk, &tree.root(), 0, 1.0);

  idx.paths.count = idx.paths.probs.size();
  idx.paths.sums.resize(idx.paths.count);
  for (std::size_t p = 0; p < idx.paths.count; ++p)
    idx.paths.sums[p] = kernels::sum(idx.paths.path_values(p));
  return idx;
}

PathTable enumerate_paths(const OutcomeTree& tree, std::size_t cap) {
  return index_tree(tree, cap).paths;
}

DiscreteLaw sum_law(const OutcomeTree& tree, std::size_t cap) {
  PathTable paths = enumerate_paths(tree, cap);
  return DiscreteLaw(std::move(paths.sums), std::move(paths.probs), kMassTol);
}

double sample_path_sum(const OutcomeTree& tree, RngStream& rng) {
  const TreeNode* node = &tree.root();
  double sum = 0.0;
  for (int depth = 0; depth < tree.steps(); ++depth) {
    const double u = rng.next_u01();
    double run = 0.0;
    const TreeNode::Branch* picked = &node->branches.back();
    for (const auto& b : node->branches) {
      run += b.prob;
      if (u < run) {
        picked = &b;
        break;
      }
    }
    sum += picked->value;
    node = picked->child.get();
  }
  return sum;
}

OutcomeTree random_tree(int n, int max_branching, double value_lo, double value_hi,
                        bool nonnegative, std::uint64_t seed) {
  if (n < 1 || n > 6)
    throw ValidationError("random tree: n must be in [1, 6]");
  if (max_branching < 1 || max_branching > 4)
    throw ValidationError("random tree: max_branching must be in [1, 4]");
  if (!std::isfinite(value_lo) || !std::isfinite(value_hi) || value_lo > value_hi)
    throw ValidationError("random tree: bad value range");
  double lo = value_lo;
  const double hi = value_hi;
  if (nonnegative) {
    lo = std::max(lo, 0.0);
    if (hi < lo) throw ValidationError("random tree: nonnegative range is empty");
  }

  RngStream rng(seed, /*stream=*/0x72ee);
  auto build = [&](auto&& self, int depth) -> std::shared_ptr<const TreeNode> {
    auto node = std::make_shared<TreeNode>();
    const int b = max_branching <= 1
                      ? 1
                      : 2 + static_cast<int>(rng.next_below(
                                static_cast<std::uint64_t>(max_branching - 1)));
    std::vector<double> weights(static_cast<std::size_t>(b));
    double total = 0.0;
    for (double& w : weights) {
      w = rng.next_range(0.1, 1.0);  // bounded below: strictly positive probs
      total += w;
    }
    node->branches.reserve(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k) {
      TreeNode::Branch br;
      br.value = rng.next_range(lo, hi);
      br.prob = weights[static_cast<std::size_t>(k)] / total;
      br.child = depth + 1 < n ? self(self, depth + 1) : nullptr;
      node->branches.push_back(std::move(br));
    }
    return node;
  };
  return OutcomeTree(n, build(build, 0));
}

OutcomeTree gallery_comonotone_bernoulli(int n, double p) {
  if (n < 1) throw ValidationError("comonotone_bernoulli: n must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("comonotone_bernoulli: p must be in (0, 1)");
  auto chain = [&](double v) {
    std::shared_ptr<const TreeNode> below;
    for (int k = 1; k < n; ++k) {
      auto node = std::make_shared<TreeNode>();
      node->branches.push_back({v, 1.0, below});
      below = std::move(node);
    }
    return below;
  };
  auto root = std::make_shared<TreeNode>();
  root->branches.push_back({1.0, p, chain(1.0)});
  root->branches.push_back({0.0, 1.0 - p, chain(0.0)});
  return OutcomeTree(n, root);
}

OutcomeTree gallery_unit_vector(int n) {
  if (n < 1) throw ValidationError("unit_vector: n must be >= 1");
  // Chain of m zero-steps after the single 1 has been placed.
  auto zeros = [&](int m) {
    std::shared_ptr<const TreeNode> below;
    for (int k = 0; k < m; ++k) {
      auto node = std::make_shared<TreeNode>();
      node->branches.push_back({0.0, 1.0, below});
      below = std::move(node);
    }
    return below;
  };
  // Spine node after k-1 zeros: the 1 lands here with probability 1/(n-k+1).
  std::shared_ptr<const TreeNode> spine;  // built bottom-up from k = n
  for (int k = n; k >= 1; --k) {
    auto node = std::make_shared<TreeNode>();
    const double hit = 1.0 / static_cast<double>(n - k + 1);
    node->branches.push_back({1.0, hit, zeros(n - k)});
    if (k < n) node->branches.push_back({0.0, 1.0 - hit, spine});
    spine = std::move(node);
  }
  return OutcomeTree(n, spine);
}

OutcomeTree gallery_remark_equality() {
  auto tail = [](double v) {
    auto node = std::make_shared<TreeNode>();
    node->branches.push_back({v, 1.0, nullptr});
    return node;
  };
  auto root = std::make_shared<TreeNode>();
  root->branches.push_back({1.0, 0.5, tail(1.0)});
  root->branches.push_back({-1.0, 0.5, tail(-1.0)});
  return OutcomeTree(2, root);
}

OutcomeTree gallery_quadratic_form(int n_vars, std::span<const QuadraticCoeff> coeffs,
                                   const DiscreteLaw& step_law, std::size_t cap) {
  if (n_vars < 1) throw ValidationError("quadratic_form: n must be >= 1");
  // a[i][j] with 1 <= i < j <= n
  std::vector<std::vector<double>> a(
      static_cast<std::size_t>(n_vars) + 1,
      std::vector<double>(static_cast<std::size_t>(n_vars) + 1, 0.0));
  for (const auto& c : coeffs) {
    if (c.i < 1 || c.j <= c.i || c.j > n_vars)
      throw ValidationError("quadratic_form: coefficient indices must satisfy 1 <= i < j <= n");
    if (!std::isfinite(c.a)) throw ValidationError("quadratic_form: non-finite coefficient");
    a[static_cast<std::size_t>(c.i)][static_cast<std::size_t>(c.j)] = c.a;
  }
  double size = 1.0;
  for (int k = 0; k < n_vars; ++k) size *= static_cast<double>(step_law.size());
  if (size > static_cast<double>(cap))
    throw ResourceError("quadratic_form: outcome count exceeds the enumeration cap");

  const auto vs = step_law.values();
  const auto ps = step_law.probs();
  std::vector<double> xs(static_cast<std::size_t>(n_vars));
  auto build = [&](auto&& self, int depth) -> std::shared_ptr<const TreeNode> {
    auto node = std::make_shared<TreeNode>();
    node->branches.reserve(vs.size());
    for (std::size_t k = 0; k < vs.size(); ++k) {
      double inner = 0.0;  // sum_{i <= depth} a_{i, depth+1} * X_i
      for (int i = 1; i <= depth; ++i)
        inner += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(depth + 1)] *
                 xs[static_cast<std::size_t>(i - 1)];
      TreeNode::Branch br;
      br.value = inner * vs[k];
      br.prob = ps[k];
      if (depth + 1 < n_vars) {
        xs[static_cast<std::size_t>(depth)] = vs[k];
        br.child = self(self, depth + 1);
      }
      node->branches.push_back(std::move(br));
    }
    return node;
  };
  return OutcomeTree(n_vars, build(build, 0));
}

ComonotoneClosedForms comonotone_closed_forms(int n, double p) {
  if (n < 1) throw ValidationError("comonotone closed forms: n must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("comonotone closed forms: p must be in (0, 1)");
  const double nd = static_cast<double>(n);
  ComonotoneClosedForms out;
  out.d_second_moment = nd * nd * p;
  out.z_second_moment = nd * p * (nd * p + 1.0 - p);
  out.ratio = out.d_second_moment / out.z_second_moment;  // = n / (np + 1 - p)
  return out;
}

}  // namespace decouple
