#include "decouple/moments.hpp"

#include <cmath>
#include <cstdio>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

namespace decouple {

MomentSummary exact_moments(std::span<const double> values,
                            std::span<const double> probs) {
  if (values.empty()) throw ValidationError("exact moments: empty atom list");
  if (values.size() != probs.size())
    throw ValidationError("exact moments: values/probs size mismatch");
  MomentSummary m;
  m.kind = MomentSummary::Kind::exact;
  m.mean = kernels::dot(values, probs);
  m.second_moment = kernels::weighted_sq(values, probs);
  m.variance = kernels::weighted_centered_sq(values, probs, m.mean);
  return m;
}

MomentSummary exact_moments(const DiscreteLaw& law) {
  return exact_moments(law.values(), law.probs());
}

MomentSummary d_sum_moments(const JointDecoupledSpace& space) {
  const PathTable& paths = space.index().paths;
  return exact_moments(paths.sums, paths.probs);
}

MomentSummary e_sum_moments(const JointDecoupledSpace& space) {
  return exact_moments(space.e_sums(), space.probs());
}

double ProjectionTable::expectation() const { return kernels::dot(values, probs); }

std::string ProjectionTable::to_csv(const PathTable& paths) const {
  const int n = paths.n;
  std::string out;
  for (int k = 1; k <= n; ++k) out += "d" + std::to_string(k) + ",";
  out += "prob,projection\n";
  char buf[40];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.12g%c", v, sep);
    out += buf;
  };
  for (std::size_t p = 0; p < paths.count; ++p) {
    for (double v : paths.path_values(p)) put(v, ',');
    put(probs[p], ',');
    put(values[p], '\n');
  }
  return out;
}

ProjectionTable project_on_G(const JointDecoupledSpace& space) {
  const TreeIndex& idx = space.index();
  const std::size_t n = static_cast<std::size_t>(space.steps());
  ProjectionTable table;
  table.values.resize(idx.paths.count);
  table.probs = idx.paths.probs;
  for (std::size_t p = 0; p < idx.paths.count; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += idx.node_means[idx.paths.nodes[p * n + k]];
    table.values[p] = acc;
  }
  return table;
}

double check_decomposition(const JointDecoupledSpace& space) {
  const ProjectionTable proj = project_on_G(space);
  const double e_m2 = kernels::weighted_sq(space.e_sums(), space.probs());

  std::vector<double> centered(space.atom_count());
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    centered[a] = space.e_sums()[a] - proj.values[space.path_idx()[a]];
  const double around_proj = kernels::weighted_sq(centered, space.probs());
  const double proj_m2 = kernels::weighted_sq(proj.values, proj.probs);
  return std::fabs(e_m2 - around_proj - proj_m2);
}

DistancePair check_distance_equality(const JointDecoupledSpace& space) {
  const ProjectionTable proj = project_on_G(space);
  const PathTable& paths = space.index().paths;

  std::vector<double> d_centered(paths.count);
  for (std::size_t p = 0; p < paths.count; ++p)
    d_centered[p] = paths.sums[p] - proj.values[p];
  std::vector<double> e_centered(space.atom_count());
  for (std::size_t a = 0; a < space.atom_count(); ++a)
    e_centered[a] = space.e_sums()[a] - proj.values[space.path_idx()[a]];

  DistancePair out;
  out.lhs = kernels::weighted_sq(d_centered, paths.probs);
  out.rhs = kernels::weighted_sq(e_centered, space.probs());
  return out;
}

double max_cross_term(const JointDecoupledSpace& space) {
  const TreeIndex& idx = space.index();
  const PathTable& paths = idx.paths;
  const std::size_t n = static_cast<std::size_t>(space.steps());
  if (n < 2) return 0.0;

  // per-step arrays of d_i - E(e_i|G) over paths and e_i - E(e_i|G) over atoms
  std::vector<std::vector<double>> d_cent(n, std::vector<double>(paths.count));
  for (std::size_t p = 0; p < paths.count; ++p)
    for (std::size_t k = 0; k < n; ++k)
      d_cent[k][p] =
          paths.values[p * n + k] - idx.node_means[paths.nodes[p * n + k]];

  std::vector<std::vector<double>> e_cent(n, std::vector<double>(space.atom_count()));
  for (std::size_t a = 0; a < space.atom_count(); ++a) {
    const std::size_t p = space.path_idx()[a];
    for (std::size_t k = 0; k < n; ++k)
      e_cent[k][a] = space.e_value(a, static_cast<int>(k)) -
                     idx.node_means[paths.nodes[p * n + k]];
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(
          worst, std::fabs(kernels::weighted_prod(d_cent[i], d_cent[j], paths.probs)));
      worst = std::max(worst, std::fabs(kernels::weighted_prod(e_cent[i], e_cent[j],
                                                               space.probs())));
    }
  return worst;
}

}  // namespace decouple
