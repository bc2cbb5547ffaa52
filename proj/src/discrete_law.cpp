#include "decouple/discrete_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"

namespace decouple {

DiscreteLaw::DiscreteLaw(std::vector<double> values, std::vector<double> probs,
                         double sum_tol) {
  if (values.size() != probs.size())
    throw ValidationError("discrete law: values/probs size mismatch");
  if (values.empty()) throw ValidationError("discrete law: empty atom list");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw ValidationError("discrete law: non-finite atom value");
    if (!std::isfinite(probs[i]) || probs[i] < 0.0)
      throw ValidationError("discrete law: negative or non-finite probability");
  }
  const double total = kernels::sum(probs);
  if (std::fabs(total - 1.0) > sum_tol)
    throw ValidationError("discrete law: probabilities sum to " +
                          std::to_string(total) + ", expected 1 within tolerance");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  for (std::size_t k : order) {
    const double v = values[k];
    const double p = probs[k];
    if (p == 0.0) continue;
    if (!values_.empty() && std::fabs(values_.back() - v) <= kValueMergeTol) {
      probs_.back() += p;
    } else {
      values_.push_back(v);
      probs_.push_back(p);
    }
  }
  if (values_.empty()) throw ValidationError("discrete law: all atoms have zero mass");

  for (double& p : probs_) p /= total;
  cum_.resize(probs_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    run += probs_[i];
    cum_[i] = run;
  }
  cum_.back() = 1.0;
}

DiscreteLaw DiscreteLaw::point_mass(double v) { return DiscreteLaw({v}, {1.0}); }

DiscreteLaw DiscreteLaw::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("bernoulli: p outside [0,1]");
  return DiscreteLaw({0.0, 1.0}, {1.0 - p, p});
}

DiscreteLaw DiscreteLaw::rademacher() {
  return DiscreteLaw({-1.0, 1.0}, {0.5, 0.5});
}

double DiscreteLaw::mean() const { return kernels::dot(values_, probs_); }

double DiscreteLaw::second_moment() const {
  return kernels::weighted_sq(values_, probs_);
}

double DiscreteLaw::variance() const {
  return kernels::weighted_centered_sq(values_, probs_, mean());
}

bool DiscreteLaw::all_nonnegative() const {
  return values_.empty() || values_.front() >= 0.0;
}

std::size_t DiscreteLaw::sample_index(RngStream& rng) const {
  const double u = rng.next_u01();
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()),
                               values_.size() - 1);
}

double DiscreteLaw::sample(RngStream& rng) const { return values_[sample_index(rng)]; }

DiscreteLaw DiscreteLaw::convolve(const DiscreteLaw& other) const {
  std::vector<double> vs;
  std::vector<double> ps;
  vs.reserve(size() * other.size());
  ps.reserve(size() * other.size());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < other.size(); ++j) {
      vs.push_back(values_[i] + other.values_[j]);
      ps.push_back(probs_[i] * other.probs_[j]);
    }
  return DiscreteLaw(std::move(vs), std::move(ps), kMassTol);
}

DiscreteLaw sum_of_independent(std::span<const DiscreteLaw> laws) {
  DiscreteLaw acc = DiscreteLaw::point_mass(0.0);
  for (const DiscreteLaw& law : laws) acc = acc.convolve(law);
  return acc;
}

double law_linf_distance(const DiscreteLaw& a, const DiscreteLaw& b) {
  const auto av = a.values();
  const auto ap = a.probs();
  const auto bv = b.values();
  const auto bp = b.probs();
  double worst = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < av.size() || j < bv.size()) {
    if (i < av.size() && j < bv.size() && std::fabs(av[i] - bv[j]) <= kValueMergeTol) {
      worst = std::max(worst, std::fabs(ap[i] - bp[j]));
      ++i;
      ++j;
    } else if (j >= bv.size() || (i < av.size() && av[i] < bv[j])) {
      worst = std::max(worst, ap[i]);
      ++i;
    } else {
      worst = std::max(worst, bp[j]);
      ++j;
    }
  }
  return worst;
}

}  // namespace decouple
