#include "decouple/stopped_sums.hpp"

#include <cmath>

#include "decouple/errors.hpp"

namespace decouple {

StoppingRule fixed_rule(int m) {
  if (m < 0) throw ValidationError("fixed rule: m must be >= 0");
  return {"fixed", [m](std::span<const double> prefix) {
            return static_cast<int>(prefix.size()) >= m;
          }};
}

StoppingRule first_success_rule(double threshold) {
  return {"first_success", [threshold](std::span<const double> prefix) {
            return !prefix.empty() && prefix.back() >= threshold;
          }};
}

StoppingRule sum_at_least_rule(double threshold) {
  return {"sum_at_least", [threshold](std::span<const double> prefix) {
            double s = 0.0;
            for (double x : prefix) s += x;
            return s >= threshold;
          }};
}

void StoppedSumSpec::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(sigma2))
    throw ValidationError("stopped sum: non-finite increment moments");
  if (sigma2 < 0.0) throw ValidationError("stopped sum: sigma2 must be >= 0");
  double prev = 1.0 + kValueMergeTol;
  for (double q : tail) {
    if (!std::isfinite(q) || q < -kValueMergeTol || q > 1.0 + kValueMergeTol)
      throw ValidationError("stopped sum: tail entry outside [0, 1]");
    if (q > prev + kValueMergeTol)
      throw ValidationError("stopped sum: tail vector is not monotone non-increasing");
    prev = q;
  }
  if (increment_support) {
    if (std::fabs(increment_support->mean() - mu) > kDefaultTol)
      throw ValidationError("stopped sum: support mean disagrees with mu");
    if (std::fabs(increment_support->variance() - sigma2) > kDefaultTol)
      throw ValidationError("stopped sum: support variance disagrees with sigma2");
  }
}

TauMoments tau_moments(std::span<const double> tail) {
  double prev = 1.0 + kValueMergeTol;
  TauMoments out;
  for (std::size_t j = 0; j < tail.size(); ++j) {
    const double q = tail[j];
    if (!std::isfinite(q) || q < -kValueMergeTol || q > prev + kValueMergeTol)
      throw ValidationError("tau moments: tail vector is not a monotone tail in [0,1]");
    prev = q;
    out.e_tau += q;
    out.e_tau2 += static_cast<double>(2 * (j + 1) - 1) * q;
  }
  return out;
}

DecoupledStoppedMoments decoupled_stopped_moments(const StoppedSumSpec& spec) {
  spec.validate();
  const TauMoments tm = tau_moments(spec.tail);
  double series = 0.0;  // sum_{j>=2} (j-1) q_j
  for (std::size_t j = 1; j < spec.tail.size(); ++j)
    series += static_cast<double>(j) * spec.tail[j];
  DecoupledStoppedMoments out;
  out.mean = spec.mu * tm.e_tau;
  out.second_moment = (spec.mu * spec.mu + spec.sigma2) * tm.e_tau +
                      2.0 * spec.mu * spec.mu * series;
  return out;
}

double decoupled_bound_rhs(const StoppedSumSpec& spec) {
  const DecoupledStoppedMoments m = decoupled_stopped_moments(spec);
  return 2.0 * m.second_moment - m.mean * m.mean;
}

double stopped_bound_series_form(const StoppedSumSpec& spec) {
  spec.validate();
  const TauMoments tm = tau_moments(spec.tail);
  double series = 0.0;
  for (std::size_t j = 1; j < spec.tail.size(); ++j)
    series += static_cast<double>(j) * spec.tail[j];
  return 2.0 * spec.mu * spec.mu * series +
         (2.0 * spec.mu * spec.mu + 2.0 * spec.sigma2 - spec.mu) * tm.e_tau;
}

BoundReport stopped_sum_upper_bound(const StoppedSumSpec& spec,
                                    std::optional<double> lhs, double tol) {
  return make_bound_report("stopped_sum_upper", lhs, decoupled_bound_rhs(spec),
                           SlackOrientation::rhs_minus_lhs, tol);
}

double wald_second_moment(double sigma2, double e_tau) { return sigma2 * e_tau; }

StoppedDraw sample_stopped_sum(const StoppedSumSpec& spec, RngStream& rng) {
  if (!spec.increment_support || !spec.rule)
    throw ValidationError("stopped sampler: needs increment support and a rule");
  const std::size_t horizon = spec.horizon();
  std::vector<double> prefix;
  prefix.reserve(horizon);
  StoppedDraw draw;
  if (spec.rule->stop(prefix)) return draw;  // tau = 0
  for (std::size_t i = 1; i <= horizon; ++i) {
    prefix.push_back(spec.increment_support->sample(rng));
    draw.s_tau += prefix.back();
    draw.tau = static_cast<int>(i);
    if (spec.rule->stop(prefix)) return draw;
  }
  draw.hit_horizon = true;
  return draw;
}

StoppedDraw sample_decoupled_stopped_sum(const StoppedSumSpec& spec, RngStream& rng) {
  if (!spec.increment_support)
    throw ValidationError("decoupled stopped sampler: needs increment support");
  const double u = rng.next_u01();
  // P(tau' >= j) = q_j, so tau' = max{j : q_j > u} (tau' = 0 when u >= q_1)
  int tau = 0;
  for (std::size_t j = 0; j < spec.tail.size(); ++j) {
    if (u < spec.tail[j])
      tau = static_cast<int>(j + 1);
    else
      break;
  }
  StoppedDraw draw;
  draw.tau = tau;
  for (int i = 0; i < tau; ++i) draw.s_tau += spec.increment_support->sample(rng);
  return draw;
}

ExactStopped enumerate_stopped(const StoppedSumSpec& spec, std::size_t cap) {
  if (!spec.increment_support || !spec.rule)
    throw ValidationError("stopped enumeration: needs increment support and a rule");
  spec.validate();
  const DiscreteLaw& law = *spec.increment_support;
  const std::size_t horizon = spec.horizon();

  ExactStopped out;
  out.tau_tail.assign(horizon, 0.0);
  std::vector<std::pair<double, double>> s_atoms;  // (value, prob) of S_tau
  std::size_t leaves = 0;

  std::vector<double> prefix;
  prefix.reserve(horizon);
  auto leaf = [&](double s, double prob, std::size_t tau, bool capped) {
    if (++leaves > cap)
      throw ResourceError("stopped enumeration exceeds the cap; use Monte Carlo");
    out.mean += prob * s;
    out.second_moment += prob * s * s;
    for (std::size_t j = 1; j <= tau; ++j) out.tau_tail[j - 1] += prob;
    if (capped) out.horizon_mass += prob;
    s_atoms.emplace_back(s, prob);
  };

  auto walk = [&](auto&& self, double s, double prob) -> void {
    if (prefix.size() == horizon) {
      leaf(s, prob, horizon, true);
      return;
    }
    const auto vs = law.values();
    const auto ps = law.probs();
    for (std::size_t k = 0; k < vs.size(); ++k) {
      prefix.push_back(vs[k]);
      const double s2 = s + vs[k];
      const double p2 = prob * ps[k];
      if (spec.rule->stop(prefix))
        leaf(s2, p2, prefix.size(), false);
      else
        self(self, s2, p2);
      prefix.pop_back();
    }
  };

  if (spec.rule->stop(prefix))
    leaf(0.0, 1.0, 0, false);  // tau = 0
  else
    walk(walk, 0.0, 1.0);

  const DiscreteLaw s_law = [&] {
    std::vector<double> vs;
    std::vector<double> ps;
    vs.reserve(s_atoms.size());
    ps.reserve(s_atoms.size());
    for (auto& [v, p] : s_atoms) {
      vs.push_back(v);
      ps.push_back(p);
    }
    return DiscreteLaw(std::move(vs), std::move(ps), kMassTol);
  }();
  out.s_values.assign(s_law.values().begin(), s_law.values().end());
  out.s_probs.assign(s_law.probs().begin(), s_law.probs().end());
  return out;
}

}  // namespace decouple
