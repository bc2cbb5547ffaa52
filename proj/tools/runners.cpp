#include "runners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "decouple/decoupling.hpp"
#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"
#include "decouple/model_config.hpp"
#include "decouple/montecarlo.hpp"
#include "decouple/stopped_sums.hpp"

namespace decouple::cli {

namespace {

constexpr double kTailGrid[] = {0.5, 1.0, 2.0};
constexpr double kThetaGrid[] = {0.1, 0.5, 0.9};
constexpr double kZGate = 4.0;

void emit(const ExperimentReport& report, const GlobalOpts& opts) {
  const std::string text = render(report, parse_format(opts.format));
  if (opts.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file: " + opts.out);
  out << text;
}

void finish(ExperimentReport& report, const GlobalOpts& opts) {
  if (!opts.timestamp.empty()) report.timestamp = opts.timestamp;
  report.seed = opts.seed;
}

void push_residual(ExperimentReport& report, std::string name, double value,
                   double tol) {
  report.residuals.push_back({std::move(name), value, tol, value <= tol});
}

std::string param_tag(const char* key, double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g", key, value);
  return buf;
}

// All checks and bounds that apply to one tree: moment tables, tangency /
// conditional-independence / projection residuals, the tangent upper bounds,
// the complete lower bound for nonnegative models, and the tail-bound grid
// compared against exact enumeration.
ExperimentReport model_checks(const OutcomeTree& tree, const GlobalOpts& opts,
                              std::string experiment_id, nlohmann::json config_echo) {
  ExperimentReport report;
  report.experiment_id = std::move(experiment_id);
  report.config = std::move(config_echo);

  const JointDecoupledSpace space = tangent_decouple(tree, opts.cap);
  const MomentSummary d = d_sum_moments(space);
  const MomentSummary e = e_sum_moments(space);
  const MomentSummary z = exact_moments(complete_decouple(tree).sum_law());
  report.moments.push_back({"d_sum", d});
  report.moments.push_back({"z_sum", z});
  report.moments.push_back({"e_sum", e});

  push_residual(report, "tangency", verify_tangency(space), opts.tol);
  push_residual(report, "conditional_independence",
                verify_conditional_independence(space), opts.tol);
  push_residual(report, "marginal_preservation",
                verify_marginal_preservation(space), opts.tol);
  push_residual(report, "mean_preservation", std::fabs(e.mean - d.mean), opts.tol);
  push_residual(report, "projection_decomposition", check_decomposition(space),
                opts.tol);
  const DistancePair dist = check_distance_equality(space);
  push_residual(report, "distance_equality", std::fabs(dist.lhs - dist.rhs),
                opts.tol);
  push_residual(report, "max_cross_term", max_cross_term(space), opts.tol);

  report.bounds.push_back(second_moment_upper(space, opts.tol));
  report.bounds.push_back(variance_upper(space, opts.tol));
  report.bounds.push_back(refined_upper(space, opts.tol));
  const bool nonneg = tree.all_values_nonnegative();
  if (nonneg) report.bounds.push_back(complete_lower_bound(tree, opts.tol, opts.cap));

  // tail-bound grid vs exact path enumeration
  const PathTable& paths = space.index().paths;
  const double e_var = e.variance;
  for (double t : kTailGrid) {
    const double exact =
        kernels::mass_abs_deviation_above(paths.sums, paths.probs, d.mean, t);
    report.bounds.push_back(make_bound_report(
        "chebyshev", exact, chebyshev_bound(e_var, t),
        SlackOrientation::rhs_minus_lhs, opts.tol, param_tag("t", t)));
  }
  if (nonneg && d.mean > 0.0) {
    for (double theta : kThetaGrid) {
      const double exact =
          kernels::mass_above(paths.sums, paths.probs, theta * d.mean);
      report.bounds.push_back(make_bound_report(
          "paley_zygmund", exact,
          paley_zygmund_bound(d.mean, e.second_moment, theta),
          SlackOrientation::lhs_minus_rhs, opts.tol, param_tag("theta", theta)));
    }
  }

  report.metrics.push_back({"steps", static_cast<double>(tree.steps())});
  report.metrics.push_back({"paths", static_cast<double>(paths.count)});
  report.metrics.push_back(
      {"joint_atoms", static_cast<double>(space.atom_count())});

  if (opts.mc_samples > 0) {
    EstimatorConfig cfg{opts.mc_samples, opts.seed, opts.streams};
    auto sampler = [&tree](RngStream& rng) { return sample_path_sum(tree, rng); };
    const MomentSummary est = estimate_moments(sampler, cfg);
    const ZScores zs = zscores(est, d);
    report.moments.push_back({"d_sum_mc", est});
    push_residual(report, "mc_zscore_mean", std::fabs(zs.mean), kZGate);
    push_residual(report, "mc_zscore_second_moment", std::fabs(zs.second_moment),
                  kZGate);
  }
  return report;
}

}  // namespace

int run_gallery(const std::string& name, const nlohmann::json& params,
                const GlobalOpts& opts) {
  const OutcomeTree tree = gallery_by_name(name, params, opts.cap);
  nlohmann::json echo = {{"kind", "gallery"}, {"name", name}, {"params", params}};
  ExperimentReport report =
      model_checks(tree, opts, "gallery:" + name, std::move(echo));

  if (name == "comonotone_bernoulli") {
    const ComonotoneClosedForms closed = comonotone_closed_forms(
        params.at("n").get<int>(), params.at("p").get<double>());
    report.metrics.push_back({"closed_form_d_second_moment", closed.d_second_moment});
    report.metrics.push_back({"closed_form_z_second_moment", closed.z_second_moment});
    report.metrics.push_back({"d_to_z_second_moment_ratio", closed.ratio});
    // enumeration must agree with the closed forms
    double d_m2 = 0.0, z_m2 = 0.0;
    for (const MomentRow& row : report.moments) {
      if (row.name == "d_sum") d_m2 = row.moments.second_moment;
      if (row.name == "z_sum") z_m2 = row.moments.second_moment;
    }
    push_residual(report, "closed_form_d_consistency",
                  std::fabs(d_m2 - closed.d_second_moment) /
                      std::max(1.0, closed.d_second_moment),
                  1e-6);
    push_residual(report, "closed_form_z_consistency",
                  std::fabs(z_m2 - closed.z_second_moment) /
                      std::max(1.0, closed.z_second_moment),
                  1e-6);
  }

  finish(report, opts);
  emit(report, opts);
  return report.all_ok() ? 0 : 1;
}

int run_verify_file(const std::string& model_path, const GlobalOpts& opts,
                    const std::string& export_space_csv,
                    const std::string& export_projection_csv) {
  const nlohmann::json config = load_json_file(model_path);
  const OutcomeTree tree = model_from_json(config, opts.cap);
  ExperimentReport report = model_checks(tree, opts, "verify:" + model_path, config);

  if (!export_space_csv.empty() || !export_projection_csv.empty()) {
    const JointDecoupledSpace space = tangent_decouple(tree, opts.cap);
    if (!export_space_csv.empty()) {
      std::ofstream out(export_space_csv, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + export_space_csv);
      out << space.to_csv();
    }
    if (!export_projection_csv.empty()) {
      std::ofstream out(export_projection_csv, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + export_projection_csv);
      out << project_on_G(space).to_csv(space.index().paths);
    }
  }

  finish(report, opts);
  emit(report, opts);
  return report.all_ok() ? 0 : 1;
}

int run_verify_random(const RandomSuite& suite, const GlobalOpts& opts) {
  if (suite.count < 1) throw ValidationError("verify: --random count must be >= 1");

  // Worst case over the whole suite, per check.
  double tangency = 0.0, ci = 0.0, marg = 0.0, meanp = 0.0, decomp = 0.0,
         dist = 0.0, cross = 0.0;
  BoundReport worst_m2, worst_var, worst_ref, worst_low;
  bool have_low = false;
  auto keep_worst = [](BoundReport& worst, const BoundReport& candidate) {
    if (worst.inequality_id.empty() || *candidate.slack < *worst.slack)
      worst = candidate;
  };

  for (int k = 0; k < suite.count; ++k) {
    const std::uint64_t seed = suite.seed + static_cast<std::uint64_t>(k);
    const OutcomeTree tree =
        random_tree(suite.n, suite.branching, suite.value_lo, suite.value_hi,
                    suite.nonnegative, seed);
    const JointDecoupledSpace space = tangent_decouple(tree, opts.cap);
    tangency = std::max(tangency, verify_tangency(space));
    ci = std::max(ci, verify_conditional_independence(space));
    marg = std::max(marg, verify_marginal_preservation(space));
    const MomentSummary d = d_sum_moments(space);
    const MomentSummary e = e_sum_moments(space);
    meanp = std::max(meanp, std::fabs(e.mean - d.mean));
    decomp = std::max(decomp, check_decomposition(space));
    const DistancePair pair = check_distance_equality(space);
    dist = std::max(dist, std::fabs(pair.lhs - pair.rhs));
    cross = std::max(cross, max_cross_term(space));
    keep_worst(worst_m2, second_moment_upper(space, opts.tol));
    keep_worst(worst_var, variance_upper(space, opts.tol));
    keep_worst(worst_ref, refined_upper(space, opts.tol));
    if (suite.nonnegative) {
      keep_worst(worst_low, complete_lower_bound(tree, opts.tol, opts.cap));
      have_low = true;
    }
  }

  ExperimentReport report;
  report.experiment_id = "verify:random";
  report.config = {{"random", suite.count},        {"n", suite.n},
                   {"branching", suite.branching}, {"value_lo", suite.value_lo},
                   {"value_hi", suite.value_hi},   {"nonnegative", suite.nonnegative},
                   {"seed", suite.seed}};
  push_residual(report, "tangency", tangency, opts.tol);
  push_residual(report, "conditional_independence", ci, opts.tol);
  push_residual(report, "marginal_preservation", marg, opts.tol);
  push_residual(report, "mean_preservation", meanp, opts.tol);
  push_residual(report, "projection_decomposition", decomp, opts.tol);
  push_residual(report, "distance_equality", dist, opts.tol);
  push_residual(report, "max_cross_term", cross, opts.tol);
  report.bounds.push_back(worst_m2);
  report.bounds.push_back(worst_var);
  report.bounds.push_back(worst_ref);
  if (have_low) report.bounds.push_back(worst_low);
  report.metrics.push_back({"models_checked", static_cast<double>(suite.count)});

  finish(report, opts);
  emit(report, opts);
  return report.all_ok() ? 0 : 1;
}

int run_stopped(const std::string& spec_path, const GlobalOpts& opts) {
  const nlohmann::json config = load_json_file(spec_path);
  const StoppedSumSpec spec = stopped_spec_from_json(config);
  const TauMoments tm = tau_moments(spec.tail);
  const DecoupledStoppedMoments dec = decoupled_stopped_moments(spec);

  ExperimentReport report;
  report.experiment_id = "stopped:" + spec_path;
  report.config = config;
  report.metrics.push_back({"e_tau", tm.e_tau});
  report.metrics.push_back({"e_tau2", tm.e_tau2});
  report.metrics.push_back({"decoupled_mean", dec.mean});
  report.metrics.push_back({"decoupled_second_moment", dec.second_moment});
  report.metrics.push_back({"series_form_alt", stopped_bound_series_form(spec)});

  std::optional<double> lhs;
  double lhs_tol = opts.tol;
  const bool enumerable = spec.increment_support && spec.rule;
  if (enumerable) {
    bool enumerated = false;
    try {
      const ExactStopped exact = enumerate_stopped(spec, opts.cap);
      enumerated = true;
      lhs = exact.second_moment;
      report.metrics.push_back({"exact_stopped_mean", exact.mean});
      report.metrics.push_back({"horizon_mass", exact.horizon_mass});
      double tail_gap = 0.0;
      for (std::size_t j = 0; j < spec.tail.size(); ++j)
        tail_gap = std::max(tail_gap, std::fabs(exact.tau_tail[j] - spec.tail[j]));
      push_residual(report, "tail_vs_rule", tail_gap, opts.tol);
      if (std::fabs(spec.mu) <= kValueMergeTol)
        push_residual(report, "wald_second_moment",
                      std::fabs(exact.second_moment -
                                wald_second_moment(spec.sigma2, tm.e_tau)),
                      opts.tol);
    } catch (const ResourceError&) {
      // fall through to Monte Carlo when requested
    }
    if (enumerated && opts.mc_samples > 0) {
      EstimatorConfig cfg{opts.mc_samples, opts.seed, opts.streams};
      auto sampler = [&spec](RngStream& rng) {
        return sample_stopped_sum(spec, rng).s_tau;
      };
      const MomentSummary est = estimate_moments(sampler, cfg);
      report.moments.push_back({"s_tau_mc", est});
      const double z = est.second_moment_std_error > 0.0
                           ? std::fabs(est.second_moment - *lhs) /
                                 est.second_moment_std_error
                           : 0.0;
      push_residual(report, "mc_zscore_second_moment", z, kZGate);
    }
    if (!enumerated && opts.mc_samples > 0) {
      EstimatorConfig cfg{opts.mc_samples, opts.seed, opts.streams};
      auto sampler = [&spec](RngStream& rng) {
        return sample_stopped_sum(spec, rng).s_tau;
      };
      const MomentSummary est = estimate_moments(sampler, cfg);
      lhs = est.second_moment;
      lhs_tol = 3.0 * est.second_moment_std_error;
      report.moments.push_back({"s_tau_mc", est});
      if (std::fabs(spec.mu) <= kValueMergeTol) {
        const double wald = wald_second_moment(spec.sigma2, tm.e_tau);
        const double z = est.second_moment_std_error > 0.0
                             ? std::fabs(est.second_moment - wald) /
                                   est.second_moment_std_error
                             : 0.0;
        push_residual(report, "wald_zscore", z, kZGate);
      }
    } else if (!enumerated && opts.mc_samples == 0) {
      throw ResourceError(
          "stopped enumeration exceeds the cap; rerun with --mc to estimate");
    }
  }

  report.bounds.push_back(stopped_sum_upper_bound(spec, lhs, lhs_tol));
  finish(report, opts);
  emit(report, opts);
  return report.all_ok() ? 0 : 1;
}

int run_bounds(bool have_chebyshev, double var_decoupled, double t, bool have_pz,
               double mean, double m2_decoupled, double theta,
               const GlobalOpts& opts) {
  if (!have_chebyshev && !have_pz)
    throw ValidationError(
        "bounds: provide --var-decoupled with --t and/or --mean with "
        "--m2-decoupled and --theta");
  ExperimentReport report;
  report.experiment_id = "bounds";
  nlohmann::json echo = nlohmann::json::object();
  if (have_chebyshev) {
    const double bound = chebyshev_bound(var_decoupled, t);
    report.metrics.push_back({"chebyshev", bound});
    echo["var_decoupled"] = var_decoupled;
    echo["t"] = t;
    std::cerr << "chebyshev(" << var_decoupled << ", " << t << ") = " << bound
              << "\n";
  }
  if (have_pz) {
    const double bound = paley_zygmund_bound(mean, m2_decoupled, theta);
    report.metrics.push_back({"paley_zygmund", bound});
    echo["mean"] = mean;
    echo["m2_decoupled"] = m2_decoupled;
    echo["theta"] = theta;
    std::cerr << "paley_zygmund(" << mean << ", " << m2_decoupled << ", " << theta
              << ") = " << bound << "\n";
  }
  report.config = std::move(echo);
  finish(report, opts);
  emit(report, opts);
  return 0;
}

}  // namespace decouple::cli
