#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "decouple/errors.hpp"
#include "decouple/kernels.hpp"
#include "runners.hpp"

namespace {

// Exit codes: 0 all checks hold, 1 a check failed, 2 input error, 3 resource cap.
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitResourceError = 3;

void add_common(CLI::App* cmd, decouple::cli::GlobalOpts& opts) {
  cmd->add_option("--out", opts.out, "Write the report here instead of stdout");
  cmd->add_option("--format", opts.format, "Report format: json, csv, table")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  cmd->add_option("--tol", opts.tol, "Check tolerance")
      ->envname("DECOUPLE_TOL")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cap", opts.cap, "Enumeration cap (atoms)")
      ->envname("DECOUPLE_CAP")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts.seed, "Seed for any sampling in this run");
  cmd->add_option("--streams", opts.streams, "Monte Carlo substreams")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--timestamp", opts.timestamp,
                  "Timestamp string for the report (default: fixed epoch)")
      ->envname("DECOUPLE_TIMESTAMP");
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* force = std::getenv("DECOUPLE_FORCE_SCALAR");
      force != nullptr && force[0] == '1')
    decouple::kernels::set_force_scalar(true);

  CLI::App app{"Exact and Monte-Carlo decoupling diagnostics for finite adapted sequences"};
  app.require_subcommand(1);

  decouple::cli::GlobalOpts opts;

  // gallery
  auto* gallery = app.add_subcommand("gallery", "Run all checks on a canned model");
  std::string gallery_name;
  int gallery_n = 0;
  double gallery_p = 0.0;
  gallery->add_option("name", gallery_name,
                      "comonotone_bernoulli | unit_vector | remark_equality | "
                      "quadratic_form")
      ->required();
  gallery->add_option("--n", gallery_n, "Model size");
  gallery->add_option("--p", gallery_p, "Bernoulli parameter");
  gallery->add_option("--mc", opts.mc_samples,
                      "Cross-check moments with this many Monte Carlo samples");
  add_common(gallery, opts);

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Check a model file, or a seeded random-model suite");
  std::string model_path;
  std::string export_space;
  std::string export_projection;
  decouple::cli::RandomSuite suite;
  bool use_random = false;
  verify->add_option("model", model_path, "Model description file (JSON)");
  verify->add_option("--random", suite.count, "Number of random models to check");
  verify->add_option("--n", suite.n, "Random model steps (<= 6)");
  verify->add_option("--branching", suite.branching, "Random model branching (<= 4)");
  verify->add_option("--value-lo", suite.value_lo, "Random value range low end");
  verify->add_option("--value-hi", suite.value_hi, "Random value range high end");
  verify->add_flag("--nonnegative", suite.nonnegative,
                   "Restrict values to >= 0 and include the complete lower bound");
  verify->add_option("--export-space", export_space,
                     "Write the joint decoupled space as CSV (file models only)");
  verify->add_option("--export-projection", export_projection,
                     "Write the projection table as CSV (file models only)");
  add_common(verify, opts);

  // stopped
  auto* stopped = app.add_subcommand("stopped", "Randomly stopped sum checks");
  std::string spec_path;
  stopped->add_option("spec", spec_path, "Stopped-sum spec file (JSON)")->required();
  stopped->add_option("--mc", opts.mc_samples,
                      "Monte Carlo samples when exact enumeration is infeasible");
  add_common(stopped, opts);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Tail-bound calculators");
  double var_decoupled = 0.0, t = 0.0, mean = 0.0, m2_decoupled = 0.0, theta = 0.0;
  auto* opt_var = bounds->add_option("--var-decoupled", var_decoupled,
                                     "Decoupled variance Var(sum e)");
  auto* opt_t = bounds->add_option("--t", t, "Deviation threshold");
  auto* opt_mean = bounds->add_option("--mean", mean, "E S (must be > 0)");
  auto* opt_m2 = bounds->add_option("--m2-decoupled", m2_decoupled,
                                    "Decoupled second moment E S'^2");
  auto* opt_theta = bounds->add_option("--theta", theta, "Fraction in (0, 1)");
  add_common(bounds, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (gallery->parsed()) {
      nlohmann::json params = nlohmann::json::object();
      if (gallery->count("--n")) params["n"] = gallery_n;
      if (gallery->count("--p")) params["p"] = gallery_p;
      return decouple::cli::run_gallery(gallery_name, params, opts);
    }
    if (verify->parsed()) {
      use_random = verify->count("--random") > 0;
      if (use_random == !model_path.empty())
        throw decouple::ValidationError(
            "verify: pass exactly one of a model file or --random");
      if (use_random) {
        suite.seed = opts.seed;
        return decouple::cli::run_verify_random(suite, opts);
      }
      return decouple::cli::run_verify_file(model_path, opts, export_space,
                                            export_projection);
    }
    if (stopped->parsed()) return decouple::cli::run_stopped(spec_path, opts);
    if (bounds->parsed()) {
      const bool have_chebyshev = *opt_var || *opt_t;
      const bool have_pz = *opt_mean || *opt_m2 || *opt_theta;
      if (have_chebyshev && (!*opt_var || !*opt_t))
        throw decouple::ValidationError(
            "bounds: --var-decoupled and --t go together");
      if (have_pz && (!*opt_mean || !*opt_m2 || !*opt_theta))
        throw decouple::ValidationError(
            "bounds: --mean, --m2-decoupled and --theta go together");
      return decouple::cli::run_bounds(have_chebyshev, var_decoupled, t, have_pz,
                                       mean, m2_decoupled, theta, opts);
    }
  } catch (const decouple::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitResourceError;
  } catch (const decouple::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitCheckFailed;
}
