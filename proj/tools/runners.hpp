#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "decouple/report.hpp"

namespace decouple::cli {

struct GlobalOpts {
  double tol = kDefaultTol;
  std::size_t cap = kDefaultCap;
  std::string out;  // empty = stdout
  std::string format = "json";
  std::uint64_t seed = 0;
  std::uint64_t mc_samples = 0;  // 0 = no Monte Carlo cross-check
  int streams = 1;
  std::string timestamp;  // empty = fixed epoch default
};

struct RandomSuite {
  int count = 0;
  int n = 4;
  int branching = 3;
  double value_lo = -2.0;
  double value_hi = 2.0;
  bool nonnegative = false;
  std::uint64_t seed = 0;
};

// Each runner writes a rendered ExperimentReport to opts.out (or stdout) and
// returns 0 on success, 1 when an inequality or residual check failed.
// Input/resource problems are thrown (ValidationError/ResourceError).
int run_gallery(const std::string& name, const nlohmann::json& params,
                const GlobalOpts& opts);
int run_verify_file(const std::string& model_path, const GlobalOpts& opts,
                    const std::string& export_space_csv,
                    const std::string& export_projection_csv);
int run_verify_random(const RandomSuite& suite, const GlobalOpts& opts);
int run_stopped(const std::string& spec_path, const GlobalOpts& opts);
int run_bounds(bool have_chebyshev, double var_decoupled, double t,
               bool have_pz, double mean, double m2_decoupled, double theta,
               const GlobalOpts& opts);

}  // namespace decouple::cli
