#include "decouple/montecarlo.hpp"

#include <cmath>
#include <cstdlib>

namespace decouple {

namespace detail {

bool force_sequential() {
  static const bool force = [] {
    const char* v = std::getenv("DECOUPLE_SEQUENTIAL");
    return v != nullptr && v[0] == '1';
  }();
  return force;
}

}  // namespace detail

namespace {

double field_z(double estimate, double exact, double se) {
  if (se > 0.0) return (estimate - exact) / se;
  if (std::fabs(estimate - exact) > kDefaultTol)
    throw ValidationError(
        "zscore: zero standard error with a nonzero discrepancy (inconsistent "
        "estimate)");
  return 0.0;
}

}  // namespace

ZScores zscores(const MomentSummary& estimate, const MomentSummary& exact) {
  if (estimate.kind != MomentSummary::Kind::estimated)
    throw ValidationError("zscore: first argument must be an estimate");
  if (exact.kind != MomentSummary::Kind::exact)
    throw ValidationError("zscore: second argument must be exact");
  ZScores z;
  z.mean = field_z(estimate.mean, exact.mean, estimate.std_error);
  z.second_moment = field_z(estimate.second_moment, exact.second_moment,
                            estimate.second_moment_std_error);
  return z;
}

double zscore(const MomentSummary& estimate, const MomentSummary& exact) {
  const ZScores z = zscores(estimate, exact);
  return std::max(std::fabs(z.mean), std::fabs(z.second_moment));
}

}  // namespace decouple
