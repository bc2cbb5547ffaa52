#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "decouple/bounds.hpp"
#include "decouple/moments.hpp"

namespace decouple {

// A named check value compared against a tolerance.
struct ResidualEntry {
  std::string name;
  double value = 0.0;
  double tol = kDefaultTol;
  bool ok = false;
};

// Informational value with no pass/fail semantics.
struct MetricEntry {
  std::string name;
  double value = 0.0;
};

struct MomentRow {
  std::string name;  // e.g. "d_sum", "z_sum", "e_sum"
  MomentSummary moments;
};

// One experiment's assembled results. Serialization is canonical: sorted
// keys, floats at 12 significant digits, so equal reports render to
// byte-identical JSON. The timestamp defaults to the fixed epoch string for
// reproducible output; callers opt in to wall-clock stamps.
struct ExperimentReport {
  std::string experiment_id;
  nlohmann::json config = nlohmann::json::object();  // echo of the input
  std::vector<BoundReport> bounds;
  std::vector<ResidualEntry> residuals;
  std::vector<MetricEntry> metrics;
  std::vector<MomentRow> moments;
  std::string timestamp = "1970-01-01T00:00:00Z";
  std::uint64_t seed = 0;

  bool all_ok() const;
};

enum class Format { json, csv, text_table };

Format parse_format(const std::string& name);

// Canonical JSON for any value: object keys sorted, floats rendered with
// %.12g, non-finite numbers as null.
std::string canonical_json(const nlohmann::json& value);

std::string render(const ExperimentReport& report, Format format);
ExperimentReport parse_report_json(const std::string& text);

// Round-trip equality at serialization precision.
bool reports_equal(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace decouple
