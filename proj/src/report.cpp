#include "decouple/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "decouple/errors.hpp"

namespace decouple {

namespace {

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_canonical(std::string& out, const nlohmann::json& v) {
  using value_t = nlohmann::json::value_t;
  switch (v.type()) {
    case value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(it.key()).dump();
        out += ':';
        write_canonical(out, it.value());
      }
      out += '}';
      break;
    }
    case value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        write_canonical(out, v[i]);
      }
      out += ']';
      break;
    }
    case value_t::string:
      out += v.dump();
      break;
    case value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case value_t::number_float:
      out += fmt_double(v.get<double>());
      break;
    default:
      out += "null";
      break;
  }
}

nlohmann::json opt_num(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json moments_json(const MomentSummary& m) {
  const bool est = m.kind == MomentSummary::Kind::estimated;
  nlohmann::json j;
  j["kind"] = est ? "estimated" : "exact";
  j["mean"] = m.mean;
  j["second_moment"] = m.second_moment;
  j["variance"] = m.variance;
  j["std_error"] = est ? nlohmann::json(m.std_error) : nlohmann::json(nullptr);
  j["second_moment_std_error"] =
      est ? nlohmann::json(m.second_moment_std_error) : nlohmann::json(nullptr);
  j["n_samples"] = est ? nlohmann::json(m.n_samples) : nlohmann::json(nullptr);
  j["seed"] = est ? nlohmann::json(m.seed) : nlohmann::json(nullptr);
  return j;
}

MomentSummary moments_from_json(const nlohmann::json& j) {
  MomentSummary m;
  m.kind = j.at("kind").get<std::string>() == "estimated"
               ? MomentSummary::Kind::estimated
               : MomentSummary::Kind::exact;
  m.mean = j.at("mean").get<double>();
  m.second_moment = j.at("second_moment").get<double>();
  m.variance = j.at("variance").get<double>();
  if (m.kind == MomentSummary::Kind::estimated) {
    m.std_error = j.at("std_error").get<double>();
    m.second_moment_std_error = j.at("second_moment_std_error").get<double>();
    m.n_samples = j.at("n_samples").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
  }
  return m;
}

nlohmann::json report_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["experiment_id"] = r.experiment_id;
  j["config"] = r.config;
  j["timestamp"] = r.timestamp;
  j["seed"] = r.seed;

  nlohmann::json bounds = nlohmann::json::array();
  for (const BoundReport& b : r.bounds) {
    nlohmann::json e;
    e["inequality_id"] = b.inequality_id;
    e["detail"] = b.detail;
    e["lhs"] = opt_num(b.lhs);
    e["rhs"] = b.rhs;
    e["slack"] = opt_num(b.slack);
    e["holds"] = b.holds ? nlohmann::json(*b.holds) : nlohmann::json(nullptr);
    e["tol"] = b.tol;
    bounds.push_back(std::move(e));
  }
  j["bounds"] = std::move(bounds);

  nlohmann::json residuals = nlohmann::json::array();
  for (const ResidualEntry& e : r.residuals)
    residuals.push_back({{"name", e.name}, {"value", e.value}, {"tol", e.tol},
                         {"ok", e.ok}});
  j["residuals"] = std::move(residuals);

  nlohmann::json metrics = nlohmann::json::array();
  for (const MetricEntry& e : r.metrics)
    metrics.push_back({{"name", e.name}, {"value", e.value}});
  j["metrics"] = std::move(metrics);

  nlohmann::json moments = nlohmann::json::array();
  for (const MomentRow& row : r.moments) {
    nlohmann::json e = moments_json(row.moments);
    e["name"] = row.name;
    moments.push_back(std::move(e));
  }
  j["moments"] = std::move(moments);
  return j;
}

const char* kCsvHeader =
    "record,name,detail,lhs,rhs,slack,holds,tol,value,ok,mean,second_moment,"
    "variance,std_error,kind\n";

std::string csv_cell(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

std::string render_csv(const ExperimentReport& r) {
  std::string out = kCsvHeader;
  auto flag = [](bool b) { return b ? std::string("true") : std::string("false"); };
  for (const BoundReport& b : r.bounds) {
    out += "bound," + b.inequality_id + "," + b.detail + "," + csv_cell(b.lhs) + "," +
           fmt_double(b.rhs) + "," + csv_cell(b.slack) + "," +
           (b.holds ? flag(*b.holds) : std::string()) + "," + fmt_double(b.tol) +
           ",,,,,,,\n";
  }
  for (const ResidualEntry& e : r.residuals)
    out += "residual," + e.name + ",,,,,," + fmt_double(e.tol) + "," +
           fmt_double(e.value) + "," + flag(e.ok) + ",,,,,\n";
  for (const MetricEntry& e : r.metrics)
    out += "metric," + e.name + ",,,,,,," + fmt_double(e.value) + ",,,,,,\n";
  for (const MomentRow& row : r.moments) {
    const MomentSummary& m = row.moments;
    const bool est = m.kind == MomentSummary::Kind::estimated;
    out += "moment," + row.name + ",,,,,,,,," + fmt_double(m.mean) + "," +
           fmt_double(m.second_moment) + "," + fmt_double(m.variance) + "," +
           (est ? fmt_double(m.std_error) : std::string()) + "," +
           (est ? "estimated" : "exact") + "\n";
  }
  return out;
}

void table_line(std::string& out, const std::string& text) {
  out += text;
  out += '\n';
}

std::string render_table(const ExperimentReport& r) {
  std::string out;
  char buf[256];
  table_line(out, "experiment: " + r.experiment_id);
  table_line(out, "timestamp:  " + r.timestamp);
  if (!r.bounds.empty()) {
    table_line(out, "");
    std::snprintf(buf, sizeof buf, "  %-22s %-10s %14s %14s %14s %-6s",
                  "inequality", "detail", "lhs", "rhs", "slack", "holds");
    table_line(out, buf);
    for (const BoundReport& b : r.bounds) {
      std::snprintf(buf, sizeof buf, "  %-22s %-10s %14s %14.6g %14s %-6s",
                    b.inequality_id.c_str(), b.detail.c_str(),
                    b.lhs ? fmt_double(*b.lhs).c_str() : "-", b.rhs,
                    b.slack ? fmt_double(*b.slack).c_str() : "-",
                    b.holds ? (*b.holds ? "yes" : "NO") : "-");
      table_line(out, buf);
    }
  }
  if (!r.residuals.empty()) {
    table_line(out, "");
    std::snprintf(buf, sizeof buf, "  %-34s %14s %10s %-4s", "residual", "value",
                  "tol", "ok");
    table_line(out, buf);
    for (const ResidualEntry& e : r.residuals) {
      std::snprintf(buf, sizeof buf, "  %-34s %14.6g %10.2g %-4s", e.name.c_str(),
                    e.value, e.tol, e.ok ? "yes" : "NO");
      table_line(out, buf);
    }
  }
  if (!r.moments.empty()) {
    table_line(out, "");
    std::snprintf(buf, sizeof buf, "  %-10s %14s %14s %14s %-10s", "sum", "mean",
                  "second_moment", "variance", "kind");
    table_line(out, buf);
    for (const MomentRow& row : r.moments) {
      std::snprintf(buf, sizeof buf, "  %-10s %14.6g %14.6g %14.6g %-10s",
                    row.name.c_str(), row.moments.mean, row.moments.second_moment,
                    row.moments.variance,
                    row.moments.kind == MomentSummary::Kind::estimated ? "estimated"
                                                                       : "exact");
      table_line(out, buf);
    }
  }
  if (!r.metrics.empty()) {
    table_line(out, "");
    for (const MetricEntry& e : r.metrics) {
      std::snprintf(buf, sizeof buf, "  %-34s %.12g", e.name.c_str(), e.value);
      table_line(out, buf);
    }
  }
  return out;
}

}  // namespace

bool ExperimentReport::all_ok() const {
  for (const BoundReport& b : bounds)
    if (b.holds && !*b.holds) return false;
  for (const ResidualEntry& e : residuals)
    if (!e.ok) return false;
  return true;
}

Format parse_format(const std::string& name) {
  if (name == "json") return Format::json;
  if (name == "csv") return Format::csv;
  if (name == "table" || name == "text_table") return Format::text_table;
  throw ValidationError("unknown output format: " + name);
}

std::string canonical_json(const nlohmann::json& value) {
  std::string out;
  write_canonical(out, value);
  return out;
}

std::string render(const ExperimentReport& report, Format format) {
  switch (format) {
    case Format::json:
      return canonical_json(report_json(report)) + "\n";
    case Format::csv:
      return render_csv(report);
    case Format::text_table:
      return render_table(report);
  }
  throw ValidationError("unknown output format");
}

ExperimentReport parse_report_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentReport r;
  r.experiment_id = j.at("experiment_id").get<std::string>();
  r.config = j.at("config");
  r.timestamp = j.at("timestamp").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& e : j.at("bounds")) {
    BoundReport b;
    b.inequality_id = e.at("inequality_id").get<std::string>();
    b.detail = e.at("detail").get<std::string>();
    if (!e.at("lhs").is_null()) b.lhs = e.at("lhs").get<double>();
    b.rhs = e.at("rhs").get<double>();
    if (!e.at("slack").is_null()) b.slack = e.at("slack").get<double>();
    if (!e.at("holds").is_null()) b.holds = e.at("holds").get<bool>();
    b.tol = e.at("tol").get<double>();
    r.bounds.push_back(std::move(b));
  }
  for (const auto& e : j.at("residuals"))
    r.residuals.push_back({e.at("name").get<std::string>(),
                           e.at("value").get<double>(), e.at("tol").get<double>(),
                           e.at("ok").get<bool>()});
  for (const auto& e : j.at("metrics"))
    r.metrics.push_back(
        {e.at("name").get<std::string>(), e.at("value").get<double>()});
  for (const auto& e : j.at("moments"))
    r.moments.push_back({e.at("name").get<std::string>(), moments_from_json(e)});
  return r;
}

bool reports_equal(const ExperimentReport& a, const ExperimentReport& b) {
  return render(a, Format::json) == render(b, Format::json);
}

}  // namespace decouple
