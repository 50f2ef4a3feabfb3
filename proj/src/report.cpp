#include "dtnlab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "dtnlab/errors.hpp"

namespace dtnlab::report {

using nlohmann::json;

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

void ExperimentReport::check(const std::string& name, bool ok, double value, double threshold,
                             const std::string& relation) {
  checks.push_back({name, ok, value, threshold, relation});
}

void ExperimentReport::add_row(std::initializer_list<double> values) {
  if (values.size() != row_header.size())
    throw Error("report row width does not match header");
  rows.emplace_back(values);
}

namespace {

// Shortest round-trip representation keeps the files diffable while staying
// bit-faithful on reread.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string write_report(const ExperimentReport& rep, const std::string& dir,
                         const std::string& format) {
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());

  const std::string rows_name = rep.experiment + ".rows." + format;
  const std::filesystem::path rows_path = std::filesystem::path(dir) / rows_name;
  std::ofstream rows(rows_path);
  if (!rows) throw Error("cannot write " + rows_path.string());
  if (format == "csv") {
    for (std::size_t i = 0; i < rep.row_header.size(); ++i)
      rows << (i ? "," : "") << rep.row_header[i];
    rows << '\n';
    for (const auto& r : rep.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) rows << (i ? "," : "") << num(r[i]);
      rows << '\n';
    }
  } else {
    json jr;
    jr["header"] = rep.row_header;
    jr["rows"] = rep.rows;
    rows << jr.dump(1) << '\n';
  }

  json js;
  js["experiment"] = rep.experiment;
  js["config_hash"] = rep.config_hash;
  js["seed"] = rep.seed;
  js["grid"] = rep.grid;
  js["elapsed_ms"] = rep.elapsed_ms;
  js["passed"] = rep.passed();
  js["rows_file"] = rows_name;
  js["metrics"] = rep.metrics;
  js["checks"] = json::array();
  for (const auto& c : rep.checks)
    js["checks"].push_back({{"name", c.name},
                            {"passed", c.passed},
                            {"value", c.value},
                            {"threshold", c.threshold},
                            {"relation", c.relation}});

  const std::filesystem::path sum_path =
      std::filesystem::path(dir) / (rep.experiment + ".summary.json");
  std::ofstream sum(sum_path);
  if (!sum) throw Error("cannot write " + sum_path.string());
  sum << js.dump(1) << '\n';
  return sum_path.string();
}

}  // namespace dtnlab::report
