#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace dtnlab::report {

// One gated comparison. `relation` is the comparison the flag encodes, e.g.
// "<=", ">=", "in [a,b]", "monotone"; value and threshold are the numbers
// behind it so a reader can re-derive `passed` from the row alone.
struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;
};

struct ExperimentReport {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string grid;  // human-readable grid stamp, e.g. "2d 17x17"
  double elapsed_ms = 0.0;
  std::vector<Check> checks;
  std::vector<std::string> row_header;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> metrics;  // scalar summary values

  bool passed() const;
  void check(const std::string& name, bool ok, double value, double threshold,
             const std::string& relation);
  void add_row(std::initializer_list<double> values);
};

// Writes <experiment>.summary.json plus <experiment>.rows.csv or .rows.json
// under `dir` (created if missing), returning the summary path. The rows file
// has a header row; CSV is comma separated with '.' decimals.
std::string write_report(const ExperimentReport& rep, const std::string& dir,
                         const std::string& format);

}  // namespace dtnlab::report
