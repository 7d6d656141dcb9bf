#ifndef CALIB7_REPORT_HPP
#define CALIB7_REPORT_HPP

#include <string>

#include <json.hpp>

namespace calib7 {

/// Structured verification result: residual statistics, pass/fail against a
/// tolerance, and provenance of the inputs (seed, grid, step, ...).
struct Report {
  std::string check;
  bool pass = true;
  double tolerance = 0.0;
  nlohmann::json stats = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();

  nlohmann::json to_json() const;
  void set(const std::string& key, double value) { stats[key] = value; }
  double get(const std::string& key) const { return stats.at(key).get<double>(); }
};

/// Running max/mean/rms aggregator for per-node residuals.
struct ResidualStats {
  double max = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;
  long count = 0;
  long excluded = 0;

  void add(double r);
  void to_json(nlohmann::json& j, const std::string& prefix) const;
};

std::string library_version();

}  // namespace calib7

#endif
