#include "calib7/report.hpp"

#include <cmath>

namespace calib7 {

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["pass"] = pass;
  j["tolerance"] = tolerance;
  j["stats"] = stats;
  j["provenance"] = provenance;
  j["version"] = library_version();
  return j;
}

void ResidualStats::add(double r) {
  max = std::max(max, r);
  sum += r;
  sumsq += r * r;
  ++count;
}

void ResidualStats::to_json(nlohmann::json& j, const std::string& prefix) const {
  j[prefix + "_max"] = max;
  j[prefix + "_mean"] = count > 0 ? sum / count : 0.0;
  j[prefix + "_rms"] = count > 0 ? std::sqrt(sumsq / count) : 0.0;
  j[prefix + "_count"] = count;
  if (excluded > 0) j[prefix + "_excluded"] = excluded;
}

std::string library_version() { return "calib7 0.1.0"; }

}  // namespace calib7
