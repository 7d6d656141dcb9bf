#include "calib7/lift_io.hpp"

#include <fstream>
#include <stdexcept>

namespace calib7 {

nlohmann::json lift_to_json(const CurveLift& lift) {
  lift.validate(1e-8);
  nlohmann::json j;
  if (lift.dim == 1) {
    auto params = nlohmann::json::array();
    for (int i = 0; i < lift.shape[0]; ++i) params.push_back(lift.origin[0] + i * lift.step[0]);
    j["params"] = params;
    j["step"] = lift.step[0];
  } else {
    j["grid"] = {lift.shape[0], lift.shape[1]};
    j["step"] = {lift.step[0], lift.step[1]};
    j["origin"] = {lift.origin[0], lift.origin[1]};
  }
  j["fd_order"] = lift.fd_order;
  auto frames = nlohmann::json::array();
  for (const auto& m : lift.frames) {
    auto entries = nlohmann::json::array();
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) entries.push_back(m(r, c));
    frames.push_back(entries);
  }
  j["frames"] = frames;
  if (!lift.excluded.empty()) {
    auto ex = nlohmann::json::array();
    for (size_t n = 0; n < lift.excluded.size(); ++n)
      if (lift.excluded[n]) ex.push_back(n);
    if (!ex.empty()) j["excluded"] = ex;
  }
  return j;
}

CurveLift lift_from_json(const nlohmann::json& j) {
  CurveLift lift;
  if (j.contains("grid")) {
    lift.dim = 2;
    lift.shape = {j["grid"][0].get<int>(), j["grid"][1].get<int>()};
    if (j["step"].is_array())
      lift.step = {j["step"][0].get<double>(), j["step"][1].get<double>()};
    else
      lift.step = {j["step"].get<double>(), j["step"].get<double>()};
    if (j.contains("origin"))
      lift.origin = {j["origin"][0].get<double>(), j["origin"][1].get<double>()};
  } else if (j.contains("params")) {
    lift.dim = 1;
    auto params = j["params"];
    lift.shape = {static_cast<int>(params.size()), 1};
    if (j.contains("step")) {
      lift.step[0] = j["step"].is_array() ? j["step"][0].get<double>() : j["step"].get<double>();
    } else if (params.size() >= 2) {
      lift.step[0] = params[1].get<double>() - params[0].get<double>();
    }
    lift.step[1] = 1.0;
    if (!params.empty()) lift.origin[0] = params[0].get<double>();
  } else {
    throw std::invalid_argument("lift json needs either a \"grid\" or a \"params\" field");
  }
  lift.fd_order = j.value("fd_order", 2);
  if (!j.contains("frames")) throw std::invalid_argument("lift json is missing \"frames\"");
  for (const auto& entries : j["frames"]) {
    if (entries.size() != 49)
      throw std::invalid_argument("each frame must have 49 row-major entries");
    Mat7 m;
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) m(r, c) = entries[r * 7 + c].get<double>();
    lift.frames.push_back(m);
  }
  if (j.contains("excluded")) {
    lift.excluded.assign(lift.frames.size(), 0);
    for (const auto& n : j["excluded"]) lift.excluded.at(n.get<size_t>()) = 1;
  }
  lift.validate(1e-8);
  return lift;
}

void save_lift(const CurveLift& lift, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << lift_to_json(lift).dump(2) << "\n";
}

CurveLift load_lift(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return lift_from_json(j);
}

}  // namespace calib7
