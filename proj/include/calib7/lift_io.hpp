#ifndef CALIB7_LIFT_IO_HPP
#define CALIB7_LIFT_IO_HPP

#include <string>

#include <json.hpp>

#include "calib7/g2core.hpp"

namespace calib7 {

/// JSON schema for lifts:
///   curve:   {"params": [t0, t1, ...], "step": h, "frames": [...], "fd_order": 2}
///   surface: {"grid": [nx, ny], "step": [h1, h2], "frames": [...], "fd_order": 2}
/// Each frame is the 49-entry row-major matrix whose columns are e_1..e_7.
/// Optional fields: "origin" and "excluded" (list of node indices).
/// Writers validate every frame against the G2 frame invariants at 1e-8.
nlohmann::json lift_to_json(const CurveLift& lift);
CurveLift lift_from_json(const nlohmann::json& j);

void save_lift(const CurveLift& lift, const std::string& path);
CurveLift load_lift(const std::string& path);

}  // namespace calib7

#endif
