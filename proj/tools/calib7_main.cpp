// Batch front end: run verifications, construct families, compute invariants,
// emit reports and plots.
//
// Exit codes: 0 pass, 1 check fail, 2 input error, 3 precondition fail.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calib7/families.hpp"
#include "calib7/forms7.hpp"
#include "calib7/invariants.hpp"
#include "calib7/lift_io.hpp"
#include "calib7/s6frames.hpp"

using namespace calib7;
using nlohmann::json;

namespace {

struct Options {
  std::string family;
  std::string input;
  double k = 1.0;
  std::vector<int> grid;
  std::string t_range = "0.05:6.0";
  std::uint64_t seed = 1;
  double tol = 0.0;  // 0: per-check defaults
  double fd_step = 1e-5;
  std::string out;
  std::string format = "json";
};

std::pair<double, double> parse_range(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("range must be A:B");
  return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / std::max(1, n - 1);
  return v;
}

std::vector<double> admissible_t_grid(double a, double b, int n) {
  const double asym = std::sqrt(5.0) / 2.0;
  std::vector<double> v;
  for (double t : linspace(a, b, n + 2))
    if (std::abs(t) > 1e-3 && std::abs(std::abs(t) - asym) > 5e-3) v.push_back(t);
  while (static_cast<int>(v.size()) > n) v.pop_back();
  return v;
}

void emit(const json& j, const Options& opt) {
  if (opt.out.empty()) {
    std::cout << j.dump(2) << std::endl;
  } else {
    std::ofstream f(opt.out);
    f << j.dump(2) << "\n";
  }
}

json run_config_json(const Options& opt) {
  return {{"family", opt.family}, {"input", opt.input},   {"k", opt.k},
          {"seed", opt.seed},     {"tol", opt.tol},       {"fd_step", opt.fd_step},
          {"grid", opt.grid},     {"t_range", opt.t_range}};
}

std::array<int, 2> grid2(const Options& opt, int def0, int def1) {
  std::array<int, 2> g = {def0, def1};
  if (opt.grid.size() >= 1) g[0] = opt.grid[0];
  if (opt.grid.size() >= 2) g[1] = opt.grid[1];
  if (g[0] < 4 || g[1] < 4) throw std::invalid_argument("grids need at least 4 nodes per dimension");
  return g;
}

int cmd_verify(const Options& opt) {
  json out;
  out["command"] = "verify";
  out["config"] = run_config_json(opt);
  out["version"] = library_version();
  bool pass = true;
  auto add = [&](const Report& r) {
    out["checks"].push_back(r.to_json());
    pass = pass && r.pass;
  };

  if (!opt.input.empty()) {
    CurveLift lift = load_lift(opt.input);
    if (lift.dim != 2) throw std::invalid_argument("verify needs a 2d (surface) lift");
    add(cr_residual(lift));
    add(ruling_ideal_residual(lift));
    Fourfold cone = gamma_construction(lift, linspace(0.4, 1.6, 5));
    CoassocOptions co;
    co.mode = lift.has_analytic_mc() ? DerivativeMode::analytic : DerivativeMode::analytic;
    add(coassociativity_residual(cone, co));
  } else if (opt.family == "hl" || opt.family == "bundle") {
    auto bshape = grid2(opt, 12, 12);
    std::array<double, 2> bstep = {0.45, 0.22};
    std::array<double, 2> borigin = {0.1, 0.3};
    if (opt.k > 0) {
      auto [t0, t1] = parse_range(opt.t_range);
      Fourfold m = hl_family(opt.k, bshape, bstep, borigin, admissible_t_grid(t0, t1, 12),
                             linspace(0.0, 5.5, 8));
      CoassocOptions co;
      add(coassociativity_residual(m, co));
      co.mode = DerivativeMode::finite_difference;
      co.fd_step = opt.fd_step;
      Report fd = coassociativity_residual(m, co);
      fd.check = "coassociativity_residual_fd";
      add(fd);
      Report impl;
      impl.check = "implicit_equation";
      double worst = 0.0;
      for (const auto& s : m.samples)
        worst = std::max(worst, std::abs(hl_implicit_residual(s.x, opt.k)));
      impl.set("max", worst);
      impl.tolerance = opt.tol > 0 ? opt.tol : 1e-8;
      impl.pass = worst < impl.tolerance;
      add(impl);
    } else {
      CurveLift base = round_s2_frame_field(bshape, bstep, borigin);
      Fourfold cone = surface_bundle_cone(base, linspace(0.3, 2.0, 6), linspace(0.0, 5.5, 8));
      add(coassociativity_residual(cone));
      Report wrel;
      wrel.check = "cone_w_relation";
      double worst = 0.0;
      const double slope = std::sqrt(5.0) / 2.0;
      for (const auto& s : cone.samples) {
        double w = s.x.tail<3>().norm();
        double z = s.x.head<4>().norm();
        worst = std::max(worst, std::abs(w - slope * z));
      }
      wrel.set("max", worst);
      wrel.tolerance = 1e-10;
      wrel.pass = worst < wrel.tolerance;
      add(wrel);
      add(ruling_ideal_residual(lift_relabel_n2(base)));
    }
  } else if (opt.family == "fiber") {
    auto shape = grid2(opt, 10, 10);
    CurveLift lift = fiber_curve(Vec7::Unit(4), degree_one_family(), shape, {0.08, 0.08});
    add(cr_residual(lift));
    add(ruling_ideal_residual(lift));
    add(coassociativity_residual(gamma_construction(lift, linspace(0.4, 1.6, 5))));
  } else if (opt.family == "t-plane") {
    auto shape = grid2(opt, 9, 9);
    CurveLift lift = t_plane_lift(shape, {0.11, 0.13});
    add(cr_residual(lift));
    add(coassociativity_residual(gamma_construction(lift, linspace(0.4, 1.6, 5))));
  } else {
    throw std::invalid_argument("unknown family '" + opt.family +
                                "' (expected hl, bundle, fiber or t-plane)");
  }
  out["pass"] = pass;
  emit(out, opt);
  return pass ? 0 : 1;
}

int cmd_invariants(const Options& opt) {
  json out;
  out["command"] = "invariants";
  out["config"] = run_config_json(opt);
  out["version"] = library_version();

  CurveLift lift = [&] {
    if (!opt.input.empty()) return load_lift(opt.input);
    if (opt.family == "fiber")
      return fiber_curve(Vec7::Unit(4), degree_one_family(), grid2(opt, 10, 10), {0.08, 0.08});
    if (opt.family == "binormal" || opt.family == "hl" || opt.family == "bundle")
      return round_s2_frame_field(grid2(opt, 10, 10), {0.45, 0.22});
    throw std::invalid_argument("invariants needs --input or --family fiber|binormal");
  }();

  Report cr = cr_residual(lift);
  out["checks"].push_back(cr.to_json());
  if (!cr.pass) {
    out["error"] = "input does not pass cr_residual (not a CR-holomorphic lift)";
    emit(out, opt);
    return 3;
  }
  ABData ab;
  try {
    ab = extract_AB(lift);
  } catch (const std::exception& e) {
    out["error"] = e.what();
    emit(out, opt);
    return 3;
  }
  double tau = opt.tol > 0 ? opt.tol : 1e-6;
  CRInvariants inv = invariants_of(ab, tau);
  out["invariants"] = inv.to_json();
  out["pass"] = true;
  emit(out, opt);
  return 0;
}

int cmd_profile(const Options& opt) {
  int per_branch = opt.grid.empty() ? 500 : opt.grid[0];
  auto [t0, t1] = parse_range(opt.t_range);
  ProfileCurve c = sample_profile(opt.k, per_branch, std::max(0.02, t0), std::max(1.5, t1));
  std::string base = opt.out.empty() ? "profile" : opt.out;
  if (opt.format == "csv" || opt.format == "json") {
    profile_to_csv(c, base + (base.ends_with(".csv") ? "" : ".csv"));
  }
  if (opt.format == "svg") {
    profile_to_svg(c, base + (base.ends_with(".svg") ? "" : ".svg"));
  }
  json out;
  out["command"] = "profile";
  out["config"] = run_config_json(opt);
  out["samples"] = c.t.size();
  double worst = 0.0;
  for (size_t n = 0; n < c.t.size(); ++n)
    worst = std::max(worst,
                     std::abs(profile_implicit_residual(c.points[n].z, c.points[n].w, c.k)));
  out["implicit_residual_max"] = worst;
  out["degenerate"] = opt.k == 0.0;
  std::cout << out.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verifiers and explicit families for coassociative geometry in R^7"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--family", opt.family, "built-in family: hl, bundle, fiber, t-plane");
    sub->add_option("--input", opt.input, "lift JSON path");
    sub->add_option("--k", opt.k, "family parameter k");
    sub->add_option("--grid", opt.grid, "grid size N or N,M")->delimiter(',');
    sub->add_option("--t-range", opt.t_range, "profile parameter range A:B");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--tol", opt.tol, "override tolerance");
    sub->add_option("--fd-step", opt.fd_step, "finite-difference step");
    sub->add_option("--out", opt.out, "output path");
    sub->add_option("--format", opt.format, "json, csv or svg");
  };

  auto* verify = app.add_subcommand("verify", "run residual verifications");
  add_common(verify);
  auto* invariants = app.add_subcommand("invariants", "per-node invariants and classification");
  add_common(invariants);
  auto* profile = app.add_subcommand("profile", "emit the profile curve");
  add_common(profile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(opt);
    if (invariants->parsed()) return cmd_invariants(opt);
    if (profile->parsed()) return cmd_profile(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << std::endl;
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "precondition failed: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 2;
}
