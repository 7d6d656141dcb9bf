#include "calib7/families.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include "calib7/s6frames.hpp"

namespace calib7 {

namespace {

const double kAsymptote = std::sqrt(5.0) / 2.0;

double odd_root5(double x) { return std::copysign(std::pow(std::abs(x), 0.2), x); }

Mat7 block_generator(std::initializer_list<std::array<double, 3>> entries) {
  // entries are {i, j, value} acting on the T block; V+ block from the
  // g2 relations m67 = m12 + m34, m75 = m13 + m42, m56 = m14 + m23.
  Mat4 theta = Mat4::Zero();
  for (const auto& e : entries) {
    int i = static_cast<int>(e[0]) - 1, j = static_cast<int>(e[1]) - 1;
    theta(i, j) += e[2];
    theta(j, i) -= e[2];
  }
  return embed(theta, Mat34::Zero()).matrix7;
}

}  // namespace

ProfilePoint profile_point(double t, double k) {
  if (!(k > 0)) throw std::invalid_argument("profile_point requires k > 0");
  if (std::abs(t) < 1e-8)
    throw std::domain_error("profile parameter at the t = 0 asymptote (w = 0 axis)");
  if (std::abs(std::abs(t) - kAsymptote) < 1e-8)
    throw std::domain_error("profile parameter at the |t| = sqrt(5)/2 asymptote");
  double q = odd_root5(t);                   // t^{1/5}
  double b = odd_root5(t * t - 1.25);        // (t^2 - 5/4)^{1/5}
  double f = 1.0 / (b * b);                  // (t^2 - 5/4)^{-2/5} > 0
  return {k * f / q, k * f * q * q * q * q};
}

double profile_implicit_residual(double z, double w, double k) {
  double d = w * w - 1.25 * z * z;
  return w * d * d - std::pow(k, 5);
}

int profile_branch(double t) { return std::abs(t) > kAsymptote ? 1 : -1; }

ProfileCurve sample_profile(double k, int per_branch, double t_min, double t_max) {
  ProfileCurve c;
  c.k = k;
  if (k == 0.0) return c;  // degenerate: asymptotes only
  // outer branch: t in (sqrt5/2, t_max], geometric spacing toward the asymptote
  for (int n = 0; n < per_branch; ++n) {
    double s = static_cast<double>(n) / (per_branch - 1);
    double t = kAsymptote + 1e-3 + (t_max - kAsymptote - 1e-3) * s * s * s;
    c.t.push_back(t);
    c.points.push_back(profile_point(t, k));
    c.branch.push_back(1);
  }
  // inner branch: t in [t_min, sqrt5/2)
  for (int n = 0; n < per_branch; ++n) {
    double s = static_cast<double>(n) / (per_branch - 1);
    double t = t_min + (kAsymptote - 1e-3 - t_min) * s;
    c.t.push_back(t);
    c.points.push_back(profile_point(t, k));
    c.branch.push_back(-1);
  }
  return c;
}

void profile_to_csv(const ProfileCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t,z,w,branch,implicit_residual\n";
  char buf[256];
  for (size_t n = 0; n < c.t.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%.17g\n", c.t[n], c.points[n].z,
                  c.points[n].w, c.branch[n],
                  profile_implicit_residual(c.points[n].z, c.points[n].w, c.k));
    out << buf;
  }
}

void profile_to_svg(const ProfileCurve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const double span = 4.0, size = 480.0;
  auto px = [&](double z) { return 40.0 + z / span * (size - 80.0); };
  auto py = [&](double w) { return size / 2 - w / span * (size - 80.0) / 2.0; };
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\""
      << size << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  // asymptotes w = +-(sqrt5/2) z and w = 0
  for (double slope : {kAsymptote, -kAsymptote, 0.0}) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                  px(0), py(0), px(span), py(slope * span));
    out << buf;
  }
  for (int br : {1, -1}) {
    out << "<polyline fill=\"none\" stroke=\"" << (br > 0 ? "#1f77b4" : "#d62728")
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t n = 0; n < c.t.size(); ++n) {
      if (c.branch[n] != br) continue;
      if (c.points[n].z > span || std::abs(c.points[n].w) > span) continue;
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(c.points[n].z), py(c.points[n].w));
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

CurveLift exp_lift_2d(const Mat7& a, const Mat7& b, std::array<int, 2> shape,
                      std::array<double, 2> step, std::array<double, 2> origin,
                      const Mat7& base) {
  if (g2_relation_residual(a) > 1e-10 || g2_relation_residual(b) > 1e-10)
    throw std::invalid_argument("exp_lift_2d generators must lie in g2");
  CurveLift lift;
  lift.dim = 2;
  lift.shape = shape;
  lift.step = step;
  lift.origin = origin;
  lift.frames.reserve(static_cast<size_t>(shape[0]) * shape[1]);
  lift.mc.reserve(lift.frames.capacity());
  for (int i = 0; i < shape[0]; ++i) {
    double x = origin[0] + i * step[0];
    Mat7 ea = expm7(x * a);
    for (int j = 0; j < shape[1]; ++j) {
      double y = origin[1] + j * step[1];
      Mat7 eb = expm7(y * b);
      lift.frames.push_back(base * ea * eb);
      // left-invariant derivatives: omega_x = Ad(exp(-y b)) a, omega_y = b
      lift.mc.push_back({eb.transpose() * a * eb, b});
    }
  }
  return lift;
}

const Mat7& round_s2_generator_alpha() {
  static const Mat7 g = block_generator({{1, 2, 0.5}, {3, 4, 0.5}});
  return g;
}

const Mat7& round_s2_generator_beta() {
  static const Mat7 g = block_generator({{1, 4, 0.5}, {2, 3, 0.5}});
  return g;
}

const Mat7& fiber_angle_generator() {
  static const Mat7 g = block_generator({{3, 4, 1.0}});
  return g;
}

CurveLift round_s2_frame_field(std::array<int, 2> shape, std::array<double, 2> step,
                               std::array<double, 2> origin, double pole_floor) {
  CurveLift lift = exp_lift_2d(round_s2_generator_alpha(), round_s2_generator_beta(),
                               shape, step, origin);
  lift.excluded.assign(lift.frames.size(), 0);
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j) {
      double beta = origin[1] + j * step[1];
      if (std::abs(std::sin(beta)) < pole_floor) lift.excluded[lift.node(i, j)] = 1;
    }
  return lift;
}

CurveLift lift_relabel_n2(const CurveLift& lift) {
  static const Mat7 h0 = [] {
    Mat7 h = Mat7::Zero();
    h.col(0) = Vec7::Unit(2);   // e1' = e3
    h.col(1) = Vec7::Unit(3);   // e2' = e4
    h.col(2) = Vec7::Unit(0);
    h.col(3) = Vec7::Unit(1);
    h.col(4) = Vec7::Unit(4);
    h.col(5) = -Vec7::Unit(5);
    h.col(6) = -Vec7::Unit(6);
    return h;
  }();
  CurveLift out = lift;
  for (auto& g : out.frames) g = g * h0;
  for (auto& pair : out.mc)
    for (auto& m : pair) m = h0.transpose() * m * h0;
  return out;
}

namespace {

struct ProfileDeriv {
  double z, w, dz, dw;
};

ProfileDeriv profile_with_derivative(double t, double k) {
  ProfilePoint p = profile_point(t, k);
  // logarithmic derivatives of z = k t^{-1/5} (t^2-5/4)^{-2/5} and
  // w = k t^{4/5} (t^2-5/4)^{-2/5}
  double lb = t / (t * t - 1.25);  // d/dt log|t^2 - 5/4| / 2 * 2t ... = 2t/(2(t^2-5/4))
  double dz = p.z * (-0.2 / t - 0.8 * lb);
  double dw = p.w * (0.8 / t - 0.8 * lb);
  return {p.z, p.w, dz, dw};
}

void check_bundle_base(const CurveLift& base) {
  if (base.dim != 2) throw std::invalid_argument("surface_bundle base must be a 2d lift");
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < base.shape[0]; ++i)
    for (int j = 0; j < base.shape[1]; ++j) {
      if (!base.interior(i, j) && !base.has_analytic_mc()) continue;
      if (base.is_excluded(i, j)) continue;
      auto omega = maurer_cartan(base, i, j);
      for (int dir = 0; dir < 2; ++dir) {
        SU3Forms f = su3_forms(omega[dir]);
        scale = std::max(scale, f.theta.norm());
        worst = std::max({worst, std::abs(f.theta(1)), std::abs(f.theta(2)),
                          std::abs(f.kappa(2, 0))});
      }
    }
  if (worst > 1e-6 * std::max(1.0, scale))
    throw std::invalid_argument(
        "surface_bundle: base is not adapted (theta_2, theta_3, kappa_31 must vanish; "
        "f3 spans the second normal)");
}

}  // namespace

Fourfold surface_bundle(const CurveLift& base, double k, const std::vector<double>& t_grid,
                        const std::vector<double>& angle_grid) {
  if (!(k > 0))
    throw std::invalid_argument("surface_bundle requires k > 0; use surface_bundle_cone "
                                "and n2_plane_piece for the k = 0 pieces");
  check_bundle_base(base);
  Fourfold m;
  m.name = "surface_bundle";
  for (int i = 0; i < base.shape[0]; ++i) {
    for (int j = 0; j < base.shape[1]; ++j) {
      if (!base.interior(i, j) && !base.has_analytic_mc()) continue;
      if (base.is_excluded(i, j)) continue;
      const Mat7& g = base.frame(i, j);
      auto omega = maurer_cartan(base, i, j);
      for (double t : t_grid) {
        auto pd = profile_with_derivative(t, k);
        double flip = profile_branch(t) > 0 ? -1.0 : 1.0;
        for (double psi : angle_grid) {
          double cp = std::cos(psi), sp = std::sin(psi);
          Vec7 fiber = Vec7::Zero();
          fiber(4) = pd.w;
          fiber(2) = pd.z * cp;
          fiber(3) = -pd.z * sp;
          Vec7 dfiber_t = Vec7::Zero();
          dfiber_t(4) = pd.dw;
          dfiber_t(2) = pd.dz * cp;
          dfiber_t(3) = -pd.dz * sp;
          Vec7 dfiber_psi = Vec7::Zero();
          dfiber_psi(2) = -pd.z * sp;
          dfiber_psi(3) = -pd.z * cp;
          FourfoldSample s;
          s.param = {t, psi, base.origin[0] + base.step[0] * i,
                     base.origin[1] + base.step[1] * j};
          s.x = g * fiber;
          s.jacobian.col(0) = flip * (g * dfiber_t);
          s.jacobian.col(1) = g * dfiber_psi;
          s.jacobian.col(2) = g * (omega[0] * fiber);
          s.jacobian.col(3) = g * (omega[1] * fiber);
          s.analytic = base.has_analytic_mc();
          m.samples.push_back(s);
        }
      }
    }
  }
  return m;
}

Fourfold surface_bundle_cone(const CurveLift& base, const std::vector<double>& r_grid,
                             const std::vector<double>& angle_grid) {
  check_bundle_base(base);
  Fourfold m;
  m.name = "surface_bundle_cone";
  const double wdir = kAsymptote, norm = 1.5;  // |(sqrt5/2, 1)| = 3/2
  for (int i = 0; i < base.shape[0]; ++i) {
    for (int j = 0; j < base.shape[1]; ++j) {
      if (!base.interior(i, j) && !base.has_analytic_mc()) continue;
      if (base.is_excluded(i, j)) continue;
      const Mat7& g = base.frame(i, j);
      auto omega = maurer_cartan(base, i, j);
      for (double r : r_grid) {
        for (double psi : angle_grid) {
          double cp = std::cos(psi), sp = std::sin(psi);
          Vec7 dir = Vec7::Zero();
          dir(4) = wdir / norm;
          dir(2) = cp / norm;
          dir(3) = -sp / norm;
          Vec7 ddir_psi = Vec7::Zero();
          ddir_psi(2) = -sp / norm;
          ddir_psi(3) = -cp / norm;
          FourfoldSample s;
          s.param = {r, psi, base.origin[0] + base.step[0] * i,
                     base.origin[1] + base.step[1] * j};
          s.x = r * (g * dir);
          s.jacobian.col(0) = g * dir;
          s.jacobian.col(1) = r * (g * ddir_psi);
          s.jacobian.col(2) = r * (g * (omega[0] * dir));
          s.jacobian.col(3) = r * (g * (omega[1] * dir));
          s.analytic = base.has_analytic_mc();
          m.samples.push_back(s);
        }
      }
    }
  }
  return m;
}

Fourfold n2_plane_piece(const CurveLift& base, const std::vector<double>& r_grid) {
  Fourfold m = gamma_construction(lift_relabel_n2(base), r_grid);
  m.name = "n2_plane_piece";
  return m;
}

Fourfold hl_family(double k, std::array<int, 2> base_shape, std::array<double, 2> base_step,
                   std::array<double, 2> base_origin, const std::vector<double>& t_grid,
                   const std::vector<double>& angle_grid) {
  CurveLift base = round_s2_frame_field(base_shape, base_step, base_origin);
  Fourfold m = surface_bundle(base, k, t_grid, angle_grid);
  m.name = "harvey_lawson_bundle";
  // closed-form position with memoized exponentials per axis value
  auto cache_a = std::make_shared<std::map<double, Mat7>>();
  auto cache_b = std::make_shared<std::map<double, Mat7>>();
  m.position = [k, cache_a, cache_b](const std::array<double, 4>& p) {
    auto exp_cached = [](std::map<double, Mat7>& cache, const Mat7& gen, double v) {
      auto it = cache.find(v);
      if (it != cache.end()) return it->second;
      Mat7 e = expm7(v * gen);
      cache.emplace(v, e);
      return e;
    };
    Mat7 g = exp_cached(*cache_a, round_s2_generator_alpha(), p[2]) *
             exp_cached(*cache_b, round_s2_generator_beta(), p[3]);
    ProfilePoint pp = profile_point(p[0], k);
    double cp = std::cos(p[1]), sp = std::sin(p[1]);
    Vec7 fiber = Vec7::Zero();
    fiber(4) = pp.w;
    fiber(2) = pp.z * cp;
    fiber(3) = -pp.z * sp;
    return Vec7(g * fiber);
  };
  return m;
}

std::array<Vec7, 4> verification_framing(const G2Frame& base_frame, double t, double angle,
                                         double k) {
  ProfilePoint p = profile_point(t, k);
  Mat7 g = base_frame.e * expm7(angle * fiber_angle_generator());
  SU3Frame sf = su3_from_g2(G2Frame{g});
  Vec7 u = sf.u;
  Vec7 re_f1 = sf.f.col(0).real(), im_f1 = sf.f.col(0).imag();
  Vec7 re_f2 = sf.f.col(1).real(), im_f2 = sf.f.col(1).imag();
  Vec7 re_f3 = sf.f.col(2).real(), im_f3 = sf.f.col(2).imag();
  double z = p.z, w = p.w, den = z * z + 4 * w * w, rden = std::sqrt(den);
  std::array<Vec7, 4> h;
  h[0] = ((z * z - 4 * w * w) / den) * 2.0 * im_f3 + (-4.0 * z * w / den) * u;
  h[1] = -2.0 * re_f3;
  h[2] = (4.0 * w * im_f1 + 2.0 * z * im_f2) / rden;
  h[3] = (4.0 * w * re_f1 - 2.0 * z * re_f2) / rden;
  return h;
}

double hl_implicit_residual(const Vec7& x, double k) {
  double r4 = x.head<4>().norm();
  double s = x.tail<3>().norm();
  double d = s * s - 1.25 * r4 * r4;
  return s * d * d - std::pow(k, 5);
}

LineFamily degree_one_family() {
  return [](Cplx zeta) { return std::array<Cplx, 3>{Cplx(1, 0), zeta, Cplx(0, 0)}; };
}

CurveLift fiber_curve(const Vec7& s0, const LineFamily& family, std::array<int, 2> shape,
                      std::array<double, 2> step, std::array<double, 2> origin) {
  if (std::abs(s0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("fiber_curve: s0 must be a unit vector");
  // J-unitary basis of s0-perp: pairs (b1, J b1), (b3, J b3), (b5, J b5)
  auto J = [&](const Vec7& x) { return cross(x, s0); };
  std::array<Vec7, 6> b;
  int filled = 0;
  for (int cand = 0; cand < 7 && filled < 6; ++cand) {
    Vec7 v = Vec7::Unit(cand);
    v -= v.dot(s0) * s0;
    for (int c = 0; c < filled; ++c) v -= v.dot(b[c]) * b[c];
    if (v.norm() < 0.3) continue;
    b[filled] = v.normalized();
    b[filled + 1] = J(b[filled]);
    filled += 2;
  }
  if (filled < 6) throw std::logic_error("fiber_curve: failed to build a unitary basis");

  CurveLift lift;
  lift.dim = 2;
  lift.shape = shape;
  lift.step = step;
  lift.origin = origin;
  lift.frames.assign(static_cast<size_t>(shape[0]) * shape[1], Mat7::Identity());
  lift.excluded.assign(lift.frames.size(), 0);

  Vec7 e3_ref = b[2];  // seed completion, propagated in serpentine order
  for (int i = 0; i < shape[0]; ++i) {
    bool reverse = (i % 2) == 1;
    for (int jj = 0; jj < shape[1]; ++jj) {
      int j = reverse ? shape[1] - 1 - jj : jj;
      Cplx zeta(origin[0] + i * step[0], origin[1] + j * step[1]);
      auto a = family(zeta);
      Vec7 v = a[0].real() * b[0] + a[0].imag() * b[1] + a[1].real() * b[2] +
               a[1].imag() * b[3] + a[2].real() * b[4] + a[2].imag() * b[5];
      int idx = lift.node(i, j);
      if (v.norm() < 1e-8) {
        lift.excluded[idx] = 1;
        lift.frames[idx] = lift.frames[idx == 0 ? 0 : idx - 1];
        continue;
      }
      Vec7 e1 = v.normalized();
      Vec7 e2 = J(e1);
      Vec7 e5 = cross(e2, e1);
      Vec7 w = e3_ref;
      w -= w.dot(e1) * e1;
      w -= w.dot(e2) * e2;
      w -= w.dot(e5) * e5;
      for (int cand = 0; cand < 7 && w.norm() < 1e-6; ++cand) {
        w = Vec7::Unit(cand);
        w -= w.dot(e1) * e1;
        w -= w.dot(e2) * e2;
        w -= w.dot(e5) * e5;
      }
      Vec7 e3 = w.normalized();
      Mat7 g;
      g.col(0) = e1;
      g.col(1) = e2;
      g.col(2) = e3;
      g.col(3) = cross(e3, e5);
      g.col(4) = e5;
      g.col(5) = cross(e3, e1);
      g.col(6) = cross(e3, e2);
      lift.frames[idx] = g;
      e3_ref = e3;
    }
  }
  return lift;
}

CurveLift t_plane_lift(std::array<int, 2> shape, std::array<double, 2> step) {
  const Mat7 a = block_generator({{1, 3, 0.5}, {4, 2, 0.5}});
  const Mat7 b = block_generator({{1, 4, 0.5}, {2, 3, 0.5}});
  return exp_lift_2d(a, b, shape, step, {0.05, 0.1});
}

}  // namespace calib7
