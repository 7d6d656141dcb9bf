#include "calib7/s6frames.hpp"

#include <cmath>
#include <stdexcept>

namespace calib7 {

namespace {

inline double m_(const Mat7& m, int a, int b) { return m(a - 1, b - 1); }
const Cplx I(0.0, 1.0);

CMat73 standard_f() {
  CMat73 f = CMat73::Zero();
  f(6, 0) = 0.5;
  f(5, 0) = 0.5 * I;
  f(0, 1) = -0.5;
  f(1, 1) = -0.5 * I;
  f(3, 2) = -0.5;
  f(2, 2) = 0.5 * I;
  return f;
}

// theta/kappa of a Maurer-Cartan matrix and the frame columns they refer to.
SU3Forms forms_impl(const Mat7& m) {
  SU3Forms out;
  out.theta(0) = 0.5 * (m_(m, 6, 5) + I * m_(m, 7, 5));
  out.theta(1) = 0.5 * (-m_(m, 2, 5) - I * m_(m, 1, 5));
  out.theta(2) = 0.5 * (m_(m, 3, 5) - I * m_(m, 4, 5));
  Mat3 alpha, beta;
  double a12 = m_(m, 1, 7) + 0.5 * m_(m, 3, 5);
  double a13 = -m_(m, 3, 6) - 0.5 * m_(m, 2, 5);
  double a23 = -m_(m, 2, 3) + 0.5 * m_(m, 5, 6);
  alpha << 0, a12, a13, -a12, 0, a23, -a13, -a23, 0;
  double b12 = -m_(m, 1, 6) + 0.5 * m_(m, 4, 5);
  double b13 = -m_(m, 3, 7) + 0.5 * m_(m, 1, 5);
  double b23 = -m_(m, 1, 3) - 0.5 * m_(m, 5, 7);
  beta << -m_(m, 6, 7), b12, b13, b12, m_(m, 1, 2), b23, b13, b23, m_(m, 3, 4);
  out.kappa = alpha.cast<Cplx>() + I * beta.cast<Cplx>();
  return out;
}

// central or one-sided Maurer-Cartan for gauge selection at any node
std::array<Mat7, 2> mc_any_node(const CurveLift& lift, int i, int j) {
  if (lift.has_analytic_mc()) return lift.mc[lift.node(i, j)];
  std::array<Mat7, 2> omega = {Mat7::Zero(), Mat7::Zero()};
  const Mat7& g = lift.frame(i, j);
  for (int dir = 0; dir < lift.dim; ++dir) {
    int di = dir == 0 ? 1 : 0, dj = dir == 1 ? 1 : 0;
    int n = lift.shape[dir];
    int c = dir == 0 ? i : j;
    double h = lift.step[dir];
    Mat7 d;
    if (c > 0 && c < n - 1) {
      d = (lift.frame(i + di, j + dj) - lift.frame(i - di, j - dj)) / (2.0 * h);
    } else if (c == 0) {
      d = (lift.frame(i + di, j + dj) - g) / h;
    } else {
      d = (g - lift.frame(i - di, j - dj)) / h;
    }
    omega[dir] = skew_part(g.transpose() * d);
  }
  return omega;
}

}  // namespace

SU3Frame su3_from_g2(const G2Frame& frame) {
  SU3Frame out;
  out.u = frame.vec(5);
  CMat73 f0 = standard_f();
  out.f = frame.e.cast<Cplx>() * f0;
  return out;
}

G2Frame su3_to_g2(const SU3Frame& frame) {
  G2Frame out;
  out.e.col(6) = 2.0 * frame.f.col(0).real();
  out.e.col(5) = 2.0 * frame.f.col(0).imag();
  out.e.col(0) = -2.0 * frame.f.col(1).real();
  out.e.col(1) = -2.0 * frame.f.col(1).imag();
  out.e.col(3) = -2.0 * frame.f.col(2).real();
  out.e.col(2) = 2.0 * frame.f.col(2).imag();
  out.e.col(4) = frame.u;
  return out;
}

SU3Forms su3_forms(const Mat7& omega) { return forms_impl(omega); }

CMat3 bracket3(const CVec3& a) {
  CMat3 m;
  m << 0, a(2), -a(1), -a(2), 0, a(0), a(1), -a(0), 0;
  return m;
}

SU3Coframe su3_coframe(const CurveLift& lift, int i, int j) {
  auto omega = maurer_cartan(lift, i, j);
  auto de = frame_derivative(lift, i, j);
  SU3Coframe out;
  double shape = 0.0, recon = 0.0;
  const Mat7& g = lift.frame(i, j);
  SU3Frame sf = su3_from_g2(G2Frame{g});
  for (int dir = 0; dir < lift.dim; ++dir) {
    SU3Forms f = forms_impl(omega[dir]);
    out.theta[dir] = f.theta;
    out.kappa[dir] = f.kappa;
    shape = std::max(shape, (f.kappa + f.kappa.adjoint()).cwiseAbs().maxCoeff());
    shape = std::max(shape, std::abs(f.kappa.trace()));
    // du and df rebuilt from the structure equations
    CVec7 du_rec = sf.f * (-2.0 * Cplx(0, 1) * f.theta) +
                   sf.f.conjugate() * (2.0 * Cplx(0, 1) * f.theta.conjugate());
    recon = std::max(recon, (de[dir].col(4) - du_rec.real()).cwiseAbs().maxCoeff());
    CMat73 df_rec = sf.u.cast<Cplx>() * (-Cplx(0, 1) * f.theta.adjoint()) +
                    sf.f * f.kappa - sf.f.conjugate() * bracket3(f.theta);
    CMat73 df_actual = de[dir].cast<Cplx>() * standard_f();
    recon = std::max(recon, (df_actual - df_rec).cwiseAbs().maxCoeff());
  }
  out.kappa_shape_residual = shape;
  out.reconstruction_residual = recon;
  return out;
}

Report holomorphicity_residual(const CurveLift& surface) {
  if (surface.dim != 2)
    throw std::invalid_argument("holomorphicity_residual requires a 2d lift");
  Report rep;
  rep.check = "holomorphicity_residual";
  ResidualStats minors;
  long degenerate = 0;
  double theta_scale = 0.0;
  for (int i = 0; i < surface.shape[0]; ++i) {
    for (int j = 0; j < surface.shape[1]; ++j) {
      if (!surface.interior(i, j) && !surface.has_analytic_mc()) continue;
      if (surface.is_excluded(i, j)) continue;
      auto cf = su3_coframe(surface, i, j);
      double s = std::max(cf.theta[0].squaredNorm(), cf.theta[1].squaredNorm());
      theta_scale = std::max(theta_scale, s);
      if (s < 1e-16) {
        ++degenerate;
        continue;
      }
      double worst = 0.0;
      for (int p = 0; p < 3; ++p)
        for (int q = p + 1; q < 3; ++q)
          worst = std::max(worst, std::abs(cf.theta[0](p) * cf.theta[1](q) -
                                           cf.theta[1](p) * cf.theta[0](q)));
      minors.add(worst / s);
    }
  }
  minors.to_json(rep.stats, "minor");
  rep.stats["degenerate_nodes"] = degenerate;
  rep.stats["theta_scale"] = theta_scale;
  rep.tolerance = 1e-5;
  rep.pass = minors.count > 0 && minors.max < rep.tolerance;
  if (minors.count == 0) rep.stats["note"] = "all nodes degenerate (u constant)";
  return rep;
}

namespace {

// Unitary 3x3 with prescribed first (or chosen) column, remaining columns
// continued from a reference unitary for smoothness, det forced to 1.
CMat3 complete_unitary(const CVec3& first, const CMat3& reference, int slot) {
  CMat3 u = CMat3::Zero();
  u.col(slot) = first.normalized();
  std::vector<int> done = {slot};
  int free_slots[2], k = 0;
  for (int c = 0; c < 3; ++c)
    if (c != slot) free_slots[k++] = c;
  for (int fs : free_slots) {
    CVec3 v = reference.col(fs);
    for (int c : done) v -= u.col(c).dot(v) * u.col(c);
    double n = v.norm();
    for (int b = 0; b < 3 && n < 1e-8; ++b) {
      v = CVec3::Unit(b);
      for (int c : done) v -= u.col(c).dot(v) * u.col(c);
      n = v.norm();
    }
    u.col(fs) = v / n;
    done.push_back(fs);
  }
  Cplx det = u.determinant();
  u.col(free_slots[1]) /= det;
  return u;
}

struct GaugePass {
  std::vector<CMat3> s;  // per node
};

void apply_gauge(CurveLift& lift, const GaugePass& pass) {
  for (long n = 0; n < lift.node_count(); ++n) {
    Mat7 h = su3_gauge_matrix(pass.s[n]);
    lift.frames[n] = lift.frames[n] * h;
  }
  lift.mc.clear();  // analytic derivatives do not survive a varying gauge
}

// BFS order over the grid starting at (0,0): returns node list and parent.
void bfs_order(const CurveLift& lift, std::vector<int>& order, std::vector<int>& parent) {
  const int nx = lift.shape[0], ny = lift.shape[1];
  order.clear();
  parent.assign(nx * ny, -1);
  std::vector<uint8_t> seen(nx * ny, 0);
  std::vector<int> queue = {0};
  seen[0] = 1;
  for (size_t head = 0; head < queue.size(); ++head) {
    int cur = queue[head];
    order.push_back(cur);
    int ci = cur / ny, cj = cur % ny;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      int ni = ci + di[d], nj = cj + dj[d];
      if (ni < 0 || ni >= nx || nj < 0 || nj >= ny) continue;
      int nn = ni * ny + nj;
      if (!seen[nn]) {
        seen[nn] = 1;
        parent[nn] = cur;
        queue.push_back(nn);
      }
    }
  }
}

}  // namespace

Mat7 su3_gauge_matrix(const CMat3& s) {
  SU3Frame f;
  f.u = Vec7::Unit(4);
  f.f = standard_f() * s;
  return su3_to_g2(f).e;
}

SU3Forms flip_f_sign(const SU3Forms& forms) {
  SU3Forms out = forms;
  out.theta = -forms.theta;
  return out;
}

AdaptResult adapt_holomorphic(const CurveLift& surface, NormalConvention convention,
                              double theta_floor) {
  if (surface.dim != 2)
    throw std::invalid_argument("adapt_holomorphic requires a 2d lift");
  Report holo = holomorphicity_residual(surface);
  if (!holo.pass) {
    if (holo.stats.contains("note"))
      throw std::invalid_argument("adapt_holomorphic: u is constant on the lift");
    throw std::invalid_argument("adapt_holomorphic: input is not a holomorphic lift");
  }

  AdaptResult result;
  result.lift = surface;
  const int nx = surface.shape[0], ny = surface.shape[1];
  result.branch_point.assign(nx * ny, 0);

  std::vector<int> order, parent;
  bfs_order(result.lift, order, parent);

  // Pass 1: rotate the theta line onto the first f-axis.
  {
    GaugePass pass;
    pass.s.assign(nx * ny, CMat3::Identity());
    std::vector<CMat3> ref(nx * ny, CMat3::Identity());
    for (int n : order) {
      int i = n / ny, j = n % ny;
      auto omega = mc_any_node(result.lift, i, j);
      SU3Forms fx = forms_impl(omega[0]), fy = forms_impl(omega[1]);
      CVec3 t = fx.theta.norm() >= fy.theta.norm() ? fx.theta : fy.theta;
      CMat3 reference = parent[n] >= 0 ? pass.s[parent[n]] : CMat3::Identity();
      if (t.norm() < theta_floor) {
        result.branch_point[n] = 1;
        pass.s[n] = reference;
      } else {
        // phase-anchor the line so the gauged theta_1(dx) is real positive,
        // which keeps re-adaptation the identity
        CVec3 that = t.normalized();
        Cplx anchor = that.dot(fx.theta);
        if (std::abs(anchor) < 1e-3 * t.norm()) anchor = that.dot(fy.theta);
        if (std::abs(anchor) > 0) that *= anchor / std::abs(anchor);
        pass.s[n] = complete_unitary(that, reference, 0);
      }
      ref[n] = pass.s[n];
    }
    apply_gauge(result.lift, pass);
  }

  // Pass 2: mix (f2, f3) to kill the second-normal column entry.
  const int killed_row = convention == NormalConvention::f2_spans_n2 ? 1 : 2;  // kappa_{2,1} or kappa_{3,1}
  {
    GaugePass pass;
    pass.s.assign(nx * ny, CMat3::Identity());
    for (int n : order) {
      int i = n / ny, j = n % ny;
      CMat3 reference = parent[n] >= 0 ? pass.s[parent[n]] : CMat3::Identity();
      if (result.branch_point[n]) {
        pass.s[n] = reference;
        continue;
      }
      auto omega = mc_any_node(result.lift, i, j);
      SU3Forms fx = forms_impl(omega[0]), fy = forms_impl(omega[1]);
      CMat2 k;  // rows: (kappa_21, kappa_31) per direction
      k << fx.kappa(1, 0), fy.kappa(1, 0), fx.kappa(2, 0), fy.kappa(2, 0);
      double theta_scale = std::max(fx.theta.norm(), fy.theta.norm());
      if (k.norm() < 1e-6 * std::max(theta_scale, 1e-3)) {
        // both normal entries vanish (round-sphere branch): nothing to rotate
        pass.s[n] = CMat3::Identity();
        continue;
      }
      Eigen::JacobiSVD<CMat2> svd(k, Eigen::ComputeFullU);
      CVec2 nullvec = svd.matrixU().col(1);  // least singular direction
      // continuity: phase-align to the parent's corresponding column
      int null_slot = killed_row == 1 ? 0 : 1;
      CVec2 ref_col = reference.block<2, 1>(1, 1 + null_slot);
      Cplx overlap = nullvec.dot(ref_col);
      if (std::abs(overlap) > 1e-12) nullvec *= overlap / std::abs(overlap);
      CMat2 v = CMat2::Zero();
      v.col(null_slot) = nullvec;
      CVec2 other(-std::conj(nullvec(1)), std::conj(nullvec(0)));
      v.col(1 - null_slot) = other;
      CMat3 s = CMat3::Identity();
      s.block<2, 2>(1, 1) = v;
      Cplx det = s.determinant();
      s.col(1 - null_slot + 1) /= det;
      pass.s[n] = s;
    }
    apply_gauge(result.lift, pass);
  }

  // Pass 3: torus phases; theta_1(dx) real positive, continued by BFS.
  {
    GaugePass pass;
    pass.s.assign(nx * ny, CMat3::Identity());
    std::vector<double> phi1(nx * ny, 0.0);
    for (int n : order) {
      int i = n / ny, j = n % ny;
      if (result.branch_point[n]) {
        phi1[n] = parent[n] >= 0 ? phi1[parent[n]] : 0.0;
      } else {
        auto omega = mc_any_node(result.lift, i, j);
        SU3Forms fx = forms_impl(omega[0]);
        double raw = std::arg(fx.theta(0));
        if (parent[n] >= 0) {
          double p = phi1[parent[n]];
          while (raw - p > M_PI) raw -= 2 * M_PI;
          while (raw - p < -M_PI) raw += 2 * M_PI;
        }
        phi1[n] = raw;
      }
      CMat3 s = CMat3::Zero();
      // theta_1 -> exp(-i phi1) theta_1; split the compensating phase
      // evenly over f2 and f3 so the gauge stays in SU(3).
      s(0, 0) = std::exp(Cplx(0, phi1[n]));
      s(1, 1) = std::exp(Cplx(0, -phi1[n] / 2));
      s(2, 2) = std::exp(Cplx(0, -phi1[n] / 2));
      pass.s[n] = s;
    }
    apply_gauge(result.lift, pass);
  }

  // Residuals after adaptation.
  ResidualStats gauge_res, h1_res;
  double scale = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!result.lift.interior(i, j)) continue;
      if (result.branch_point[i * ny + j]) continue;
      auto omega = maurer_cartan(result.lift, i, j);
      for (int dir = 0; dir < 2; ++dir) {
        SU3Forms f = forms_impl(omega[dir]);
        scale = std::max(scale, f.theta.norm());
        gauge_res.add(std::abs(f.theta(1)));
        gauge_res.add(std::abs(f.theta(2)));
        gauge_res.add(std::abs(f.kappa(killed_row, 0)));
        h1_res.add(std::abs(f.kappa(killed_row == 1 ? 2 : 1, 0)));
      }
    }
  }
  result.report.check = "adapt_holomorphic";
  gauge_res.to_json(result.report.stats, "gauge");
  h1_res.to_json(result.report.stats, "normal1_entry");
  result.report.stats["theta_scale"] = scale;
  result.report.tolerance = 1e-4;
  result.report.pass = gauge_res.max < std::max(1e-4, 1e-4 * scale);
  result.round_s2_flag = h1_res.max < 1e-6 * std::max(1.0, scale);
  result.report.stats["round_s2_flag"] = result.round_s2_flag;
  long branch_count = 0;
  for (uint8_t b : result.branch_point) branch_count += b;
  result.report.stats["branch_point_nodes"] = branch_count;
  return result;
}

TorsionResult torsion(const CurveLift& adapted, int i, int j, double theta_floor) {
  auto omega = maurer_cartan(adapted, i, j);
  SU3Forms fx = forms_impl(omega[0]), fy = forms_impl(omega[1]);
  CVec2 th(fx.theta(0), fy.theta(0));
  if (th.norm() < theta_floor)
    throw std::domain_error("torsion: theta_1 vanishes at this node (branch point)");
  CVec2 k31(fx.kappa(2, 0), fy.kappa(2, 0));
  CVec2 k23(fx.kappa(1, 2), fy.kappa(1, 2));
  double den = th.squaredNorm();
  TorsionResult out;
  out.H1 = th.dot(k31) / den;  // Eigen dot conjugates the first argument
  out.H2 = th.dot(k23) / den;
  double r1 = (k31 - out.H1 * th).norm();
  double r2 = (k23 - out.H2 * th).norm();
  out.fit_residual = std::max(r1, r2) / th.norm();
  return out;
}

Report su3_structure_closure(const CurveLift& surface) {
  if (surface.dim != 2)
    throw std::invalid_argument("su3_structure_closure requires a 2d lift");
  Report rep;
  rep.check = "su3_structure_closure";
  ResidualStats res;
  const int margin = surface.fd_order == 4 ? 2 : 1;
  auto theta_at = [&](int i, int j) {
    auto omega = maurer_cartan(surface, i, j);
    return std::array<SU3Forms, 2>{forms_impl(omega[0]), forms_impl(omega[1])};
  };
  for (int i = 2 * margin; i < surface.shape[0] - 2 * margin; ++i) {
    for (int j = 2 * margin; j < surface.shape[1] - 2 * margin; ++j) {
      auto fc = theta_at(i, j);
      auto fxp = theta_at(i + 1, j), fxm = theta_at(i - 1, j);
      auto fyp = theta_at(i, j + 1), fym = theta_at(i, j - 1);
      // d theta (dx, dy) = dx(theta(dy)) - dy(theta(dx))
      CVec3 dtheta = (fxp[1].theta - fxm[1].theta) / (2 * surface.step[0]) -
                     (fyp[0].theta - fym[0].theta) / (2 * surface.step[1]);
      CVec3 wedge_kt = fc[0].kappa * fc[1].theta - fc[1].kappa * fc[0].theta;
      CVec3 wedge_tt = bracket3(fc[0].theta.conjugate()) * fc[1].theta.conjugate() -
                       bracket3(fc[1].theta.conjugate()) * fc[0].theta.conjugate();
      res.add((dtheta + wedge_kt + wedge_tt).norm());
    }
  }
  res.to_json(rep.stats, "closure");
  rep.tolerance = 1e-4;
  rep.pass = res.count > 0 && res.max < rep.tolerance;
  return rep;
}

}  // namespace calib7
