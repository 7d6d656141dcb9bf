#include "calib7/invariants.hpp"

#include <cmath>
#include <stdexcept>

#include "calib7/s6frames.hpp"

namespace calib7 {

ABData extract_AB(const CurveLift& lift, double fit_tol) {
  if (lift.dim != 2) throw std::invalid_argument("extract_AB requires a 2d lift");
  ABData ab;
  ab.shape = lift.shape;
  ab.step = lift.step;
  const long n = static_cast<long>(lift.shape[0]) * lift.shape[1];
  ab.A.assign(n, CVec2::Zero());
  ab.B.assign(n, CVec2::Zero());
  ab.mu.assign(n, Cplx(0, 1));
  ab.fit.assign(n, 0.0);
  ab.valid.assign(n, 0);

  double worst_fit = 0.0, scale = 0.0;
  long extracted = 0;
  for (int i = 0; i < lift.shape[0]; ++i) {
    for (int j = 0; j < lift.shape[1]; ++j) {
      if (!lift.interior(i, j) && !lift.has_analytic_mc()) continue;
      if (lift.is_excluded(i, j)) continue;
      auto omega = maurer_cartan(lift, i, j);
      SU3Forms fx = su3_forms(omega[0]), fy = su3_forms(omega[1]);
      Eigen::Vector4cd vx(fx.theta(0), fx.theta(2), fx.kappa(1, 0), fx.kappa(1, 2));
      Eigen::Vector4cd vy(fy.theta(0), fy.theta(2), fy.kappa(1, 0), fy.kappa(1, 2));
      double den = vx.squaredNorm();
      int idx = ab.node(i, j);
      scale = std::max(scale, std::sqrt(den));
      if (den < 1e-20) continue;  // no first-order data at this node
      Cplx mu = vx.dot(vy) / den;
      double fit = (vy - mu * vx).norm() / std::sqrt(den);
      ab.A[idx] = CVec2(vx(0), vx(1));
      ab.B[idx] = CVec2(vx(2), vx(3));
      ab.mu[idx] = mu;
      ab.fit[idx] = fit;
      ab.valid[idx] = 1;
      ++extracted;
      worst_fit = std::max(worst_fit, fit);
    }
  }
  if (extracted == 0)
    throw std::invalid_argument(
        "extract_AB: all first-order forms vanish (degenerate lift, not an immersed "
        "CR curve)");
  ab.cr_fit_residual = worst_fit;
  if (worst_fit > fit_tol)
    throw std::invalid_argument("extract_AB: dz-proportionality fails (not a CR curve)");
  // orientation: mu must lie in the upper half plane
  for (long k = 0; k < n; ++k)
    if (ab.valid[k] && ab.mu[k].imag() < 0)
      throw std::invalid_argument(
          "extract_AB: reversed complex orientation (Im mu < 0); swap the grid axes");
  return ab;
}

ABData gauge_transform(const ABData& ab, const CMat2& u) {
  if ((u * u.adjoint() - CMat2::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("gauge_transform: matrix is not unitary");
  ABData out = ab;
  Cplx det_conj = std::conj(u.determinant());
  CMat2 u_conj = u.conjugate();
  for (size_t k = 0; k < ab.A.size(); ++k) {
    out.A[k] = u * ab.A[k];
    out.B[k] = det_conj * (u_conj * ab.B[k]);
  }
  return out;
}

nlohmann::json CRInvariants::to_json() const {
  nlohmann::json j;
  j["classification"] = classification;
  j["tau_relative"] = tau_relative;
  j["tau_effective"] = tau_effective;
  j["a_mean"] = a_mean;
  j["b_mean"] = b_mean;
  j["rho_mean"] = rho_mean;
  j["a_max"] = a_max;
  j["b_max"] = b_max;
  j["rho_max"] = rho_max;
  j["nodes"] = nlohmann::json::array();
  for (size_t k = 0; k < a.size(); ++k)
    j["nodes"].push_back({{"a", a[k]}, {"b", b[k]}, {"rho_abs", rho_abs[k]}});
  return j;
}

CRInvariants invariants_of(const ABData& ab, double tau_relative) {
  CRInvariants inv;
  inv.tau_relative = tau_relative;
  long count = 0;
  for (size_t k = 0; k < ab.A.size(); ++k) {
    if (!ab.valid[k]) continue;
    double a = ab.A[k].squaredNorm();
    double b = ab.B[k].squaredNorm();
    double rho = std::abs(ab.B[k](0) * ab.A[k](0) + ab.B[k](1) * ab.A[k](1));
    inv.a.push_back(a);
    inv.b.push_back(b);
    inv.rho_abs.push_back(rho);
    inv.a_mean += a;
    inv.b_mean += b;
    inv.rho_mean += rho;
    inv.a_max = std::max(inv.a_max, a);
    inv.b_max = std::max(inv.b_max, b);
    inv.rho_max = std::max(inv.rho_max, rho);
    ++count;
  }
  if (count == 0) {
    inv.classification = "degenerate-O2-branch";
    return inv;
  }
  inv.a_mean /= count;
  inv.b_mean /= count;
  inv.rho_mean /= count;
  double tau = tau_relative * std::max({inv.a_mean, inv.b_mean, 1.0});
  inv.tau_effective = tau;
  bool a_small = inv.a_max < tau, b_small = inv.b_max < tau, rho_small = inv.rho_max < tau;
  if (a_small && b_small)
    inv.classification = "degenerate-O2-branch";
  else if (a_small)
    inv.classification = "fiber-CP2";
  else if (b_small)
    inv.classification = "null-torsion-binormal";
  else if (rho_small)
    inv.classification = "binormal-lift";
  else
    inv.classification = "generic";
  return inv;
}

double holomorphy_residual(const ABData& ab) {
  const int nx = ab.shape[0], ny = ab.shape[1];
  double scale = 0.0;
  for (size_t k = 0; k < ab.A.size(); ++k)
    if (ab.valid[k]) scale = std::max({scale, ab.A[k].norm(), ab.B[k].norm()});
  if (scale == 0.0) return 0.0;

  auto phase_jump = [&](const CVec2& p, const CVec2& q) {
    // angle between complex 2-vectors via their Hermitian overlap
    Cplx ov = p.dot(q);
    double np = p.norm(), nq = q.norm();
    if (np < 1e-3 * scale || nq < 1e-3 * scale) return 0.0;
    return std::abs(std::arg(ov / (np * nq)));
  };

  double worst = 0.0;
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 1; j + 1 < ny; ++j) {
      int c = ab.node(i, j);
      if (!ab.valid[c]) continue;
      int xp = ab.node(i + 1, j), xm = ab.node(i - 1, j);
      int yp = ab.node(i, j + 1), ym = ab.node(i, j - 1);
      if (!(ab.valid[xp] && ab.valid[xm] && ab.valid[yp] && ab.valid[ym])) continue;
      for (int nb : {xp, xm, yp, ym}) {
        if (phase_jump(ab.A[c], ab.A[nb]) > M_PI / 2 ||
            phase_jump(ab.B[c], ab.B[nb]) > M_PI / 2)
          throw std::domain_error("holomorphy_residual: gauge discontinuity between neighbors");
      }
      Cplx mu = ab.mu[c];
      if (std::abs(mu) < 1e-12) continue;
      // dbar direction: d/dx - (1/mu) d/dy annihilates dz = dx + mu dy
      CVec2 dax = (ab.A[xp] - ab.A[xm]) / (2 * ab.step[0]);
      CVec2 day = (ab.A[yp] - ab.A[ym]) / (2 * ab.step[1]);
      CVec2 dbx = (ab.B[xp] - ab.B[xm]) / (2 * ab.step[0]);
      CVec2 dby = (ab.B[yp] - ab.B[ym]) / (2 * ab.step[1]);
      double ra = (dax - day / mu).norm();
      double rb = (dbx - dby / mu).norm();
      worst = std::max(worst, std::max(ra, rb) / scale);
    }
  }
  return worst;
}

}  // namespace calib7
