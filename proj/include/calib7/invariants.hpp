#ifndef CALIB7_INVARIANTS_HPP
#define CALIB7_INVARIANTS_HPP

#include <string>

#include "calib7/g2core.hpp"

namespace calib7 {

/// First-order data of a CR-holomorphic lift on a 2d grid: the complex pairs
/// A = (theta1, theta3) and B = (kappa21, kappa23) read off the d/dx
/// components after fitting the common dz-ratio mu (form(dy) = mu form(dx));
/// fit holds the per-node proportionality defect.
struct ABData {
  std::array<int, 2> shape = {0, 0};
  std::array<double, 2> step = {0.0, 0.0};
  std::vector<CVec2> A;
  std::vector<CVec2> B;
  std::vector<Cplx> mu;
  std::vector<double> fit;
  std::vector<uint8_t> valid;  // interior nodes with a successful extraction
  double cr_fit_residual = 0.0;

  int node(int i, int j) const { return i * shape[1] + j; }
};

/// Extracts A, B over the interior of a lift that passes cr_residual.
/// Throws when the dz-proportionality fails (not a CR curve) or when the
/// forms vanish everywhere (degenerate input).
ABData extract_AB(const CurveLift& lift, double fit_tol = 1e-3);

/// Pointwise U(2) gauge action A -> U A, B -> conj(det U) conj(U) B.
ABData gauge_transform(const ABData& ab, const CMat2& u);

struct CRInvariants {
  std::vector<double> a;        // |A|^2 per node
  std::vector<double> b;        // |B|^2 per node
  std::vector<double> rho_abs;  // |B^T A| per node
  double a_mean = 0, b_mean = 0, rho_mean = 0;
  double a_max = 0, b_max = 0, rho_max = 0;
  std::string classification;
  double tau_relative = 1e-6;
  double tau_effective = 1e-6;

  nlohmann::json to_json() const;
};

/// Pointwise invariants and the component-level label.  Thresholds are
/// relative: tau_effective = tau_relative * max(a_mean, b_mean, 1).  Labels,
/// most specific first:
///   degenerate-O2-branch  (a and b both small)
///   fiber-CP2             (a small, b large)
///   null-torsion-binormal (b small, a large)
///   binormal-lift         (rho small, a and b large)
///   generic               otherwise
CRInvariants invariants_of(const ABData& ab, double tau_relative = 1e-6);

/// Max discrete dbar residual of A and B over interior nodes, in the gauge
/// carried by the input (gauge sensitive by design).  The dbar direction is
/// d/dx - (1/mu) d/dy for the fitted ratio mu.  Throws on a phase jump above
/// pi/2 between neighbors (gauge discontinuity).
double holomorphy_residual(const ABData& ab);

}  // namespace calib7

#endif
