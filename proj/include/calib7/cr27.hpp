#ifndef CALIB7_CR27_HPP
#define CALIB7_CR27_HPP

#include <functional>
#include <string>

#include "calib7/g2core.hpp"

namespace calib7 {

/// Oriented 2-plane in R^7 represented by an ordered orthonormal pair.
struct OrientedTwoPlane {
  Vec7 v1;
  Vec7 v2;
  static OrientedTwoPlane from_vectors(const Vec7& a, const Vec7& b, double tol = 1e-10);
};

/// The equivariant projection to the 6-sphere: p(v1 ^ v2) = cross(v2, v1).
Vec7 project_p(const OrientedTwoPlane& plane);

/// Complex 1-forms of the invariant CR structure read off a Maurer-Cartan
/// matrix m:  zeta3 = m31 + i m41, zeta4 = m32 + i m42,
///            zeta6 = m61 - i m71, zeta7 = m62 - i m72,
/// plus the fiber entries w51 = m51, w52 = m52 and Phi = m63 + i m73.
struct CRForms {
  std::array<Cplx, 4> zeta;  // zeta3, zeta4, zeta6, zeta7
  double w51 = 0.0;
  double w52 = 0.0;
  Cplx Phi = 0.0;
};
CRForms cr_forms(const Mat7& omega);

/// CR-holomorphicity of a 2d lift: max |w51|, |w52| pulled back and max
/// normalized 2x2 minor of the 4x2 zeta matrix.  Both near zero certifies a
/// CR-holomorphic curve; all zeta near zero flags a degenerate (constant)
/// Grassmann map, and zeta6 = zeta7 = 0 with the rest nonzero flags the
/// O(2)-symmetric branch.
Report cr_residual(const CurveLift& lift);

/// Ruling ideal residual computed through the cross product route:
/// the two 1-forms <de_i, e_i . e_j> and six 2-forms <de_i, de_j . e_k>
/// for indices in {1,2}, pulled back by finite differences.
Report ruling_ideal_residual(const CurveLift& lift);

/// Both sides of the six congruences Upsilon_k == c * phi(e_a, de_b, de_c)
/// at one node, after removing the fitted w51/w52 components of the tangent
/// pair (least-norm correctors inside g2).  Residual is the max mismatch.
Report upsilon_identity_check(const CurveLift& lift, int i, int j = 0);

/// Sampled 4-fold with positions, tangents, and optional closed-form access.
struct FourfoldSample {
  std::array<double, 4> param;
  Vec7 x;
  Mat74 jacobian;
  bool analytic = false;
};

struct Fourfold {
  std::string name;
  std::vector<FourfoldSample> samples;
  // optional closed-form position for FD re-differentiation
  std::function<Vec7(const std::array<double, 4>&)> position;
  bool has_position() const { return static_cast<bool>(position); }
};

/// Cone over a curve of oriented 2-planes: samples r1 e1(s) + r2 e2(s) on the
/// product of the r-grid with the lift grid.  Tangent ordering is
/// (d/dr1, d/dr2, d/ds1, d/ds2) with the surface directions swapped when the
/// zeta orientation of the lift is reversed, so that the calibration value of
/// a coassociative output is +1.
Fourfold gamma_construction(const CurveLift& lift, const std::vector<double>& r_grid);

enum class DerivativeMode { analytic, finite_difference };

struct CoassocOptions {
  DerivativeMode mode = DerivativeMode::analytic;
  double fd_step = 1e-5;
  double immersion_floor = 1e-6;  // smallest singular value of the Jacobian
};

/// phi restricted to the tangent spaces (max over the 4 coordinate triples of
/// the orthonormalized tangent frame) plus the *phi calibration value as an
/// orientation diagnostic.  Rank-deficient nodes are excluded and counted.
Report coassociativity_residual(const Fourfold& m, const CoassocOptions& opts = {});

void fourfold_to_csv(const Fourfold& m, const std::string& path,
                     const std::vector<double>* residuals = nullptr);

/// Least-norm elements of g2 dual to w51, w52: used to project tangents into
/// the annihilator of the fiber forms.
const std::array<Mat7, 2>& w5_correctors();

}  // namespace calib7

#endif
