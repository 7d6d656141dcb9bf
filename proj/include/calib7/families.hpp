#ifndef CALIB7_FAMILIES_HPP
#define CALIB7_FAMILIES_HPP

#include <functional>
#include <string>
#include <vector>

#include "calib7/cr27.hpp"
#include "calib7/g2core.hpp"

namespace calib7 {

/// Point on the profile curve w (w^2 - (5/4) z^2)^2 = k^5 in the rational
/// parametrization z = k t^{-1/5} (t^2 - 5/4)^{-2/5},
/// w = k t^{4/5} (t^2 - 5/4)^{-2/5}, using the real odd-root convention for
/// fractional powers of negative bases.  Throws near t = 0 and t = ±sqrt5/2.
struct ProfilePoint {
  double z;
  double w;
};
ProfilePoint profile_point(double t, double k);
double profile_implicit_residual(double z, double w, double k);
int profile_branch(double t);  // +1 for |t| > sqrt(5)/2, -1 inside

struct ProfileCurve {
  double k;
  std::vector<double> t;  // admissible parameter samples, both branches
  std::vector<ProfilePoint> points;
  std::vector<int> branch;
};
ProfileCurve sample_profile(double k, int per_branch, double t_min = 0.02,
                            double t_max = 40.0);

void profile_to_csv(const ProfileCurve& c, const std::string& path);
void profile_to_svg(const ProfileCurve& c, const std::string& path);

/// Lift g(x, y) = base * exp(x A) * exp(y B) on a uniform grid with analytic
/// Maurer-Cartan matrices.  A and B must be in g2.
CurveLift exp_lift_2d(const Mat7& a, const Mat7& b, std::array<int, 2> shape,
                      std::array<double, 2> step, std::array<double, 2> origin = {0, 0},
                      const Mat7& base = Mat7::Identity());

/// Block-diagonal generators whose V+ parts rotate span(e5,e6,e7): the pair
/// used to sweep the round 2-sphere u = e5(alpha, beta).
const Mat7& round_s2_generator_alpha();  // rotates (e6, e7)
const Mat7& round_s2_generator_beta();   // rotates (e5, e6)
const Mat7& fiber_angle_generator();     // rotates (e3, e4): f3 phase action

/// Frame field over the round 2-sphere in V+ = span(e5, e6, e7), generated by
/// exponentials of the block-diagonal pair above.  Nodes too close to the
/// coordinate poles (|sin beta| below pole_floor) are marked excluded.
CurveLift round_s2_frame_field(std::array<int, 2> shape, std::array<double, 2> step,
                               std::array<double, 2> origin = {0.1, 0.3},
                               double pole_floor = 0.02);

/// Relabels a lift so that the former (e3, e4)-plane becomes the ruling plane
/// (e1, e2): right-multiplication by a fixed G2 frame permutation.
CurveLift lift_relabel_n2(const CurveLift& lift);

/// Surface bundle over an adapted base: samples
///   x = g(sigma) [ w(t) eps5 + z(t) (cos psi eps3 - sin psi eps4) ]
/// over base x t_grid x angle_grid.  Requires k > 0; the base must satisfy
/// theta_2 = theta_3 = 0 and kappa_31 = 0 (f3 spans the second normal).
/// Tangent columns are ordered (dt, dpsi, dsigma1, dsigma2), with dt negated
/// on the outer branch so the calibration value of a passing bundle is +1.
Fourfold surface_bundle(const CurveLift& base, double k, const std::vector<double>& t_grid,
                        const std::vector<double>& angle_grid);

/// k = 0 cone branch: rays through g(sigma) (sqrt5/2 eps5 + cos psi eps3 -
/// sin psi eps4)/|.|, sampled over r_grid x angle_grid.
Fourfold surface_bundle_cone(const CurveLift& base, const std::vector<double>& r_grid,
                             const std::vector<double>& angle_grid);

/// k = 0 plane branch: the ruled 4-fold swept by the (e3, e4)-planes of the
/// base, i.e. the gamma construction over the relabeled lift.
Fourfold n2_plane_piece(const CurveLift& base, const std::vector<double>& r_grid);

/// Surface bundle over the default round 2-sphere base with a closed-form
/// position map attached (enables finite-difference re-differentiation).
/// This is the explicit family that sweeps the classical algebraic fibers
/// x5 (x5^2 - (5/4) x1^2)^2 = k^5 under the SU(2) orbit action.
Fourfold hl_family(double k, std::array<int, 2> base_shape, std::array<double, 2> base_step,
                   std::array<double, 2> base_origin, const std::vector<double>& t_grid,
                   const std::vector<double>& angle_grid);

/// The orthonormal framing (h1, h2, h3, h4) of the bundle at one base frame,
/// profile parameter and fiber angle; phi vanishes on all its triples.
std::array<Vec7, 4> verification_framing(const G2Frame& base_frame, double t,
                                         double angle, double k);

/// SU(2)-invariant implicit-equation residual,
///   s (s^2 - (5/4) r4^2)^2 - k^5  with  r4 = |(x1..x4)|, s = |(x5,x6,x7)|.
double hl_implicit_residual(const Vec7& x, double k);

/// Holomorphic family of complex lines in the J-complex structure of s0-perp;
/// coordinates refer to the J-unitary basis constructed from s0.
using LineFamily = std::function<std::array<Cplx, 3>(Cplx)>;

/// Lift with e5 = s0 constant and (e1, e2) tracing the family's complex lines
/// for J(x) = cross(x, s0).  Completion vectors are propagated smoothly in
/// row-serpentine order; degenerate family nodes are excluded.
CurveLift fiber_curve(const Vec7& s0, const LineFamily& family, std::array<int, 2> shape,
                      std::array<double, 2> step, std::array<double, 2> origin = {-0.4, -0.4});

/// Degree-1 default family (1, zeta, 0).
LineFamily degree_one_family();

/// Lift whose ruling plane rotates inside the coassociative plane
/// span(x1..x4); its gamma construction is contained in that plane.
CurveLift t_plane_lift(std::array<int, 2> shape, std::array<double, 2> step);

}  // namespace calib7

#endif
