#ifndef CALIB7_S6FRAMES_HPP
#define CALIB7_S6FRAMES_HPP

#include "calib7/g2core.hpp"

namespace calib7 {

/// Complex frame (u, f1, f2, f3) adapted to the SU(3) structure on S^6:
///   u = e5,  (f1, f2, f3) = (e7 + i e6, -e1 - i e2, -e4 + i e3) / 2.
struct SU3Frame {
  Vec7 u = Vec7::Unit(4);
  CMat73 f = CMat73::Zero();  // columns f1, f2, f3
};

SU3Frame su3_from_g2(const G2Frame& frame);
G2Frame su3_to_g2(const SU3Frame& frame);

/// (theta, kappa) read off a Maurer-Cartan matrix:
///   theta = (m65 + i m75, -m25 - i m15, m35 - i m45) / 2,
///   kappa = alpha + i beta with the entries listed in the implementation.
struct SU3Forms {
  CVec3 theta = CVec3::Zero();
  CMat3 kappa = CMat3::Zero();
};
SU3Forms su3_forms(const Mat7& omega);

/// [a] for a complex 3-vector: the skew matrix with [a] b = a x b pattern
/// [[0,a3,-a2],[-a3,0,a1],[a2,-a1,0]].
CMat3 bracket3(const CVec3& a);

/// Coframe along a lift at one node: theta/kappa per parameter direction,
/// plus the reconstruction residual of du and df from the structure
/// equations (measures frame drift and FD error).
struct SU3Coframe {
  std::array<CVec3, 2> theta;
  std::array<CMat3, 2> kappa;
  double reconstruction_residual = 0.0;
  double kappa_shape_residual = 0.0;  // anti-Hermitian + trace-free defect
};
SU3Coframe su3_coframe(const CurveLift& lift, int i, int j = 0);

/// Wedge-vanishing test theta_i ^ theta_j = 0 over a 2d lift: reports the
/// max normalized 2x2 minor of the 3x2 matrix theta(dx), theta(dy) and flags
/// nodes where all theta vanish (fiber motion only).
Report holomorphicity_residual(const CurveLift& surface);

struct AdaptResult {
  CurveLift lift;
  Report report;          // gauge residuals after adaptation
  bool round_s2_flag = false;   // kappa_31 residually zero everywhere
  std::vector<uint8_t> branch_point;  // per node: |theta1| below threshold
};

enum class NormalConvention {
  f2_spans_n2,  // f2 spans the second normal bundle, f3 the first
  f3_spans_n2,  // the swapped adaptation used by the bundle construction
};

/// Gauge-rotates each frame by the SU(3) stabilizer of u (then by torus
/// phases) so that theta_2, theta_3 and the off-block kappa entry vanish;
/// u is unchanged pointwise.  Phases are propagated from the (0,0) node by
/// breadth-first continuity; theta_1(dx) is made real positive.
AdaptResult adapt_holomorphic(const CurveLift& surface,
                              NormalConvention convention = NormalConvention::f2_spans_n2,
                              double theta_floor = 1e-8);

struct TorsionResult {
  Cplx H1;
  Cplx H2;
  double fit_residual;
};

/// Least-squares ratios kappa_31 = H1 theta_1, kappa_23 = H2 theta_1 at an
/// interior node of an adapted lift.  Throws when |theta_1| is below the
/// branch-point floor.
TorsionResult torsion(const CurveLift& adapted, int i, int j = 0,
                      double theta_floor = 1e-8);

/// Embeds an SU(3) matrix S acting on the f-frame (f -> f S) as the 7x7
/// stabilizer of u in G2.
Mat7 su3_gauge_matrix(const CMat3& s);

/// Sign convention converter (u, f, theta, kappa) -> (u, -f, -theta, kappa)
/// between the two common normalizations of the structure equations.
SU3Forms flip_f_sign(const SU3Forms& forms);

/// Structure-equation closure at FD order on a 2d lift:
/// d theta + kappa ^ theta + [conj theta] ^ conj theta = 0.
Report su3_structure_closure(const CurveLift& surface);

}  // namespace calib7

#endif
