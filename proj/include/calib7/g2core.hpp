#ifndef CALIB7_G2CORE_HPP
#define CALIB7_G2CORE_HPP

#include <array>
#include <optional>
#include <vector>

#include "calib7/forms7.hpp"
#include "calib7/linalg.hpp"
#include "calib7/report.hpp"

namespace calib7 {

// The seven linear relations satisfied by the entries m(a,b) = omega_ab of a
// matrix in g2 (on top of skewness), with T = span(x1..x4), V+ = span(x5..x7):
//   m67 = m12 + m34,   m75 = m13 + m42,   m56 = m14 + m23,
//   m51 = -m64 + m73,  m52 = -m63 - m74,  m53 = m62 - m71,  m54 = m61 + m72.
double g2_relation_residual(const Mat7& m);  // max |violated relation|, incl. skewness
int worst_g2_relation(const Mat7& m);        // 0: skewness, 1..7: relation row

/// Element of g2 in the split presentation: theta acts on T, beta couples
/// V+ to T, and matrix7 is the assembled 7x7 matrix.
struct G2AlgebraElement {
  Mat4 theta = Mat4::Zero();
  Mat34 beta = Mat34::Zero();
  Mat7 matrix7 = Mat7::Zero();

  static G2AlgebraElement from_matrix(const Mat7& m, double tol = 1e-10);
};

/// Residual of the quaternionic compatibility i*b5 + j*b6 + k*b7 = 0, where
/// the rows of beta are read as quaternions x1 + x2 i + x3 j + x4 k.
Eigen::Vector4d beta_relation(const Mat34& beta);

/// so(T) action conjugated onto the self-dual basis
///   {dx1^dx2 + dx3^dx4, dx1^dx3 + dx4^dx2, dx1^dx4 + dx2^dx3},
/// identified with (x5, x6, x7) through v -> interior(v, phi).
Mat3 sigma_plus(const Mat4& theta);
Mat3 sigma_minus(const Mat4& theta);  // anti-self-dual companion

G2AlgebraElement embed(const Mat4& theta, const Mat34& beta);

/// Basis of g2 as the null space of the linear constraints: 6 block-diagonal
/// elements followed by 8 off-diagonal ones, Frobenius-normalized.
const std::vector<G2AlgebraElement>& g2_basis();

G2AlgebraElement bracket(const G2AlgebraElement& a, const G2AlgebraElement& b);

/// max over basis triples of |phi(ax,y,z) + phi(x,ay,z) + phi(x,y,az)|.
double phi_preservation_residual(const Mat7& a);

Mat7 expm7(const Mat7& a);

/// Orthonormal frame of R^7 lying in the G2 orbit of the standard frame;
/// columns of e are the frame vectors e_1..e_7.
struct G2Frame {
  Mat7 e = Mat7::Identity();

  Vec7 vec(int i) const { return e.col(i - 1); }  // 1-based
  double orthonormality_residual() const;
  double adaptation_residual() const;  // max |phi(e_i,e_j,e_k) - phi(eps_i,eps_j,eps_k)|
  static G2Frame from_matrix(const Mat7& m, double tol = 1e-8);
};

G2Frame exp_frame(const G2AlgebraElement& a, double t, const G2Frame& base);

/// Re-orthonormalizes and reports how far the input drifted; opt-in repair
/// for long exponential chains.
G2Frame repair_frame(const G2Frame& f, Report* report = nullptr);

/// Discretized map from a 1d or 2d parameter grid into G2.  Frames are stored
/// node-major (index = i * shape[1] + j).  The optional mc field carries
/// analytic Maurer-Cartan matrices per node and direction; when absent,
/// derivatives use central finite differences of the stored frames.
struct CurveLift {
  int dim = 1;
  std::array<int, 2> shape = {0, 1};
  std::array<double, 2> step = {0.0, 0.0};
  int fd_order = 2;
  std::array<double, 2> origin = {0.0, 0.0};
  std::vector<Mat7> frames;
  std::vector<std::array<Mat7, 2>> mc;  // empty unless analytic derivatives exist
  std::vector<uint8_t> excluded;        // parametrization-degenerate nodes (frames stay valid)

  int node(int i, int j = 0) const { return i * shape[1] + j; }
  const Mat7& frame(int i, int j = 0) const { return frames[node(i, j)]; }
  bool is_excluded(int i, int j = 0) const {
    return !excluded.empty() && excluded[node(i, j)] != 0;
  }
  bool interior(int i, int j = 0) const;
  bool has_analytic_mc() const { return !mc.empty(); }
  long node_count() const { return static_cast<long>(frames.size()); }
  void validate(double tol = 1e-8) const;
};

/// Maurer-Cartan matrix per parameter direction at an interior node:
/// entry (a,b) is omega_ab(d/ds) = <e_a, d e_b / ds>.  Skew-symmetrized.
std::array<Mat7, 2> maurer_cartan(const CurveLift& lift, int i, int j = 0);

/// Raw frame derivative per direction (central differences or analytic).
std::array<Mat7, 2> frame_derivative(const CurveLift& lift, int i, int j = 0);

}  // namespace calib7

#endif
