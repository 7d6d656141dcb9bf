#ifndef CALIB7_LINALG_HPP
#define CALIB7_LINALG_HPP

#include <Eigen/Dense>
#include <complex>

namespace calib7 {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat4 = Eigen::Matrix4d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat74 = Eigen::Matrix<double, 7, 4>;

using Cplx = std::complex<double>;
using CVec2 = Eigen::Vector2cd;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using CMat2 = Eigen::Matrix2cd;
using CVec7 = Eigen::Matrix<Cplx, 7, 1>;
using CMat73 = Eigen::Matrix<Cplx, 7, 3>;

inline Mat7 skew_part(const Mat7& m) { return 0.5 * (m - m.transpose()); }

// Thin QR with positive diagonal of R, so Q keeps the orientation of the
// input columns.  Returns Q (n x k) and the smallest |R_ii|.
template <int N, int K>
inline double oriented_qr(const Eigen::Matrix<double, N, K>& a,
                          Eigen::Matrix<double, N, K>& q) {
  Eigen::HouseholderQR<Eigen::Matrix<double, N, K>> qr(a);
  Eigen::Matrix<double, N, K> thin = Eigen::Matrix<double, N, K>::Identity();
  q = qr.householderQ() * thin;
  Eigen::Matrix<double, K, K> r =
      qr.matrixQR().template topLeftCorner<K, K>().template triangularView<Eigen::Upper>();
  double smallest = std::abs(r(0, 0));
  for (int i = 0; i < K; ++i) {
    smallest = std::min(smallest, std::abs(r(i, i)));
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return smallest;
}

}  // namespace calib7

#endif
