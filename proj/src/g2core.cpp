#include "calib7/g2core.hpp"

#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace calib7 {

namespace {

// 1-based entry access
inline double m_(const Mat7& m, int a, int b) { return m(a - 1, b - 1); }

struct Relation {
  // sum of coeff * m(a,b) over terms == 0
  struct Term {
    int a, b;
    double c;
  };
  std::vector<Term> terms;
  const char* name;
};

const std::vector<Relation>& relations() {
  static const std::vector<Relation> rel = {
      {{{6, 7, 1}, {1, 2, -1}, {3, 4, -1}}, "m67 - m12 - m34"},
      {{{7, 5, 1}, {1, 3, -1}, {4, 2, -1}}, "m75 - m13 - m42"},
      {{{5, 6, 1}, {1, 4, -1}, {2, 3, -1}}, "m56 - m14 - m23"},
      {{{5, 1, 1}, {6, 4, 1}, {7, 3, -1}}, "m51 + m64 - m73"},
      {{{5, 2, 1}, {6, 3, 1}, {7, 4, 1}}, "m52 + m63 + m74"},
      {{{5, 3, 1}, {6, 2, -1}, {7, 1, 1}}, "m53 - m62 + m71"},
      {{{5, 4, 1}, {6, 1, -1}, {7, 2, -1}}, "m54 - m61 - m72"},
  };
  return rel;
}

double relation_value(const Mat7& m, const Relation& r) {
  double v = 0.0;
  for (const auto& t : r.terms) v += t.c * m_(m, t.a, t.b);
  return v;
}

// quaternion product, components (1, i, j, k)
Eigen::Vector4d qmul(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
  return {p(0) * q(0) - p(1) * q(1) - p(2) * q(2) - p(3) * q(3),
          p(0) * q(1) + p(1) * q(0) + p(2) * q(3) - p(3) * q(2),
          p(0) * q(2) - p(1) * q(3) + p(2) * q(0) + p(3) * q(1),
          p(0) * q(3) + p(1) * q(2) - p(2) * q(1) + p(3) * q(0)};
}

}  // namespace

double g2_relation_residual(const Mat7& m) {
  double worst = (m + m.transpose()).cwiseAbs().maxCoeff();
  for (const auto& r : relations()) worst = std::max(worst, std::abs(relation_value(m, r)));
  return worst;
}

int worst_g2_relation(const Mat7& m) {
  double worst = (m + m.transpose()).cwiseAbs().maxCoeff();
  int which = 0;
  for (size_t i = 0; i < relations().size(); ++i) {
    double v = std::abs(relation_value(m, relations()[i]));
    if (v > worst) {
      worst = v;
      which = static_cast<int>(i) + 1;
    }
  }
  return which;
}

Eigen::Vector4d beta_relation(const Mat34& beta) {
  const Eigen::Vector4d qi(0, 1, 0, 0), qj(0, 0, 1, 0), qk(0, 0, 0, 1);
  Eigen::Vector4d b5 = beta.row(0), b6 = beta.row(1), b7 = beta.row(2);
  return qmul(qi, b5) + qmul(qj, b6) + qmul(qk, b7);
}

Mat3 sigma_plus(const Mat4& theta) {
  // 2-forms on T as skew 4x4 matrices A with form(x,y) = x^T A y; the
  // rotation generator theta acts by A -> -theta^T A - A theta.
  auto two_form = [](int i, int j) {
    Mat4 a = Mat4::Zero();
    a(i - 1, j - 1) = 1.0;
    a(j - 1, i - 1) = -1.0;
    return a;
  };
  const Mat4 basis[3] = {two_form(1, 2) + two_form(3, 4), two_form(1, 3) + two_form(4, 2),
                         two_form(1, 4) + two_form(2, 3)};
  Mat3 s;
  for (int col = 0; col < 3; ++col) {
    Mat4 acted = -theta.transpose() * basis[col] - basis[col] * theta;
    for (int row = 0; row < 3; ++row)
      s(row, col) = 0.25 * (acted.cwiseProduct(basis[row])).sum();  // |basis|^2_F = 4
  }
  return s;
}

Mat3 sigma_minus(const Mat4& theta) {
  auto two_form = [](int i, int j) {
    Mat4 a = Mat4::Zero();
    a(i - 1, j - 1) = 1.0;
    a(j - 1, i - 1) = -1.0;
    return a;
  };
  const Mat4 basis[3] = {two_form(1, 2) - two_form(3, 4), two_form(1, 3) - two_form(4, 2),
                         two_form(1, 4) - two_form(2, 3)};
  Mat3 s;
  for (int col = 0; col < 3; ++col) {
    Mat4 acted = -theta.transpose() * basis[col] - basis[col] * theta;
    for (int row = 0; row < 3; ++row)
      s(row, col) = 0.25 * (acted.cwiseProduct(basis[row])).sum();
  }
  return s;
}

G2AlgebraElement embed(const Mat4& theta, const Mat34& beta) {
  if ((theta + theta.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("embed: theta must be skew");
  Eigen::Vector4d rel = beta_relation(beta);
  if (rel.cwiseAbs().maxCoeff() > 1e-12) {
    const char* comp[4] = {"1", "i", "j", "k"};
    int worst = 0;
    rel.cwiseAbs().maxCoeff(&worst);
    throw std::invalid_argument(std::string("embed: quaternionic relation violated in the ") +
                                comp[worst] + " component");
  }
  G2AlgebraElement g;
  g.theta = theta;
  g.beta = beta;
  g.matrix7.setZero();
  g.matrix7.topLeftCorner<4, 4>() = theta;
  g.matrix7.bottomLeftCorner<3, 4>() = beta;
  g.matrix7.topRightCorner<4, 3>() = -beta.transpose();
  g.matrix7.bottomRightCorner<3, 3>() = sigma_plus(theta);
  double res = g2_relation_residual(g.matrix7);
  if (res > 1e-10)
    throw std::logic_error("embed: assembled matrix violates the g2 relations");
  return g;
}

G2AlgebraElement G2AlgebraElement::from_matrix(const Mat7& m, double tol) {
  if (g2_relation_residual(m) > tol) {
    int w = worst_g2_relation(m);
    throw std::invalid_argument(
        "matrix is not in g2; violated " +
        std::string(w == 0 ? "skewness" : relations()[w - 1].name));
  }
  G2AlgebraElement g;
  g.matrix7 = m;
  g.theta = m.topLeftCorner<4, 4>();
  g.beta = m.bottomLeftCorner<3, 4>();
  return g;
}

const std::vector<G2AlgebraElement>& g2_basis() {
  static const std::vector<G2AlgebraElement> basis = [] {
    std::vector<G2AlgebraElement> out;
    // Block-diagonal part: solution space of the first three relations over
    // the six so(T) parameters; one element per theta basis generator.
    for (auto [i, j] : {std::pair{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}) {
      Mat4 theta = Mat4::Zero();
      theta(i - 1, j - 1) = 1.0;
      theta(j - 1, i - 1) = -1.0;
      G2AlgebraElement g = embed(theta, Mat34::Zero());
      g.matrix7 /= g.matrix7.norm();
      g.theta = g.matrix7.topLeftCorner<4, 4>();
      out.push_back(g);
    }
    // Off-diagonal part: beta = (b5, b6, b7) with b5 = k*b6 - j*b7 solving
    // the quaternionic relation; (b6, b7) are free, 8 generators.
    const Eigen::Vector4d qj(0, 0, 1, 0), qk(0, 0, 0, 1);
    for (int which = 0; which < 2; ++which) {
      for (int comp = 0; comp < 4; ++comp) {
        Eigen::Vector4d b6 = Eigen::Vector4d::Zero(), b7 = Eigen::Vector4d::Zero();
        (which == 0 ? b6 : b7)(comp) = 1.0;
        Eigen::Vector4d b5 = qmul(qk, b6) - qmul(qj, b7);
        Mat34 beta;
        beta.row(0) = b5;
        beta.row(1) = b6;
        beta.row(2) = b7;
        G2AlgebraElement g = embed(Mat4::Zero(), beta);
        g.matrix7 /= g.matrix7.norm();
        g.beta = g.matrix7.bottomLeftCorner<3, 4>();
        out.push_back(g);
      }
    }
    return out;
  }();
  return basis;
}

G2AlgebraElement bracket(const G2AlgebraElement& a, const G2AlgebraElement& b) {
  Mat7 c = a.matrix7 * b.matrix7 - b.matrix7 * a.matrix7;
  double res = g2_relation_residual(c);
  double scale = std::max(1.0, c.norm());
  if (res > 1e-12 * scale)
    throw std::logic_error("bracket closed outside g2 (inputs were not both in g2?)");
  return G2AlgebraElement::from_matrix(c, 1e-10 * scale);
}

double phi_preservation_residual(const Mat7& a) {
  double worst = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j)
      for (int k = j + 1; k < 7; ++k) {
        double v = phi_eval(a.col(i), Vec7::Unit(j), Vec7::Unit(k)) +
                   phi_eval(Vec7::Unit(i), a.col(j), Vec7::Unit(k)) +
                   phi_eval(Vec7::Unit(i), Vec7::Unit(j), a.col(k));
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

Mat7 expm7(const Mat7& a) { return a.exp(); }

double G2Frame::orthonormality_residual() const {
  return (e.transpose() * e - Mat7::Identity()).cwiseAbs().maxCoeff();
}

double G2Frame::adaptation_residual() const {
  double worst = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j)
      for (int k = j + 1; k < 7; ++k) {
        double ref = phi_eval(Vec7::Unit(i), Vec7::Unit(j), Vec7::Unit(k));
        double val = phi_eval(e.col(i), e.col(j), e.col(k));
        worst = std::max(worst, std::abs(val - ref));
      }
  return worst;
}

G2Frame G2Frame::from_matrix(const Mat7& m, double tol) {
  G2Frame f;
  f.e = m;
  if (f.orthonormality_residual() > tol)
    throw std::invalid_argument("frame is not orthonormal");
  if (f.adaptation_residual() > tol)
    throw std::invalid_argument("frame is orthonormal but not phi-adapted");
  return f;
}

G2Frame exp_frame(const G2AlgebraElement& a, double t, const G2Frame& base) {
  G2Frame out;
  out.e = base.e * expm7(t * a.matrix7);
  if (out.orthonormality_residual() > 1e-10 || out.adaptation_residual() > 1e-9)
    throw std::logic_error("exp_frame left the G2 orbit (generator outside g2?)");
  return out;
}

G2Frame repair_frame(const G2Frame& f, Report* report) {
  Eigen::JacobiSVD<Mat7> svd(f.e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  G2Frame out;
  out.e = svd.matrixU() * svd.matrixV().transpose();
  double drift = (out.e - f.e).cwiseAbs().maxCoeff();

  // local Gauss-Newton over SO(7): F <- F exp(xi) minimizing the
  // phi-adaptation residual of the 35 frame triples
  for (int iter = 0; iter < 4 && out.adaptation_residual() > 1e-14; ++iter) {
    Eigen::VectorXd res(35);
    Eigen::MatrixXd jac(35, 21);
    int row = 0;
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        for (int k = j + 1; k < 7; ++k, ++row) {
          res(row) = phi_eval(out.e.col(i), out.e.col(j), out.e.col(k)) -
                     phi_eval(Vec7::Unit(i), Vec7::Unit(j), Vec7::Unit(k));
          int col = 0;
          for (int a = 0; a < 7; ++a)
            for (int b = a + 1; b < 7; ++b, ++col) {
              // generator E_ab - E_ba moves column c by delta_{bc} e_a - delta_{ac} e_b
              auto dcol = [&](int c) -> Vec7 {
                if (c == b) return Vec7(out.e.col(a));
                if (c == a) return Vec7(-out.e.col(b));
                return Vec7(Vec7::Zero());
              };
              jac(row, col) = phi_eval(dcol(i), out.e.col(j), out.e.col(k)) +
                              phi_eval(out.e.col(i), dcol(j), out.e.col(k)) +
                              phi_eval(out.e.col(i), out.e.col(j), dcol(k));
            }
        }
    // minimal-norm solve: the 14 g2 directions are exact null directions
    Eigen::JacobiSVD<Eigen::MatrixXd> lsq(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    lsq.setThreshold(1e-6);
    Eigen::VectorXd xi = lsq.solve(-res);
    Mat7 gen = Mat7::Zero();
    int col = 0;
    for (int a = 0; a < 7; ++a)
      for (int b = a + 1; b < 7; ++b, ++col) {
        gen(a, b) = xi(col);
        gen(b, a) = -xi(col);
      }
    out.e = out.e * expm7(gen);
  }
  if (report) {
    report->check = "repair_frame";
    report->set("orthonormality_drift", drift);
    report->set("adaptation_residual_after", out.adaptation_residual());
    report->pass = out.adaptation_residual() < 1e-8 && out.orthonormality_residual() < 1e-10;
  }
  return out;
}

bool CurveLift::interior(int i, int j) const {
  int margin = fd_order == 4 ? 2 : 1;
  bool ok = i >= margin && i < shape[0] - margin;
  if (dim == 2) ok = ok && j >= margin && j < shape[1] - margin;
  return ok;
}

void CurveLift::validate(double tol) const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("lift dim must be 1 or 2");
  if (fd_order != 2 && fd_order != 4) throw std::invalid_argument("fd_order must be 2 or 4");
  long expected = static_cast<long>(shape[0]) * shape[1];
  if (expected != node_count()) throw std::invalid_argument("lift frame count does not match shape");
  for (int d = 0; d < dim; ++d)
    if (!(step[d] > 0)) throw std::invalid_argument("lift step must be positive");
  for (const auto& m : frames) {
    G2Frame f;
    f.e = m;
    if (f.orthonormality_residual() > tol || f.adaptation_residual() > tol)
      throw std::invalid_argument("lift frame violates G2 frame invariants");
  }
  if (!mc.empty() && mc.size() != frames.size())
    throw std::invalid_argument("analytic mc count does not match frame count");
}

std::array<Mat7, 2> frame_derivative(const CurveLift& lift, int i, int j) {
  std::array<Mat7, 2> d = {Mat7::Zero(), Mat7::Zero()};
  if (lift.has_analytic_mc()) {
    const Mat7& g = lift.frame(i, j);
    for (int dir = 0; dir < lift.dim; ++dir) d[dir] = g * lift.mc[lift.node(i, j)][dir];
    return d;
  }
  if (!lift.interior(i, j))
    throw std::invalid_argument("frame_derivative requires an interior node");
  auto at = [&](int a, int b) -> const Mat7& { return lift.frame(a, b); };
  for (int dir = 0; dir < lift.dim; ++dir) {
    int di = dir == 0 ? 1 : 0, dj = dir == 1 ? 1 : 0;
    double h = lift.step[dir];
    if (lift.fd_order == 2) {
      d[dir] = (at(i + di, j + dj) - at(i - di, j - dj)) / (2.0 * h);
    } else {
      d[dir] = (-at(i + 2 * di, j + 2 * dj) + 8.0 * at(i + di, j + dj) -
                8.0 * at(i - di, j - dj) + at(i - 2 * di, j - 2 * dj)) /
               (12.0 * h);
    }
  }
  return d;
}

std::array<Mat7, 2> maurer_cartan(const CurveLift& lift, int i, int j) {
  if (lift.has_analytic_mc()) return lift.mc[lift.node(i, j)];
  auto d = frame_derivative(lift, i, j);
  const Mat7& g = lift.frame(i, j);
  std::array<Mat7, 2> omega = {Mat7::Zero(), Mat7::Zero()};
  for (int dir = 0; dir < lift.dim; ++dir) omega[dir] = skew_part(g.transpose() * d[dir]);
  return omega;
}

}  // namespace calib7
