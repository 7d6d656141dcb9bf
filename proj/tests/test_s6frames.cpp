#include <doctest.h>

#include "calib7/families.hpp"
#include "calib7/s6frames.hpp"
#include "test_helpers.hpp"

using namespace calib7;
using calib7::testing::random_g2;

namespace {
const Cplx I(0.0, 1.0);
}

TEST_CASE("su3 frame from the standard basis") {
  SU3Frame f = su3_from_g2(G2Frame{});
  CHECK((f.u - Vec7::Unit(4)).norm() == 0.0);
  CHECK(f.f(0, 1) == Cplx(-0.5, 0.0));   // f2 = (-e1 - i e2)/2
  CHECK(f.f(1, 1) == Cplx(0.0, -0.5));
  CHECK(f.f(6, 0) == Cplx(0.5, 0.0));    // f1 = (e7 + i e6)/2
  CHECK(f.f(2, 2) == Cplx(0.0, 0.5));    // f3 = (-e4 + i e3)/2
}

TEST_CASE("su3 round trip and unitary relations") {
  CounterRng rng(101, 0);
  for (int trial = 0; trial < 10; ++trial) {
    G2Frame g;
    g.e = calib7::testing::random_g2_group(rng);
    SU3Frame f = su3_from_g2(g);
    G2Frame back = su3_to_g2(f);
    CHECK((back.e - g.e).cwiseAbs().maxCoeff() < 1e-14);
    // sqrt(2) f is unitary against the hermitian pairing and orthogonal to u
    CMat73 two_f = 2.0 * f.f;
    CMat3 gram = two_f.adjoint() * two_f;
    CHECK((gram - 2.0 * CMat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((two_f.adjoint() * f.u.cast<Cplx>()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("su3 forms on g2 elements: shape and dictionary lines") {
  CounterRng rng(103, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Mat7 v = random_g2(rng);
    SU3Forms f = su3_forms(v);
    CHECK((f.kappa + f.kappa.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(f.kappa.trace()) < 1e-13);
    // diagonal entries against the matrix entries
    CHECK(std::abs(f.kappa(0, 0) - (-I * v(5, 6))) < 1e-13);
    CHECK(std::abs(f.kappa(1, 1) - (I * v(0, 1))) < 1e-13);
    CHECK(std::abs(f.kappa(2, 2) - (I * v(2, 3))) < 1e-13);
    // theta_2 carries the fiber forms w51, w52
    CHECK(std::abs(2.0 * f.theta(1) - Cplx(v(4, 1), v(4, 0))) < 1e-13);
  }
}

TEST_CASE("su3_coframe: constant and rotating lifts") {
  CurveLift constant;
  constant.dim = 2;
  constant.shape = {5, 5};
  constant.step = {0.1, 0.1};
  constant.frames.assign(25, Mat7::Identity());
  auto cf = su3_coframe(constant, 2, 2);
  CHECK(cf.theta[0].norm() == 0.0);
  CHECK(cf.kappa[0].norm() == 0.0);

  // u rotating in the (e5, e6)-plane at unit speed: |theta_1| = 1/2 along the
  // motion direction, theta_2 = theta_3 = 0
  CurveLift rot = exp_lift_2d(round_s2_generator_beta(), round_s2_generator_alpha(),
                              {7, 7}, {0.05, 0.05}, {0.2, 0.4});
  auto cfr = su3_coframe(rot, 3, 3);
  CHECK(std::abs(std::abs(cfr.theta[0](0)) - 0.5) < 1e-10);
  CHECK(std::abs(cfr.theta[0](1)) < 1e-12);
  CHECK(std::abs(cfr.theta[0](2)) < 1e-12);
  CHECK(cfr.reconstruction_residual < 1e-10);

  // FD route: kappa stays anti-Hermitian and trace free at FD tolerance
  CounterRng rng(107, 0);
  Mat7 a = random_g2(rng), b = random_g2(rng);
  CurveLift lift = exp_lift_2d(a, b, {7, 7}, {1e-3, 1e-3}, {0.3, 0.2});
  lift.mc.clear();
  auto cfd = su3_coframe(lift, 3, 3);
  CHECK(cfd.kappa_shape_residual < 1e-5);
  CHECK(cfd.reconstruction_residual < 1e-5);
}

TEST_CASE("holomorphicity residual separates holomorphic from generic lifts") {
  CurveLift s2 = round_s2_frame_field({9, 9}, {0.35, 0.22});
  Report good = holomorphicity_residual(s2);
  CHECK(good.pass);
  CHECK(good.get("minor_max") < 1e-10);

  // generic lift: u moves but not holomorphically
  CounterRng rng(109, 4);
  Mat7 a = random_g2(rng), b = random_g2(rng);
  CurveLift generic = exp_lift_2d(a, b, {7, 7}, {0.08, 0.08}, {0.2, 0.3});
  Report bad = holomorphicity_residual(generic);
  CHECK(!bad.pass);
  CHECK(bad.get("minor_max") > 0.05);

  // constant-u lift: all theta vanish, degenerate flag rather than a pass
  CurveLift fiber = fiber_curve(Vec7::Unit(4), degree_one_family(), {6, 6}, {0.1, 0.1});
  Report deg = holomorphicity_residual(fiber);
  CHECK(!deg.pass);
  CHECK(deg.stats["degenerate_nodes"].get<long>() > 0);
}

TEST_CASE("su3 gauge matrix lands in G2 and acts by S^H on theta") {
  CounterRng rng(113, 0);
  // random special unitary via complex Gram-Schmidt
  CMat3 s;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) s(r, c) = Cplx(rng.next_gaussian(), rng.next_gaussian());
  Eigen::HouseholderQR<CMat3> qr(s);
  CMat3 u = qr.householderQ();
  u.col(2) /= u.determinant();
  Mat7 h = su3_gauge_matrix(u);
  G2Frame hf;
  hf.e = h;
  CHECK(hf.orthonormality_residual() < 1e-12);
  CHECK(hf.adaptation_residual() < 1e-12);
  CHECK((h.col(4) - Vec7::Unit(4)).norm() < 1e-14);

  Mat7 v = random_g2(rng);
  SU3Forms before = su3_forms(v);
  SU3Forms after = su3_forms(h.transpose() * v * h);
  CHECK((after.theta - u.adjoint() * before.theta).norm() < 1e-12);
  CHECK((after.kappa - u.adjoint() * before.kappa * u).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adapt_holomorphic fixes the gauge and is idempotent") {
  CurveLift s2 = round_s2_frame_field({9, 9}, {0.3, 0.2});
  s2.mc.clear();  // exercise the FD route used for generic inputs

  AdaptResult first = adapt_holomorphic(s2);
  CHECK(first.report.pass);
  CHECK(first.round_s2_flag);  // the normal-1 column entry vanishes identically
  // u unchanged pointwise
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      CHECK((first.lift.frame(i, j).col(4) - s2.frame(i, j).col(4)).norm() < 1e-12);

  AdaptResult second = adapt_holomorphic(first.lift);
  double drift = 0.0;
  for (size_t n = 0; n < second.lift.frames.size(); ++n)
    drift = std::max(drift,
                     (second.lift.frames[n] - first.lift.frames[n]).cwiseAbs().maxCoeff());
  CHECK(drift < 1e-8);

  // scrambling by a smooth SU(3) stabilizer field is undone
  CurveLift scrambled = s2;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      double t1 = 0.21 * i - 0.13 * j, t2 = 0.07 * i + 0.23 * j;
      double c = std::cos(0.2 * t1), sn = std::sin(0.2 * t1);
      CMat3 su = CMat3::Zero();
      su(0, 0) = std::exp(I * t1);
      su(1, 1) = c * std::exp(I * t2);
      su(1, 2) = -sn * std::exp(-I * t2);
      su(2, 1) = sn * std::exp(I * t2);
      su(2, 2) = c * std::exp(-I * t2);
      su.col(2) /= su.determinant();
      scrambled.frames[scrambled.node(i, j)] =
          scrambled.frames[scrambled.node(i, j)] * su3_gauge_matrix(su);
    }
  scrambled.mc.clear();
  AdaptResult recovered = adapt_holomorphic(scrambled);
  CHECK(recovered.report.pass);
  CHECK(recovered.report.get("gauge_max") < 1e-4);

  // fiber input: u constant, precondition fails
  CurveLift fiber = fiber_curve(Vec7::Unit(4), degree_one_family(), {6, 6}, {0.1, 0.1});
  CHECK_THROWS_AS(adapt_holomorphic(fiber), std::invalid_argument);
}

TEST_CASE("torsion ratios on the adapted round-sphere lift") {
  CurveLift s2 = round_s2_frame_field({9, 9}, {0.3, 0.2});
  TorsionResult t = torsion(s2, 4, 4);
  CHECK(std::abs(t.H1) < 1e-10);  // the kappa_31 = 0 branch
  CHECK(std::abs(t.H2) < 1e-10);  // null torsion
  CHECK(t.fit_residual < 1e-8);

  CurveLift constant;
  constant.dim = 2;
  constant.shape = {5, 5};
  constant.step = {0.1, 0.1};
  constant.frames.assign(25, Mat7::Identity());
  CHECK_THROWS_AS(torsion(constant, 2, 2), std::domain_error);
}

TEST_CASE("structure equation closure on random 2d lifts") {
  CounterRng rng(127, 0);
  for (int trial = 0; trial < 3; ++trial) {
    Mat7 a = random_g2(rng), b = random_g2(rng);
    CurveLift lift = exp_lift_2d(a, b, {9, 9}, {1e-3, 1e-3}, {0.25, 0.15});
    lift.mc.clear();
    Report rep = su3_structure_closure(lift);
    CHECK(rep.pass);
    CHECK(rep.get("closure_max") < 1e-4);
  }
}

TEST_CASE("f sign flip convention") {
  CounterRng rng(131, 0);
  Mat7 v = random_g2(rng);
  SU3Forms f = su3_forms(v);
  SU3Forms flipped = flip_f_sign(f);
  CHECK((flipped.theta + f.theta).norm() == 0.0);
  CHECK((flipped.kappa - f.kappa).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adapt supports the swapped normal convention") {
  CurveLift s2 = round_s2_frame_field({8, 8}, {0.3, 0.22});
  s2.mc.clear();
  AdaptResult swapped = adapt_holomorphic(s2, NormalConvention::f3_spans_n2);
  CHECK(swapped.report.pass);
  CHECK(swapped.report.get("gauge_max") < 1e-4);
}
