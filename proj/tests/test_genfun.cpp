#include <doctest.h>

#include <cmath>
#include <random>

#include "hamiter/corpus.hpp"
#include "hamiter/genfun.hpp"

using namespace hamiter;

namespace {

Vec v2(double x, double y) {
  Vec z(2);
  z << x, y;
  return z;
}

Mat shear_matrix() {
  Mat m(2, 2);
  m << 1, 1, 0, 1;
  return m;
}

GFOptions gate(double g) {
  GFOptions o;
  o.c1_gate = g;
  return o;
}

}  // namespace

TEST_SUITE("genfun") {
  TEST_CASE("scalar field lattice") {
    const auto f = ScalarField::sample(Box::cube(2, 1.0), {5, 9}, [](const Vec& z) { return 2 * z[0] - z[1] + z[0] * z[1]; });
    for (long i = 0; i < f.size(); ++i) CHECK(f.index(f.coords(i)) == i);
    CHECK(f.node_at(Vec::Zero(2)) >= 0);
    CHECK(f.node_at(v2(0.1, 0.0)) == -1);
    // multilinear interpolation is exact for bilinear functions
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) {
      const Vec z = v2(u(rng), u(rng));
      CHECK(f(z) == doctest::Approx(2 * z[0] - z[1] + z[0] * z[1]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ScalarField(Box::cube(2, 1.0), {1, 5}), Error);
  }

  TEST_CASE("psi examples") {
    const Box box = Box::cube(2, 0.5);
    const auto id = psi(linear_map(Mat::Identity(2, 2), box), 1);
    CHECK((id(v2(0.3, -0.1)) - v2(0.3, -0.1)).norm() < 1e-15);
    const auto sh = psi(linear_map(shear_matrix(), box), 1);
    for (const Vec& z : {v2(0.2, 0.1), v2(-0.3, 0.25)}) CHECK((sh(z) - v2(z[0] + z[1], z[1])).norm() < 1e-15);
    const auto q = germ_map(make_germ("quartic-max"), 1);
    for (int k = 1; k <= 3; ++k) CHECK(psi(q, k)(Vec::Zero(2)).norm() < 1e-14);
  }

  TEST_CASE("psi invertibility") {
    const auto q = germ_map(make_germ("quartic-min"), 1);
    const auto inv = psi_invertibility(q, 2, Box::cube(2, 0.1));
    CHECK(inv.invertible);
    CHECK(inv.max_deviation < 0.1);
    try {
      psi_invertibility(germ_map(make_germ("negative-hyperbolic"), 1), 1, Box::cube(2, 0.05));
      FAIL("non-contracting psi accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotInvertibleOnBox);
    }
  }

  TEST_CASE("identity has zero generating function") {
    const auto gf = generating_function(linear_map(Mat::Identity(2, 2), Box::cube(2, 0.5)), 1, Box::cube(2, 0.1), {17, 17});
    for (double v : gf.f.values()) CHECK(v == 0.0);
    const auto rep = gf_property_report(gf);
    CHECK(rep.sets_match);
    CHECK(rep.critical_nodes == rep.fixed_nodes);
  }

  TEST_CASE("shear reproduces y^2/2") {
    // (y, 0) = X_F(x + y, y) with X_F = (F_y, −F_x) forces F_x = 0, F_y = y.
    const auto phi = germ_map(make_germ("shear"), 1);
    const auto gf = generating_function(phi, 1, Box::cube(2, 0.1), {257, 257}, gate(1.5));
    double worst = 0.0;
    for (long i = 0; i < gf.f.size(); ++i) {
      const Vec z = gf.f.node(i);
      worst = std::max(worst, std::abs(gf.f[i] - 0.5 * z[1] * z[1]));
    }
    CHECK(worst <= 1e-6);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (int i = 0; i < 200; ++i) {
      const Vec z = v2(u(rng), u(rng));
      CHECK(std::abs(gf.f(z) - 0.5 * z[1] * z[1]) <= 1e-6);
    }
    const auto rep = gf_property_report(generating_function(phi, 1, Box::cube(2, 0.1), {33, 33}, gate(1.5)));
    CHECK(rep.sets_match);
    CHECK(rep.critical_nodes == 31);  // interior nodes of the line y = 0
  }

  TEST_CASE("C1 gate") {
    try {
      generating_function(germ_map(make_germ("rotation"), 1), 1, Box::cube(2, 0.1), {17, 17});
      FAIL("rotation accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotC1Small);
    }
  }

  TEST_CASE("quartic minimum has a strict minimum") {
    const auto gf = generating_function(germ_map(make_germ("quartic-min"), 1), 1, Box::cube(2, 0.2), {41, 41});
    CHECK(gf.f(Vec::Zero(2)) == 0.0);
    for (int i = 0; i < 64; ++i) {
      const double t = 2 * M_PI * i / 64;
      const Vec z = 0.15 * v2(std::cos(t), std::sin(t));
      CHECK(gf.f(z) > 0.0);
    }
    const auto rep = gf_property_report(gf);
    CHECK(rep.critical_nodes == 1);
    CHECK(rep.sets_match);
  }

  TEST_CASE("reconstruction and closedness improve under refinement") {
    const auto phi = germ_map(make_germ("quartic-max"), 1);
    double prev_res = 1e300, prev_def = 1e300;
    for (int res : {17, 33, 65}) {
      const auto gf = generating_function(phi, 1, Box::cube(2, 0.1), {res, res});
      CAPTURE(res);
      CHECK(gf.reconstruction_residual < prev_res);
      CHECK(gf.closedness_defect <= prev_def);
      CHECK(gf.path_discrepancy < 1e-6);
      prev_res = gf.reconstruction_residual;
      prev_def = gf.closedness_defect;
    }
    CHECK(prev_def < 1e-8);
  }

  TEST_CASE("C2 norm is controlled by the C1 distance") {
    GFPropertyReport rep;
    gf_ratio_sequence(germ_map(make_germ("quartic-max"), 1), 1, {0.2, 0.1, 0.05, 0.025, 0.0125}, 33, rep);
    CHECK(rep.c2_over_c1.size() == 5);
    CHECK(rep.ratio_bounded);
  }

  TEST_CASE("iterated displacement stays close to k times the displacement") {
    const auto phi = germ_map(make_germ("quartic-max"), 1);
    double first = 0.0;
    for (double r : {0.2, 0.1, 0.05}) {
      const auto b = iteration_bound(phi, 3, Box::cube(2, r));
      if (first == 0.0) first = b.constant;
      CHECK(std::isfinite(b.constant));
      CHECK(b.constant <= 4 * first + 1e-12);
    }
  }

  TEST_CASE("homotopy isolation scan") {
    const auto q = germ_map(make_germ("quartic-max"), 1);
    const Box box = Box::cube(2, 0.2);
    const std::vector<int> res{41, 41};
    const auto f = generating_function(q, 1, box, res, gate(1.0)).f;
    const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
    for (int k = 2; k <= 5; ++k) {
      CAPTURE(k);
      const auto fk = generating_function(q, k, box, res, gate(1.0)).f;
      CHECK(homotopy_isolation_scan(f, fk, k, ts, {0.05, 0.2}).isolated);
    }
    // with F_k = kF the scan reduces to isolation of F
    ScalarField kf = f;
    for (auto& v : kf.values()) v *= 3;
    CHECK(homotopy_isolation_scan(f, kf, 3, ts, {0.05, 0.2}).isolated);
    const auto s = germ_map(make_germ("shear"), 1);
    const auto fs = generating_function(s, 1, Box::cube(2, 0.1), {33, 33}, gate(1.5)).f;
    const auto fs2 = generating_function(s, 2, Box::cube(2, 0.1), {33, 33}, gate(2.5)).f;
    const auto scan = homotopy_isolation_scan(fs, fs2, 2, ts, {0.02, 0.1});
    CHECK_FALSE(scan.isolated);
  }

  TEST_CASE("conjugation brings a shear close to the identity") {
    const Mat c = near_identity_conjugator(shear_matrix(), 0.2);
    const Mat m = c.inverse() * shear_matrix() * c;
    CHECK(symplectic_defect(c) < 1e-12);
    CHECK((m - Mat::Identity(2, 2)).norm() <= 0.2 + 1e-12);
    const auto phi = conjugate(linear_map(shear_matrix(), Box::cube(2, 1.0)), c);
    CHECK((phi.jacobian(Vec::Zero(2)) - m).norm() < 1e-12);
  }

  TEST_CASE("powers of germ maps") {
    const auto phi = germ_map(make_germ("double-well"), 1);
    const auto p3 = power(phi, 3);
    const auto direct = germ_map(make_germ("double-well"), 3);
    const Vec z = v2(0.05, -0.04);
    CHECK((p3(z) - direct(z)).norm() < 1e-9);
    CHECK((p3.jacobian(z) - direct.jacobian(z)).norm() < 1e-8);
  }
}
