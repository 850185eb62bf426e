#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hamiter/symplin.hpp"

using namespace hamiter;
using std::numbers::pi;

namespace {

Mat diag(std::initializer_list<double> d) {
  Vec v(static_cast<long>(d.size()));
  long i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

Mat block(const Mat& a, const Mat& b) { return direct_sum(a, b); }

Mat shear() {
  Mat m(2, 2);
  m << 1, 1, 0, 1;
  return m;
}

// Count pairs of negative real eigenvalues directly from an eigensolve.
int negative_pairs_direct(const Mat& m) {
  Eigen::EigenSolver<Mat> es(m);
  int neg = 0;
  for (long i = 0; i < m.rows(); ++i) {
    auto l = es.eigenvalues()[i];
    if (std::abs(l.imag()) < 1e-9 && l.real() < 0) ++neg;
  }
  return neg / 2;
}

}  // namespace

TEST_SUITE("symplin") {
  TEST_CASE("validation") {
    CHECK_NOTHROW(SymplecticMatrix::validate(rotation2(0.7)));
    CHECK_NOTHROW(SymplecticMatrix::validate(diag({2, 0.5})));
    try {
      SymplecticMatrix::validate(diag({2, 2}));
      FAIL("diag(2, 2) accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotSymplectic);
    }
    CHECK_THROWS_AS(SymplecticMatrix::validate(Mat::Identity(3, 3)), Error);
    const auto m = SymplecticMatrix::validate(block(rotation2(0.3), diag({3, 1.0 / 3})));
    CHECK(symplectic_defect(m.power(5).matrix()) < 1e-10);
    CHECK((m * m.inverse()).matrix().isIdentity(1e-12));
  }

  TEST_CASE("form and Poisson matrices") {
    const Mat omega = form_matrix(2), j = poisson_matrix(2);
    CHECK(j.isApprox(omega.transpose()));
    CHECK((j * j).isApprox(-Mat::Identity(4, 4)));
    // a counterclockwise rotation preserves the form
    CHECK(symplectic_defect(rotation2(1.1)) < 1e-14);
  }

  TEST_CASE("spectrum roots of unity") {
    const auto spec = spectrum(SymplecticMatrix::validate(rotation2(2 * pi / 3)));
    CHECK(spec.total_multiplicity() == 2);
    for (const auto& c : spec.clusters) {
      CHECK(c.on_unit_circle);
      REQUIRE(c.root_of_unity_order.has_value());
      CHECK(*c.root_of_unity_order == 3);
    }
    CHECK(spectrum(SymplecticMatrix::identity(2)).unit_multiplicity() == 4);
  }

  TEST_CASE("spectrum of powers") {
    const auto m = SymplecticMatrix::validate(block(rotation2(0.4), diag({1.5, 1 / 1.5})));
    const auto s1 = spectrum(m);
    for (int k = 2; k <= 4; ++k) {
      const auto sk = spectrum(m.power(k));
      for (const auto& c : s1.clusters) {
        const Complex p = std::pow(c.value, k);
        bool hit = false;
        for (const auto& d : sk.clusters) hit = hit || std::abs(d.value - p) < 1e-8;
        CHECK(hit);
      }
    }
  }

  TEST_CASE("admissible iterations") {
    const auto r3 = SymplecticMatrix::validate(rotation2(2 * pi / 3));
    CHECK(admissible(r3, 1));
    CHECK(admissible(r3, 2));
    CHECK_FALSE(admissible(r3, 3));
    CHECK_FALSE(admissible(r3, 6));
    CHECK(admissible(r3, 7));
    const auto sh = SymplecticMatrix::validate(shear());
    for (int k = 1; k <= 10; ++k) CHECK(admissible(sh, k));
  }

  TEST_CASE("generalized unit eigenspace is preserved by admissible k") {
    const auto m = SymplecticMatrix::validate(block(shear(), rotation2(2 * pi / 5)));
    const int w = generalized_unit_dimension(m.matrix());
    CHECK(w == 2);
    for (int k = 1; k <= 12; ++k) {
      const int wk = generalized_unit_dimension(m.power(k).matrix());
      if (admissible(m, k))
        CHECK(wk == w);
      else
        CHECK(wk > w);
    }
  }

  TEST_CASE("good iterations") {
    const auto neg = SymplecticMatrix::validate(diag({-2, -0.5}));
    CHECK_FALSE(good(neg, 2));
    CHECK(good(neg, 3));
    const auto irr = SymplecticMatrix::validate(rotation2(std::sqrt(2.0)));
    for (int k = 1; k <= 8; ++k) CHECK(good(irr, k));
    const auto neg4 = SymplecticMatrix::validate(diag({-2, -3, -0.5, -1.0 / 3}));
    CHECK(negative_pairs_direct(neg4.matrix()) == 2);
    CHECK(negative_pairs_direct(neg4.power(2).matrix()) == 0);
    CHECK(good(neg4, 2));
    const auto r3 = SymplecticMatrix::validate(rotation2(2 * pi / 3));
    try {
      good(r3, 3);
      FAIL("k = 3 accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotAdmissible);
    }
  }

  TEST_CASE("negative pair count matches a direct eigensolve") {
    const auto m = SymplecticMatrix::validate(block(diag({-2, -0.5}), rotation2(0.9)));
    const auto spec = spectrum(m);
    for (int k = 1; k <= 6; ++k) CHECK(negative_real_pairs(spec, k) == negative_pairs_direct(m.power(k).matrix()));
  }

  TEST_CASE("good parity composes") {
    const auto m = SymplecticMatrix::validate(block(diag({-2, -0.5}), rotation2(std::sqrt(3.0))));
    for (int k = 1; k <= 4; ++k)
      for (int j = 1; j <= 4; ++j) {
        if (!admissible(m, k * j)) continue;
        const bool chained = good(m, k) == good(m.power(k), j);
        CHECK(good(m, k * j) == chained);
      }
  }

  TEST_CASE("admissible sets") {
    auto s = admissible_set(SymplecticMatrix::validate(rotation2(2 * pi / 3)), 64, 50);
    CHECK(s.forbidden_divisors == std::vector<int>{3});
    CHECK(s.start == 4);
    CHECK(s.step == 3);
    CHECK(s.verified);
    s = admissible_set(SymplecticMatrix::identity(1), 64, 50);
    CHECK(s.forbidden_divisors.empty());
    CHECK(s.start == 1);
    CHECK(s.step == 1);
    const auto b = SymplecticMatrix::validate(block(rotation2(pi), rotation2(2 * pi / 3)));
    s = admissible_set(b, 64, 60);
    CHECK(s.forbidden_divisors == std::vector<int>{2, 3});
    CHECK(s.start == 7);
    CHECK(s.step == 6);
    // brute force: every member of the progression is admissible
    for (int k = s.start; k <= 60; k += s.step) CHECK(admissible(b, k));
    for (int k = 1; k <= 60; ++k) CHECK(admissible(b, k) == (k % 2 != 0 && k % 3 != 0));
  }

  TEST_CASE("spectral splitting") {
    auto sp = split_spectral(SymplecticMatrix::validate(shear()));
    CHECK(sp.p_w.isIdentity(1e-10));
    CHECK(sp.p_v.isZero(1e-10));
    sp = split_spectral(SymplecticMatrix::validate(diag({2, 0.5})));
    CHECK(sp.p_v.isIdentity(1e-10));
    CHECK(sp.dim_w == 0);
    const Mat m = block(shear(), diag({2, 0.5}));
    sp = split_spectral(SymplecticMatrix::validate(m));
    CHECK((sp.p_v + sp.p_w).isIdentity(1e-10));
    CHECK(sp.dim_v == 2);
    CHECK(sp.dim_w == 2);
    // coordinate projectors: the shear lives on (x_1, y_1) = indices 0, 2
    Mat pw = Mat::Zero(4, 4);
    pw(0, 0) = pw(2, 2) = 1;
    CHECK(sp.p_w.isApprox(pw, 1e-10));
    CHECK((m * sp.p_w).isApprox(sp.p_w * m * sp.p_w, 1e-10));
  }

  TEST_CASE("direct sum ordering") {
    CHECK(product_index_a(0, 1, 1) == 0);
    CHECK(product_index_a(1, 1, 1) == 2);
    CHECK(product_index_b(0, 1, 1) == 1);
    CHECK(product_index_b(1, 1, 1) == 3);
    const Mat s = direct_sum(shear(), rotation2(0.5));
    CHECK(symplectic_defect(s) < 1e-14);
  }
}
