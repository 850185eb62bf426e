#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hamiter/pathindex.hpp"
#include "oracles.hpp"

using namespace hamiter;
using std::numbers::pi;

namespace {

SymplecticPath rotation_path(double turns) {
  return SymplecticPath::from_function([turns](double t) { return rotation2(2 * pi * turns * t); });
}

// Path t ↦ exp(t𝕁S) for a symmetric S.
SymplecticPath quadratic_path(const Mat& s) { return exponential_path(poisson_matrix(static_cast<int>(s.rows()) / 2) * s); }

Mat random_symmetric(std::mt19937_64& rng, int dim, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Mat a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST_SUITE("pathindex") {
  TEST_CASE("rho examples") {
    CHECK(std::abs(rho(Mat::Identity(2, 2)) - Complex(1, 0)) < 1e-12);
    for (double th : {0.3, 1.2, 2.5, -0.8}) CHECK(std::abs(rho(rotation2(th)) - std::polar(1.0, th)) < 1e-10);
    Mat d(2, 2);
    d << 2, 0, 0, 0.5;
    const Complex r = rho(d);
    CHECK(std::abs(r.imag()) < 1e-12);
    CHECK(std::abs(std::abs(r) - 1) < 1e-12);
    // polar oracle: the unitary part of a positive diagonal matrix is the identity
    CHECK(std::abs(rho_polar(d) - Complex(1, 0)) < 1e-12);
  }

  TEST_CASE("rho is multiplicative over direct sums") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const Mat a = (poisson_matrix(1) * random_symmetric(rng, 2, 1.0)).exp();
      const Mat b = (poisson_matrix(1) * random_symmetric(rng, 2, 1.0)).exp();
      CHECK(std::abs(rho(direct_sum(a, b)) - rho(a) * rho(b)) < 1e-10);
    }
  }

  TEST_CASE("mean index examples") {
    CHECK(mean_index(SymplecticPath::constant_identity(2)) == doctest::Approx(0.0).epsilon(1e-12));
    for (double alpha : {0.1, 0.3183, 0.4142, 0.75}) CHECK(mean_index(rotation_path(alpha)) == doctest::Approx(2 * alpha).epsilon(1e-9));
    // a small-Hessian maximum rotates forward
    const double a = 0.5;
    CHECK(mean_index(quadratic_path(-a * Mat::Identity(2, 2))) == doctest::Approx(a / pi).epsilon(1e-9));
  }

  TEST_CASE("Conley-Zehnder examples") {
    const double a = 0.5;
    CHECK(conley_zehnder(quadratic_path(-a * Mat::Identity(2, 2))) == 1);
    CHECK(conley_zehnder(quadratic_path(a * Mat::Identity(2, 2))) == -1);
    Mat gen(2, 2);
    gen << 1, 0, 0, -1;
    const auto hyp = exponential_path(gen);
    CHECK(hyp.endpoint().isApprox(Vec(Eigen::Vector2d(std::exp(1.0), std::exp(-1.0))).asDiagonal().toDenseMatrix(), 1e-10));
    CHECK(conley_zehnder(hyp) == 0);
    // n = 2 maximum
    CHECK(conley_zehnder(quadratic_path(-a * Mat::Identity(4, 4))) == 2);
    try {
      conley_zehnder(SymplecticPath::constant_identity(1));
      FAIL("degenerate endpoint accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateEndpoint);
    }
  }

  TEST_CASE("Conley-Zehnder against crossing forms") {
    std::mt19937_64 rng(11);
    int compared = 0;
    for (int trial = 0; trial < 24; ++trial) {
      const int dim = trial % 2 ? 4 : 2;
      const Mat s = random_symmetric(rng, dim, 3.0);
      const auto expected = oracle::crossing_form_cz(s);
      if (!expected) continue;
      const auto path = quadratic_path(s);
      CAPTURE(s);
      CHECK(conley_zehnder(path) == *expected);
      ++compared;
    }
    CHECK(compared >= 16);
  }

  TEST_CASE("Maslov index of loops") {
    CHECK(maslov_loop(rotation_path(1.0)) == 1);
    CHECK(maslov_loop(rotation_path(2.0)) == 2);
    CHECK(maslov_loop(rotation_path(-1.0)) == -1);
    CHECK(maslov_loop(SymplecticPath::constant_identity(1)) == 0);
    try {
      maslov_loop(rotation_path(0.5));
      FAIL("open path accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NotALoop);
    }
  }

  TEST_CASE("iteration formula and mean index formula") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
      const Mat s = random_symmetric(rng, trial % 2 ? 4 : 2, 1.5);
      const auto p = quadratic_path(s);
      const double d = mean_index(p);
      for (int k = 2; k <= 5; ++k) CHECK(mean_index(iterate_path(p, k)) == doctest::Approx(k * d).epsilon(1e-6));
    }
    const auto p = quadratic_path(-0.5 * Mat::Identity(2, 2));
    const double d = mean_index(p);
    for (int k = 1; k <= 30; ++k) {
      const auto it = iterate_path(p, k);
      if (generalized_unit_dimension(it.endpoint()) != 0) continue;
      CHECK(std::abs(conley_zehnder(it) - k * d) <= 1.0);
    }
  }

  TEST_CASE("|cz - delta| <= n, strict off the unit eigenvalue") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = trial % 2 ? 4 : 2;
      const auto r = index_report(quadratic_path(random_symmetric(rng, dim, 2.5)));
      if (!r.nondegenerate) continue;
      REQUIRE(r.cz.has_value());
      CHECK(std::abs(*r.cz - r.delta) < r.n);
    }
  }

  TEST_CASE("additivity") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 6; ++trial) {
      const auto a = quadratic_path(random_symmetric(rng, 2, 2.0));
      const auto b = quadratic_path(random_symmetric(rng, 2, 2.0));
      CHECK(mean_index(direct_sum_path(a, b)) == doctest::Approx(mean_index(a) + mean_index(b)).epsilon(1e-6));
    }
  }

  TEST_CASE("loops shift the index by twice their Maslov index") {
    const auto p = quadratic_path(-0.5 * Mat::Identity(2, 2));
    for (double turns : {1.0, -1.0, 2.0}) {
      const auto loop = rotation_path(turns);
      const int mu = maslov_loop(loop);
      const auto moved = product_path(loop, p);
      CHECK(mean_index(moved) == doctest::Approx(mean_index(p) + 2 * mu).epsilon(1e-6));
      CHECK(conley_zehnder(moved) - conley_zehnder(p) == 2 * mu);
    }
  }

  TEST_CASE("unipotent endpoints have even mean index") {
    Mat shear_s = Mat::Zero(2, 2);
    shear_s(1, 1) = 1.0;
    const auto sh = quadratic_path(shear_s);
    CHECK(std::abs(mean_index(sh)) < 1e-6);
    const auto turned = product_path(rotation_path(1.0), sh);
    CHECK(mean_index(turned) == doctest::Approx(2.0).epsilon(1e-6));
    for (double turns : {1.0, 3.0}) {
      const auto loop = rotation_path(turns);
      CHECK(mean_index(loop) == doctest::Approx(2.0 * maslov_loop(loop)).epsilon(1e-6));
    }
  }

  TEST_CASE("endpoint correction relation") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = quadratic_path(random_symmetric(rng, 2, 2.0));
      const auto r = index_report(p);
      if (!r.nondegenerate) continue;
      CHECK(*r.cz == static_cast<int>(std::lround(r.delta + cz_endpoint_correction(p.endpoint()))));
    }
  }
}
