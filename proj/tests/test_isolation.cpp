#include <doctest.h>

#include <cmath>
#include <random>

#include "hamiter/corpus.hpp"
#include "hamiter/isolation.hpp"
#include "oracles.hpp"

using namespace hamiter;

TEST_SUITE("isolation") {
  TEST_CASE("discrete orbits") {
    DiscreteOrbit o;
    for (double v : {1.0, -2.0, 1.0}) o.points.push_back(Vec::Constant(1, v));
    CHECK(o.k() == 3);
    CHECK(o.mean().norm() == doctest::Approx(0.0));
    CHECK(o.l1_norm() == doctest::Approx(4.0));
    CHECK(o.derivative_l1_norm() == doctest::Approx(6.0));  // 3 + 3 + 0
  }

  TEST_CASE("c(2) by hand") {
    // ξ₂ = −ξ₁: ‖ξ̇‖ = 4|ξ₁| and ‖ξ‖ = 2|ξ₁|
    CHECK(c_constant(2).value == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("c(k) against brute-force vertex enumeration") {
    for (int k = 2; k <= 5; ++k) {
      CAPTURE(k);
      CHECK(c_constant(k).value == doctest::Approx(oracle::c_constant_bruteforce(k)).epsilon(1e-12));
    }
  }

  TEST_CASE("the maximizer is sharp") {
    double prev = 0.0;
    for (int k = 2; k <= 12; ++k) {
      const auto c = c_constant(k);
      CHECK(c.maximizer.k() == k);
      CHECK(c.maximizer.mean().norm() < 1e-15);
      CHECK(std::abs(c.maximizer.l1_norm() - c.value * c.maximizer.derivative_l1_norm()) <= 1e-12);
      CHECK(c.value >= prev);
      prev = c.value;
    }
    CHECK_THROWS_AS(c_constant(1), Error);
  }

  TEST_CASE("random zero-mean sequences obey the inequality") {
    for (int k = 2; k <= 12; ++k)
      for (int m : {1, 2, 3}) {
        CAPTURE(k);
        CAPTURE(m);
        const double r = sampled_l1_ratio(k, m, 2000, 42 + k);
        CHECK(r <= c_constant(k).value + 1e-12);
        CHECK(r > 0.0);
      }
  }

  TEST_CASE("sampling is seeded") {
    CHECK(sampled_l1_ratio(5, 2, 500, 7) == sampled_l1_ratio(5, 2, 500, 7));
  }

  TEST_CASE("linear rotation of order three") {
    const auto phi = linear_map(rotation2(2 * oracle::pi / 3), Box::cube(2, 1.0));
    const auto s3 = periodic_point_search(phi, 3, {0.1, 0.01});
    CHECK_FALSE(s3.admissible);
    CHECK_FALSE(s3.isolation_holds);
    CHECK(s3.conclusion() == "ISOLATION_FAILS");
    bool nonfixed = false;
    for (const auto& p : s3.scans.back().points) nonfixed = nonfixed || (!p.at_origin && !p.fixed);
    CHECK(nonfixed);
    const auto s2 = periodic_point_search(phi, 2, {0.1, 0.01});
    CHECK(s2.admissible);
    CHECK(s2.isolation_holds);
  }

  TEST_CASE("radial perturbation keeps admissible iterates isolated") {
    const auto phi = germ_map(make_germ("radial-rotation"), 1);
    const auto s4 = periodic_point_search(phi, 4, {0.1, 0.01, 0.001});
    CHECK(s4.admissible);
    CHECK(s4.isolation_holds);
    REQUIRE(s4.scans.size() == 3);
    CHECK(s4.scans.front().radius > s4.scans.back().radius);
  }

  TEST_CASE("quartic maximum iterates are isolated") {
    const auto phi = germ_map(make_germ("quartic-max"), 1);
    for (int k = 2; k <= 5; ++k) {
      CAPTURE(k);
      const auto s = periodic_point_search(phi, k, {0.1, 0.01});
      CHECK(s.isolation_holds);
      for (const auto& scan : s.scans) CHECK(scan.only_origin);
    }
  }

  TEST_CASE("contraction certificate") {
    const auto id = linear_map(Mat::Identity(2, 2), Box::cube(2, 1.0));
    for (int k = 2; k <= 5; ++k) {
      const auto c = contraction_check(id, k, Box::cube(2, 0.1), 5);
      CHECK(c.certified);
      CHECK(c.search_agrees == true);
    }
    const auto q = germ_map(make_germ("quartic-max"), 1);
    auto c = contraction_check(q, 3, Box::cube(2, 0.05));
    CHECK(c.threshold == doctest::Approx(1.0 / c_constant(3).value));
    CHECK(c.sup_norm < c.threshold);
    CHECK(c.certified);
    CHECK(c.search_agrees == true);
    c = contraction_check(q, 12, Box::cube(2, 1.5), 9, false);
    CHECK_FALSE(c.certified);
    CHECK_FALSE(c.search_agrees.has_value());
    try {
      contraction_check(germ_map(make_germ("nondeg-max"), 1), 2, Box::cube(2, 0.1));
      FAIL("rotation accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::LinearizationNotIdentity);
    }
  }
}
