#include <doctest.h>

#include <cmath>

#include "hamiter/corpus.hpp"
#include "hamiter/locinv.hpp"
#include "oracles.hpp"

using namespace hamiter;

namespace {

FixedPointRecord origin_record(const HamiltonianGerm& h) { return make_record(h, Vec::Zero(2 * h.n)); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("locinv") {
  TEST_CASE("Kunneth convolution") {
    CHECK(kunneth(GradedRanks({{0, 1}}), GradedRanks({{0, 1}})) == GradedRanks({{0, 1}}));
    CHECK(kunneth(GradedRanks({{1, 1}}), GradedRanks({{1, 1}})) == GradedRanks({{2, 1}}));
    CHECK(kunneth(GradedRanks({{1, 2}}), GradedRanks({{0, 1}, {1, 1}})) == GradedRanks({{1, 2}, {2, 2}}));
    CHECK(kunneth(GradedRanks(), GradedRanks({{1, 1}})).empty());
  }

  TEST_CASE("degree shifts") {
    CHECK(degree_shift(GradedRanks({{1, 1}}), GradedRanks({{3, 1}})) == 2);
    CHECK(degree_shift(GradedRanks({{0, 1}, {2, 3}}), GradedRanks({{-1, 1}, {1, 3}})) == -1);
    CHECK_FALSE(degree_shift(GradedRanks(), GradedRanks()).has_value());
    CHECK(code_of([] { degree_shift(GradedRanks({{0, 1}, {1, 2}}), GradedRanks({{0, 2}, {1, 1}})); }) == Errc::ShiftAmbiguous);
    CHECK(code_of([] { degree_shift(GradedRanks({{0, 1}}), GradedRanks()); }) == Errc::ShiftAmbiguous);
  }

  TEST_CASE("route examples") {
    const auto max = make_germ("nondeg-max", {{"a", 0.5}});
    auto lf = local_floer(max, origin_record(max), 1);
    CHECK(lf.ranks == GradedRanks({{1, 1}}));
    CHECK(lf.route == Route::Nondegenerate);
    CHECK(lf.convention == ShiftConvention::CzAnchor);

    const auto q = make_germ("quartic-max");
    const auto qr = origin_record(q);
    for (int k : {1, 3}) {
      CAPTURE(k);
      lf = local_floer(q, qr, k);
      CHECK(lf.ranks == GradedRanks({{1, 1}}));
      CHECK(lf.route == Route::StronglyDegenerate);
      CHECK(lf.convention == ShiftConvention::GenfunN0);
      CHECK(lf.bridge.evaluated);
      CHECK(lf.bridge.passed);
      CHECK(lf.bridge.hessian_norm < 2 * oracle::pi);
    }

    const auto prod = make_germ("product-max-quartic");
    lf = local_floer(prod, origin_record(prod), 1);
    CHECK(lf.ranks == GradedRanks({{2, 1}}));
    CHECK(lf.route == Route::Split);
    CHECK(lf.convention == ShiftConvention::KunnethProduct);
  }

  TEST_CASE("minimum and monkey saddle") {
    const auto qmin = make_germ("quartic-min");
    CHECK(local_floer(qmin, origin_record(qmin), 1).ranks == GradedRanks({{-1, 1}}));
    const auto monkey = make_germ("monkey-saddle");
    CHECK(local_floer(monkey, origin_record(monkey), 1).ranks == GradedRanks({{0, 2}}));
  }

  TEST_CASE("errors") {
    const auto rr = make_germ("radial-rotation");
    CHECK(code_of([&] { local_floer(rr, origin_record(rr), 3); }) == Errc::NotAdmissible);
    CHECK(code_of([&] { verify_persistence(rr, origin_record(rr), {1, 2, 3}); }) == Errc::NotAdmissible);
    // weakly degenerate without a recorded product structure
    auto mixed = make_germ("product-max-quartic");
    mixed.factors.reset();
    CHECK(code_of([&] { local_floer(mixed, origin_record(mixed), 1); }) == Errc::RouteUnavailable);
    const auto shear = make_germ("shear");
    CHECK(code_of([&] { local_floer(shear, origin_record(shear), 1); }) == Errc::NotIsolated);
  }

  TEST_CASE("admissible iterations") {
    const auto rr = make_germ("radial-rotation");
    CHECK(admissible_iterations(origin_record(rr), 8) == std::vector<int>{1, 2, 4, 5, 7, 8});
    const auto q = make_germ("quartic-max");
    CHECK(admissible_iterations(origin_record(q), 4) == std::vector<int>{1, 2, 3, 4});
  }

  TEST_CASE("Euler characteristic equals the fixed point index") {
    // χ(HF) = (−1)^n · deg(id − φ^k) on a small circle
    for (const char* name : {"nondeg-max", "nondeg-min", "hyperbolic", "negative-hyperbolic", "rotation", "radial-rotation",
                             "double-well", "monkey-saddle", "quartic-max", "quartic-min"}) {
      const auto h = make_germ(name);
      const auto rec = origin_record(h);
      for (int k : {1, 2}) {
        CAPTURE(name);
        CAPTURE(k);
        const auto lf = local_floer(h, rec, k);
        const auto phi = germ_map(h, k);
        const int index = oracle::fixed_point_index([&](const Vec& z) { return phi(z); }, 0.02);
        CHECK(lf.ranks.euler() == -index);
      }
    }
  }

  TEST_CASE("persistence on the nondegenerate route") {
    const auto nh = make_germ("negative-hyperbolic");
    const auto rep = verify_persistence(nh, origin_record(nh), {1, 2, 3, 4, 5, 6});
    REQUIRE(rep.rows.size() == 6);
    for (const auto& row : rep.rows) {
      CAPTURE(row.k);
      REQUIRE(row.s_k.has_value());
      CHECK(*row.s_k == row.k - 1);
      CHECK(row.good == (row.k % 2 == 1));
      CHECK(row.window_ok);
      CHECK(row.support_ok);
    }
    for (const auto& c : rep.checks) {
      CAPTURE(c.name);
      CHECK(c.pass);
    }
    // rotation: s_k from crossing-form indices of the iterated quadratic path
    const double alpha = 0.3183;
    const auto rot = make_germ("rotation", {{"alpha", alpha}});
    const auto rrep = verify_persistence(rot, origin_record(rot), {1, 2, 3, 4, 5, 6, 7});
    const auto cz1 = oracle::crossing_form_cz(-2 * oracle::pi * alpha * Mat::Identity(2, 2));
    REQUIRE(cz1.has_value());
    for (const auto& row : rrep.rows) {
      const auto czk = oracle::crossing_form_cz(-2 * oracle::pi * alpha * row.k * Mat::Identity(2, 2));
      REQUIRE(czk.has_value());
      CHECK(row.s_k == *czk - *cz1);
      CHECK(row.s_k_even == true);
    }
  }

  TEST_CASE("support window") {
    for (const char* name : {"nondeg-max", "rotation", "hyperbolic", "monkey-saddle"}) {
      const auto h = make_germ(name);
      const auto rec = origin_record(h);
      for (int k : admissible_iterations(rec, 4)) {
        CAPTURE(name);
        CAPTURE(k);
        const auto lf = local_floer(h, rec, k);
        const double lo = k * rec.delta - h.n, hi = k * rec.delta + h.n;
        CHECK(*lf.ranks.min_degree() >= lo - 1e-9);
        CHECK(*lf.ranks.max_degree() <= hi + 1e-9);
        if (rec.degeneracy == Degeneracy::Nondegenerate) {
          CHECK(*lf.ranks.min_degree() > lo);
          CHECK(*lf.ranks.max_degree() < hi);
        }
      }
    }
  }

  TEST_CASE("SDM detection") {
    const auto max = make_germ("nondeg-max", {{"a", 0.5}});
    auto e = detect_sdm(max, origin_record(max));
    CHECK_FALSE(e.is_sdm);
    CHECK(e.hf_n_rank == 1);
    CHECK(e.delta == doctest::Approx(0.5 / oracle::pi).epsilon(1e-9));
    const auto qmin = make_germ("quartic-min");
    e = detect_sdm(qmin, origin_record(qmin));
    CHECK_FALSE(e.is_sdm);
    CHECK(e.hf_n_rank == 0);
    CHECK(e.strongly_degenerate);
  }

  TEST_CASE("product germs: additivity and direct 4D computation") {
    const auto a = make_germ("quartic-max");
    const auto pq = make_germ("product-quartic-quartic");
    const auto rec = origin_record(pq);
    CHECK(rec.delta == doctest::Approx(2 * origin_record(a).delta).epsilon(1e-6));
    const auto pmq = make_germ("product-max-quartic");
    CHECK(origin_record(pmq).delta ==
          doctest::Approx(origin_record(make_germ("nondeg-max")).delta + origin_record(a).delta).epsilon(1e-6));
    // both factors are strongly degenerate, so the 4D generating-function route applies directly
    const auto direct = local_floer(pq, rec, 1);
    CHECK(direct.route == Route::StronglyDegenerate);
    const auto fa = local_floer(a, origin_record(a), 1).ranks;
    CHECK(direct.ranks == kunneth(fa, fa));
    LocalFloerOptions split;
    split.prefer_split = true;
    CHECK(local_floer(pq, rec, 1, split).ranks == direct.ranks);
  }
}
