#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hamiter/corpus.hpp"
#include "hamiter/serialize.hpp"

using namespace hamiter;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hamiter-tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("matrices are row-major") {
    Mat m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Json j = to_json(m);
    CHECK(j.dump() == "[[1.0,2.0,3.0],[4.0,5.0,6.0]]");
    CHECK(matrix_from_json(j) == m);
  }

  TEST_CASE("paths round trip") {
    const auto p = SymplecticPath::from_function([](double t) { return rotation2(t); }, 8);
    const auto q = path_from_json(Json::parse(to_json(p).dump()));
    REQUIRE(q.times().size() == p.times().size());
    for (std::size_t i = 0; i < p.times().size(); ++i) {
      CHECK(q.times()[i] == p.times()[i]);
      CHECK(q.samples()[i] == p.samples()[i]);
    }
  }

  TEST_CASE("graded ranks") {
    const GradedRanks g({{-1, 2}, {3, 1}});
    const Json j = to_json(g);
    CHECK(j.dump() == R"({"-1":2,"3":1})");
    CHECK(ranks_from_json(j) == g);
  }

  TEST_CASE("csv tables") {
    CHECK(c_table_csv(3).rfind("k,c_k\n2,", 0) == 0);
    PersistenceReport r;
    PersistenceRow row;
    row.k = 1;
    row.admissible = row.good = true;
    row.ranks = GradedRanks({{1, 1}});
    row.s_k = 0;
    row.s_k_even = true;
    r.rows.push_back(row);
    const auto csv = to_csv(r);
    CHECK(csv.rfind("k,admissible,good,support,s_k,even\n", 0) == 0);
    CHECK(csv.find("1:1") != std::string::npos);
    GapTable t;
    t.rows.push_back({0, 1, 2, 1.5, 0.25, 1.75});
    CHECK(to_csv(t).rfind("i,j,k,action_gap,index_gap,gamma\n", 0) == 0);
  }

  TEST_CASE("records serialize deterministically") {
    const auto h = make_germ("double-well");
    const auto rec = make_record(h, Vec::Zero(2));
    CHECK(to_json(rec).dump() == to_json(make_record(h, Vec::Zero(2))).dump());
    const Json j = to_json(rec);
    CHECK(j.contains("linearization"));
    CHECK(j.contains("delta"));
  }

  TEST_CASE("field files") {
    const auto f = ScalarField::sample(Box::cube(2, 0.5), {5, 7}, [](const Vec& z) { return z[0] - 3 * z[1] * z[1]; });
    const auto path = scratch("field.bin");
    write_field(f, path);
    std::ifstream in(path, std::ios::binary);
    std::string magic(9, '\0');
    in.read(magic.data(), 9);
    CHECK(magic == "HMFIELD1\n");
    const auto g = read_field(path);
    CHECK(g.resolution() == f.resolution());
    CHECK(g.values() == f.values());
    CHECK(g.box().lo == f.box().lo);
    CHECK(fs::file_size(path) > 8 * static_cast<std::uintmax_t>(f.size()));
  }

  TEST_CASE("missing files") {
    try {
      read_text(scratch("does-not-exist.json"));
      FAIL("missing file accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingReport);
    }
    write_text(scratch("nested/dir/out.txt"), "x");
    CHECK(read_text(scratch("nested/dir/out.txt")) == "x");
  }
}
