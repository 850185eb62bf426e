#pragma once

// JSON and CSV forms of the library's reports.  Objects keep insertion order
// so identical inputs give byte-identical files.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hamiter/cubhom.hpp"
#include "hamiter/genfun.hpp"
#include "hamiter/hamflow.hpp"
#include "hamiter/isolation.hpp"
#include "hamiter/locinv.hpp"
#include "hamiter/pathindex.hpp"
#include "hamiter/report.hpp"
#include "hamiter/symplin.hpp"

namespace hamiter {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays.
Json to_json(const Mat& m);
Mat matrix_from_json(const Json& j);
Json to_json(const Vec& v);

Json to_json(const EigenData& spec);
Json to_json(const AdmissibleSet& set);
/// {"times": [...], "samples": [matrix, ...]}.
Json to_json(const SymplecticPath& path);
SymplecticPath path_from_json(const Json& j);
Json to_json(const IndexReport& r);

Json to_json(const FixedPointRecord& r);
Json to_json(const GapTable& t);
std::string to_csv(const GapTable& t);

/// {"degree": rank} with degrees as decimal strings.
Json to_json(const GradedRanks& g);
GradedRanks ranks_from_json(const Json& j);
Json to_json(const MorseResult& r);

Json to_json(const LocalFloer& lf);
Json to_json(const PersistenceReport& r);
/// Columns k, admissible, good, support, s_k, even.
std::string to_csv(const PersistenceReport& r);
Json to_json(const SdmEvidence& e);

Json to_json(const PeriodicSearch& s);
Json to_json(const ContractionCheck& c);
/// Columns k, c_k for k = 2..k_max.
std::string c_table_csv(int k_max);

Json to_json(const Check& c);
Json to_json(const std::vector<Check>& checks);

/// Binary grid file: "HMFIELD1\n", header length as uint64 little-endian, a
/// JSON header (box, resolution, byte_order, dtype), then float64 values in
/// little-endian order with axis 0 fastest.
void write_field(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_field(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hamiter
