#include "hamiter/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace hamiter {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string csv_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void put_u64_le(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(std::istream& is) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(is.get())) << (8 * i);
  return v;
}

}  // namespace

Json to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array()) throw Error(Errc::InvalidArgument, "matrix must be an array of rows");
  const auto rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw Error(Errc::InvalidArgument, "ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const EigenData& spec) {
  Json clusters = Json::array();
  for (const auto& c : spec.clusters) {
    Json o;
    o["re"] = c.value.real();
    o["im"] = c.value.imag();
    o["multiplicity"] = c.multiplicity;
    o["on_unit_circle"] = c.on_unit_circle;
    o["root_of_unity_order"] = optional_json(c.root_of_unity_order);
    clusters.push_back(std::move(o));
  }
  Json j;
  j["cluster_tol"] = spec.cluster_tol;
  j["q_max"] = spec.q_max;
  j["clusters"] = std::move(clusters);
  return j;
}

Json to_json(const AdmissibleSet& set) {
  Json j;
  j["forbidden_divisors"] = set.forbidden_divisors;
  j["start"] = set.start;
  j["step"] = set.step;
  j["horizon"] = set.horizon;
  j["verified"] = set.verified;
  return j;
}

Json to_json(const SymplecticPath& path) {
  Json samples = Json::array();
  for (const auto& m : path.samples()) samples.push_back(to_json(m));
  Json j;
  j["n"] = path.n();
  j["times"] = path.times();
  j["samples"] = std::move(samples);
  return j;
}

SymplecticPath path_from_json(const Json& j) {
  std::vector<double> times = j.at("times").get<std::vector<double>>();
  std::vector<Mat> samples;
  for (const auto& s : j.at("samples")) samples.push_back(matrix_from_json(s));
  return SymplecticPath(std::move(times), std::move(samples));
}

Json to_json(const IndexReport& r) {
  Json j;
  j["n"] = r.n;
  j["delta"] = r.delta;
  j["cz"] = optional_json(r.cz);
  j["maslov"] = optional_json(r.maslov);
  j["nondegenerate"] = r.nondegenerate;
  j["winding_uncertainty"] = r.winding_uncertainty;
  return j;
}

Json to_json(const FixedPointRecord& r) {
  Json j;
  j["z"] = to_json(r.z);
  j["residual"] = r.residual;
  j["linearization"] = to_json(r.linearization);
  j["action"] = r.action;
  j["delta"] = r.delta;
  j["cz"] = optional_json(r.cz);
  j["degeneracy"] = to_string(r.degeneracy);
  j["symplectic_defect"] = r.symplectic_defect;
  j["newton_residuals"] = r.newton_residuals;
  return j;
}

Json to_json(const GapTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json o;
    o["i"] = r.i;
    o["j"] = r.j;
    o["k"] = r.k;
    o["action_gap"] = r.action_gap;
    o["index_gap"] = r.index_gap;
    o["gamma"] = r.gamma;
    rows.push_back(std::move(o));
  }
  Json j;
  j["rows"] = std::move(rows);
  return j;
}

std::string to_csv(const GapTable& t) {
  std::ostringstream os;
  os << "i,j,k,action_gap,index_gap,gamma\n";
  for (const auto& r : t.rows)
    os << r.i << ',' << r.j << ',' << r.k << ',' << csv_double(r.action_gap) << ',' << csv_double(r.index_gap) << ','
       << csv_double(r.gamma) << '\n';
  return os.str();
}

Json to_json(const GradedRanks& g) {
  Json j = Json::object();
  for (auto [d, r] : g.map()) j[std::to_string(d)] = r;
  return j;
}

GradedRanks ranks_from_json(const Json& j) {
  GradedRanks g;
  for (auto it = j.begin(); it != j.end(); ++it) g.set(std::stoi(it.key()), it.value().get<int>());
  return g;
}

Json to_json(const MorseResult& r) {
  Json per = Json::array();
  for (const auto& g : r.per_resolution) per.push_back(to_json(g));
  Json j;
  j["ranks"] = to_json(r.ranks);
  j["per_resolution"] = std::move(per);
  j["deltas"] = r.deltas;
  j["shell_min_gradient"] = r.shell_min_gradient;
  return j;
}

Json to_json(const LocalFloer& lf) {
  Json j;
  j["k"] = lf.k;
  j["n"] = lf.n;
  j["ranks"] = to_json(lf.ranks);
  j["route"] = to_string(lf.route);
  j["convention"] = to_string(lf.convention);
  j["delta"] = lf.delta;
  if (lf.bridge.evaluated) {
    Json b;
    b["epsilon"] = lf.bridge.epsilon;
    b["hessian_norm"] = lf.bridge.hessian_norm;
    b["passed"] = lf.bridge.passed;
    b["box_radius"] = lf.bridge.box_radius;
    b["conjugated"] = lf.bridge.conjugated;
    j["bridge"] = std::move(b);
  }
  return j;
}

Json to_json(const PersistenceReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json o;
    o["k"] = row.k;
    o["admissible"] = row.admissible;
    o["good"] = row.good;
    o["ranks"] = to_json(row.ranks);
    o["route"] = to_string(row.route);
    o["s_k"] = optional_json(row.s_k);
    o["s_k_even"] = optional_json(row.s_k_even);
    o["limit_gap"] = optional_json(row.limit_gap);
    o["window_ok"] = row.window_ok;
    o["support_ok"] = row.support_ok;
    rows.push_back(std::move(o));
  }
  Json j;
  j["n"] = r.n;
  j["delta"] = r.delta;
  j["rows"] = std::move(rows);
  j["checks"] = to_json(r.checks);
  return j;
}

std::string to_csv(const PersistenceReport& r) {
  std::ostringstream os;
  os << "k,admissible,good,support,s_k,even\n";
  for (const auto& row : r.rows) {
    std::string support;
    for (auto [d, rk] : row.ranks.map()) {
      if (!support.empty()) support += ';';
      support += std::to_string(d) + ':' + std::to_string(rk);
    }
    os << row.k << ',' << row.admissible << ',' << row.good << ',' << support << ','
       << (row.s_k ? std::to_string(*row.s_k) : "") << ',' << (row.s_k_even ? std::to_string(*row.s_k_even) : "")
       << '\n';
  }
  return os.str();
}

Json to_json(const SdmEvidence& e) {
  Json j;
  j["is_sdm"] = e.is_sdm;
  j["delta"] = e.delta;
  j["hf_n_rank"] = e.hf_n_rank;
  j["strongly_degenerate"] = e.strongly_degenerate;
  j["cross_check"] = optional_json(e.cross_check);
  j["cross_check_k"] = e.cross_check_k;
  return j;
}

Json to_json(const PeriodicSearch& s) {
  Json scans = Json::array();
  for (const auto& sc : s.scans) {
    Json pts = Json::array();
    for (const auto& p : sc.points) {
      Json o;
      o["z"] = to_json(p.z);
      o["norm"] = p.norm;
      o["residual"] = p.residual;
      o["fixed_residual"] = p.fixed_residual;
      o["at_origin"] = p.at_origin;
      o["fixed"] = p.fixed;
      pts.push_back(std::move(o));
    }
    Json o;
    o["radius"] = sc.radius;
    o["seeds"] = sc.seeds;
    o["divergent"] = sc.divergent;
    o["escaped"] = sc.escaped;
    o["only_origin"] = sc.only_origin;
    o["points"] = std::move(pts);
    scans.push_back(std::move(o));
  }
  Json j;
  j["k"] = s.k;
  j["admissible"] = s.admissible;
  j["conclusion"] = s.conclusion();
  j["scans"] = std::move(scans);
  return j;
}

Json to_json(const ContractionCheck& c) {
  Json j;
  j["k"] = c.k;
  j["sup_norm"] = c.sup_norm;
  j["threshold"] = c.threshold;
  j["certified"] = c.certified;
  j["search_agrees"] = optional_json(c.search_agrees);
  return j;
}

std::string c_table_csv(int k_max) {
  std::ostringstream os;
  os << "k,c_k\n";
  for (int k = 2; k <= k_max; ++k) os << k << ',' << csv_double(c_constant(k).value) << '\n';
  return os.str();
}

Json to_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["ref"] = c.ref;
  j["pass"] = c.pass;
  j["detail"] = c.detail;
  return j;
}

Json to_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

void write_field(const ScalarField& f, const std::filesystem::path& path) {
  static_assert(sizeof(double) == 8);
  Json h;
  h["box"] = {{"lo", to_json(f.box().lo)}, {"hi", to_json(f.box().hi)}};
  h["resolution"] = f.resolution();
  h["byte_order"] = "little";
  h["dtype"] = "float64";
  const std::string header = h.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  os << "HMFIELD1\n";
  put_u64_le(os, header.size());
  os << header;
  for (double v : f.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64_le(os, bits);
  }
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::InvalidArgument, "cannot read " + path.string());
  char magic[9];
  is.read(magic, 9);
  if (!is || std::string(magic, 9) != "HMFIELD1\n") throw Error(Errc::ParseError, "bad field file magic");
  const std::uint64_t len = get_u64_le(is);
  std::string header(len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(len));
  Json h = Json::parse(header);
  Box box;
  auto lov = h["box"]["lo"].get<std::vector<double>>();
  auto hiv = h["box"]["hi"].get<std::vector<double>>();
  box.lo = Eigen::Map<Vec>(lov.data(), lov.size());
  box.hi = Eigen::Map<Vec>(hiv.data(), hiv.size());
  ScalarField f(box, h["resolution"].get<std::vector<int>>());
  for (auto& v : f.values()) {
    std::uint64_t bits = get_u64_le(is);
    std::memcpy(&v, &bits, 8);
  }
  if (!is) throw Error(Errc::ParseError, "truncated field file");
  return f;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  os << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::MissingReport, "cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace hamiter
