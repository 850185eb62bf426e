#include "hamiter/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace hamiter {

namespace {

constexpr const char* kSchema = "hamiter-scenario/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) fail(line, "not a finite number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "not a number: '" + s + "'");
  }
}

long parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) fail(line, "not an integer: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "not an integer: '" + s + "'");
  }
}

std::vector<int> parse_ks(const std::string& s, int line) {
  std::vector<int> ks;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    long a = parse_int(trim(s.substr(0, dots)), line), b = parse_int(trim(s.substr(dots + 2)), line);
    if (a < 1 || b < a || b > 1000) fail(line, "k-range must satisfy 1 <= a <= b <= 1000");
    for (long k = a; k <= b; ++k) ks.push_back(static_cast<int>(k));
  } else {
    for (const auto& t : split_list(s)) {
      long k = parse_int(t, line);
      if (k < 1 || k > 1000) fail(line, "k must lie in 1..1000");
      ks.push_back(static_cast<int>(k));
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  }
  if (ks.empty()) fail(line, "k-range is empty");
  return ks;
}

const std::set<std::string> kTasks{"spectrum", "persistence", "sdm", "isolation", "gaps", "morse"};

bool is_admissible_for(const FixedPointRecord& rec, int k) {
  if (rec.degeneracy == Degeneracy::StronglyDegenerate) return true;
  return admissible(SymplecticMatrix::validate(rec.linearization, 1e-7), k);
}

// Shared per-scenario state.
struct Context {
  const Scenario& sc;
  HamiltonianGerm germ;
  Vec point;
  std::filesystem::path out;
  std::map<std::string, std::string> files;  // name → contents, written at the end

  LocalFloerOptions lf_options() const {
    LocalFloerOptions o;
    o.gf.c1_gate = sc.c1_gate;
    o.box_radius = sc.gf_radius;
    return o;
  }
  FixedPointRecord record() const { return make_record(germ, point, sc.newton_tol); }
  void emit(TaskResult& r, const std::string& name, const std::string& text) {
    files[name] = text;
    r.outputs.push_back(name);
  }
};

void task_spectrum(Context& cx, TaskResult& r) {
  const auto rec = cx.record();
  const int n = cx.germ.n;
  const int k_max = cx.sc.ks.back();
  Json j;
  j["record"] = to_json(rec);
  r.checks.push_back({"symplectic linearization", "dφ preserves ω", rec.symplectic_defect <= 1e-7,
                      [&] {
                        std::ostringstream d;
                        d << "defect " << std::scientific << std::setprecision(2) << rec.symplectic_defect;
                        return d.str();
                      }()});
  const auto m = SymplecticMatrix::validate(rec.linearization, 1e-7);
  const auto spec = spectrum(m);
  j["spectrum"] = to_json(spec);
  j["admissible_set"] = to_json(admissible_set(m, 64, k_max));
  j["index"] = to_json(index_report(rec.monodromy));
  Json rows = Json::array();
  bool mi1 = true, mi4 = true;
  std::ostringstream detail1, detail4;
  for (int k : cx.sc.ks) {
    Json row;
    row["k"] = k;
    const bool adm = admissible(spec, k);
    row["admissible"] = adm;
    row["good"] = adm ? Json(good(spec, k)) : Json(nullptr);
    SymplecticPath pk = iterate_path(rec.monodromy, k);
    const double dk = mean_index(pk);
    row["delta"] = dk;
    if (std::abs(dk - k * rec.delta) > 1e-6) {
      mi1 = false;
      detail1 << " k=" << k << " gap " << std::abs(dk - k * rec.delta) << ';';
    }
    std::optional<int> cz;
    if (rec.cz && adm) {
      cz = conley_zehnder(pk);
      if (!(std::abs(*cz - dk) < n)) {
        mi4 = false;
        detail4 << " k=" << k << " cz " << *cz << " delta " << dk << ';';
      }
    }
    row["cz"] = cz ? Json(*cz) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  j["iterations"] = std::move(rows);
  r.checks.push_back({"mean index homogeneity", "Δ(Ψ^k) = kΔ(Ψ)", mi1, detail1.str()});
  if (rec.cz) r.checks.push_back({"cz near mean index", "|μ_CZ - Δ| < n", mi4, detail4.str()});
  cx.emit(r, "spectrum.json", j.dump(2) + "\n");
}

void task_persistence(Context& cx, TaskResult& r) {
  const auto rec = cx.record();
  std::vector<int> ks, skipped;
  for (int k : cx.sc.ks) (is_admissible_for(rec, k) ? ks : skipped).push_back(k);
  if (ks.empty()) throw Error(Errc::NotAdmissible, "no admissible k in the range");
  const auto rep = verify_persistence(cx.germ, rec, ks, cx.lf_options());
  r.checks = rep.checks;
  Json j = to_json(rep);
  j["skipped_inadmissible"] = skipped;
  cx.emit(r, "persistence.json", j.dump(2) + "\n");
  cx.emit(r, "persistence.csv", to_csv(rep));
}

void task_sdm(Context& cx, TaskResult& r) {
  const auto rec = cx.record();
  const auto ev = detect_sdm(cx.germ, rec, cx.sc.delta_tol, cx.lf_options());
  std::vector<int> ks;
  for (int k : cx.sc.ks)
    if (k >= 2) ks.push_back(k);
  const auto its = sdm_iterates(cx.germ, rec, ks, cx.sc.delta_tol, cx.lf_options());
  Json j = to_json(ev);
  Json arr = Json::array();
  bool closed = true;
  std::string bad;
  for (const auto& it : its) {
    arr.push_back({{"k", it.k}, {"is_sdm", it.is_sdm}, {"ranks", to_json(it.ranks)}});
    if (ev.is_sdm && !it.is_sdm) {
      closed = false;
      bad += " k=" + std::to_string(it.k);
    }
  }
  j["iterates"] = std::move(arr);
  r.checks.push_back({"iteration closure", "an SDM stays an SDM under admissible iteration", closed, bad});
  if (ev.strongly_degenerate && ev.is_sdm)
    r.checks.push_back({"strong-degeneracy cross-check", "SDM with unipotent linearization has HF_n(k) != 0, k >= n+1",
                        ev.cross_check.value_or(false), ""});
  cx.emit(r, "sdm.json", j.dump(2) + "\n");
}

void task_isolation(Context& cx, TaskResult& r) {
  const GermMap phi = germ_map(translate(cx.germ, cx.point), 1);
  const int m = 2 * cx.germ.n;
  const bool unipotent_id = (phi.jacobian(Vec::Zero(m)) - Mat::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-7;
  Json searches = Json::array();
  const bool isolated = periodic_point_search(phi, 1, cx.sc.radii).isolation_holds;
  r.checks.push_back({"isolated fixed point", "the fixed point is isolated at k = 1", isolated, ""});
  bool persists = true;
  std::string detail;
  for (int k : cx.sc.ks) {
    const auto s = periodic_point_search(phi, k, cx.sc.radii);
    Json sj = to_json(s);
    if (isolated && s.admissible && !s.isolation_holds) {
      persists = false;
      detail += " k=" + std::to_string(k);
    }
    if (unipotent_id && k >= 2) sj["contraction"] = to_json(contraction_check(phi, k, Box::cube(m, cx.sc.radii.back())));
    searches.push_back(std::move(sj));
  }
  r.checks.push_back({"isolation persists", "admissible iterates of an isolated fixed point stay isolated",
                      persists, detail});
  bool consistent = true;
  for (const auto& sj : searches)
    if (sj.contains("contraction") && sj["contraction"]["certified"].get<bool>() &&
        !sj["contraction"]["search_agrees"].get<bool>())
      consistent = false;
  if (unipotent_id)
    r.checks.push_back({"contraction certificate", "sup‖Dφ - I‖ < 1/c(k) excludes non-fixed k-orbits",
                        consistent, ""});
  // The L¹ inequality on random zero-mean sequences.
  const int kc = std::max(2, cx.sc.ks.back());
  bool l1 = true;
  std::string l1_detail;
  for (int k = 2; k <= kc; ++k) {
    const double c = c_constant(k).value;
    for (int dim : {1, 2}) {
      const double worst = sampled_l1_ratio(k, dim, 10000, cx.sc.seed + 1000 * k + dim);
      if (worst > c * (1 + 1e-12)) {
        l1 = false;
        l1_detail += " k=" + std::to_string(k) + " m=" + std::to_string(dim);
      }
    }
  }
  r.checks.push_back({"discrete L1 inequality", "‖ξ‖ ≤ c(k)‖ξ̇‖ for zero-mean ξ", l1, l1_detail});
  Json j;
  j["searches"] = std::move(searches);
  cx.emit(r, "isolation.json", j.dump(2) + "\n");
  cx.emit(r, "c_table.csv", c_table_csv(kc));
}

void task_gaps(Context& cx, TaskResult& r) {
  const Box box = cx.sc.box > 0 ? Box::cube(2 * cx.germ.n, cx.sc.box) : cx.germ.domain;
  const auto search = find_fixed_points(cx.germ, box, cx.sc.grid, cx.sc.newton_tol);
  Json recs = Json::array();
  for (const auto& rec : search.records) recs.push_back(to_json(rec));
  Json rj;
  rj["records"] = std::move(recs);
  rj["non_isolated"] = search.non_isolated;
  rj["divergent_seeds"] = search.divergent_seeds;
  rj["diagnostics"] = search.diagnostics;
  cx.emit(r, "records.json", rj.dump(2) + "\n");
  r.checks.push_back({"isolated fixed points", "fixed points are isolated", !search.non_isolated, ""});
  if (search.records.size() < 2) {
    r.checks.push_back({"two or more orbits", "gaps need a pair of orbits", false,
                        std::to_string(search.records.size()) + " fixed point(s) found"});
    return;
  }
  std::vector<int> ks, skipped;
  for (int k : cx.sc.ks) {
    bool ok = true;
    for (const auto& rec : search.records) ok = ok && is_admissible_for(rec, k);
    (ok ? ks : skipped).push_back(k);
  }
  if (ks.empty()) throw Error(Errc::NotAdmissible, "no k in the range is admissible for every record");
  // Strongly degenerate records are admissible for all k, so the table is
  // built from the admissibility filter above rather than gap_table's own spectrum test.
  GapTable t;
  for (std::size_t i = 0; i < search.records.size(); ++i)
    for (std::size_t jx = i + 1; jx < search.records.size(); ++jx) {
      std::vector<FixedPointRecord> pair{search.records[i], search.records[jx]};
      bool degenerate_pair = !pair[0].cz || !pair[1].cz;
      GapTable sub;
      if (degenerate_pair) {
        for (int k : ks) {
          GapRow row;
          row.k = k;
          row.action_gap = std::abs(k * pair[0].action - k * pair[1].action);
          row.index_gap = std::abs(k * pair[0].delta - k * pair[1].delta);
          row.gamma = row.action_gap + row.index_gap;
          sub.rows.push_back(row);
        }
      } else {
        sub = gap_table(pair, ks);
      }
      for (auto row : sub.rows) {
        row.i = static_cast<int>(i);
        row.j = static_cast<int>(jx);
        t.rows.push_back(row);
      }
    }
  bool sum_ok = true, nonneg = true, linear = true;
  std::map<std::pair<int, int>, const GapRow*> first;
  for (const auto& row : t.rows) {
    sum_ok = sum_ok && row.gamma == row.action_gap + row.index_gap;
    nonneg = nonneg && row.action_gap >= 0 && row.index_gap >= 0;
    auto key = std::make_pair(row.i, row.j);
    if (!first.count(key)) first[key] = &row;
    const GapRow& f = *first[key];
    const double expect = f.gamma / f.k * row.k;
    linear = linear && std::abs(row.gamma - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
  }
  r.checks.push_back({"gamma is the sum", "Γ = action gap + index gap", sum_ok, ""});
  r.checks.push_back({"gaps nonnegative", "gaps are absolute differences", nonneg, ""});
  r.checks.push_back({"gaps linear in k", "A(γ^k) = kA(γ) and Δ(γ^k) = kΔ(γ)", linear, ""});
  Json gj = to_json(t);
  gj["skipped_inadmissible"] = skipped;
  cx.emit(r, "gaps.json", gj.dump(2) + "\n");
  cx.emit(r, "gaps.csv", to_csv(t));
}

void task_morse(Context& cx, TaskResult& r) {
  const int m = 2 * cx.germ.n;
  const auto& germ = cx.germ;
  const Vec p = cx.point;
  auto f = [&](const Vec& z) { return germ.value(0.0, p + z); };
  const std::vector<int> res = m == 2 ? std::vector<int>{65, 129} : std::vector<int>{9, 17};
  const auto hm = local_morse_homology(f, Box::cube(m, cx.sc.morse_radius), res);
  Json j = to_json(hm);
  j["euler"] = hm.ranks.euler();
  r.checks.push_back({"stabilized", "ranks agree at the two finest grids", true, hm.ranks.str()});
  if (m == 2) {
    const int deg = planar_degree([&](const Vec& z) { return germ.gradient(0.0, p + z); }, 0.5 * cx.sc.morse_radius);
    j["gradient_degree"] = deg;
    r.checks.push_back({"euler characteristic", "χ(HM) equals the degree of ∇f", deg == hm.ranks.euler(),
                        "degree " + std::to_string(deg) + ", euler " + std::to_string(hm.ranks.euler())});
  }
  cx.emit(r, "morse.json", j.dump(2) + "\n");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  bool schema_seen = false;
  std::string point_text;
  int point_line = 0, germ_line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (!seen.insert(key).second) fail(line, "repeated key '" + key + "'");
    if (!schema_seen && key != "schema") fail(line, "the first key must be 'schema'");
    if (key == "schema") {
      if (val != kSchema) fail(line, "unsupported schema '" + val + "' (expected " + kSchema + ")");
      schema_seen = true;
    } else if (key == "name") {
      sc.name = val;
    } else if (key == "germ") {
      sc.germ = val;
      germ_line = line;
    } else if (key == "params") {
      for (const auto& item : split_list(val)) {
        const auto e = item.find('=');
        if (e == std::string::npos) fail(line, "params entries are name=value");
        sc.params[item.substr(0, e)] = parse_real(item.substr(e + 1), line);
      }
    } else if (key == "box") {
      sc.box = parse_real(val, line);
      if (sc.box < 0) fail(line, "box must be nonnegative");
    } else if (key == "point") {
      point_text = val;
      point_line = line;
    } else if (key == "tasks") {
      for (const auto& t : split_list(val)) {
        if (!kTasks.count(t)) fail(line, "unknown task '" + t + "'");
        if (std::find(sc.tasks.begin(), sc.tasks.end(), t) == sc.tasks.end()) sc.tasks.push_back(t);
      }
    } else if (key == "k") {
      sc.ks = parse_ks(val, line);
    } else if (key == "radii") {
      sc.radii.clear();
      for (const auto& t : split_list(val)) {
        double r = parse_real(t, line);
        if (r <= 0) fail(line, "radii must be positive");
        sc.radii.push_back(r);
      }
      if (sc.radii.empty()) fail(line, "radii list is empty");
      std::sort(sc.radii.begin(), sc.radii.end(), std::greater<>());
    } else if (key == "delta_tol") {
      sc.delta_tol = parse_real(val, line);
    } else if (key == "newton_tol") {
      sc.newton_tol = parse_real(val, line);
    } else if (key == "c1_gate") {
      sc.c1_gate = parse_real(val, line);
    } else if (key == "grid") {
      sc.grid = static_cast<int>(parse_int(val, line));
      if (sc.grid < 1) fail(line, "grid must be positive");
    } else if (key == "gf_radius") {
      sc.gf_radius = parse_real(val, line);
    } else if (key == "morse_radius") {
      sc.morse_radius = parse_real(val, line);
    } else if (key == "seed") {
      long v = parse_int(val, line);
      if (v < 0) fail(line, "seed must be nonnegative");
      sc.seed = static_cast<std::uint64_t>(v);
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (!schema_seen) fail(line, "missing 'schema'");
  if (sc.germ.empty()) fail(line, "missing 'germ'");
  if (sc.tasks.empty()) fail(line, "missing 'tasks'");
  const CorpusEntry& entry = corpus_entry(sc.germ);  // UnknownFormula
  for (const auto& [k, v] : sc.params)
    if (!entry.defaults.count(k)) fail(germ_line, "germ '" + sc.germ + "' has no parameter '" + k + "'");
  if (!point_text.empty()) {
    auto parts = split_list(point_text);
    if (static_cast<int>(parts.size()) != 2 * entry.n)
      fail(point_line, "point needs " + std::to_string(2 * entry.n) + " coordinates");
    Vec p(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) p[i] = parse_real(parts[i], point_line);
    sc.point = p;
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    throw Error(Errc::ParseError, "line 0: cannot read " + path.string());
  }
  return parse_scenario(text);
}

RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  Context cx{sc, make_germ(sc.germ, sc.params, sc.box), Vec(), out_dir, {}};
  cx.point = sc.point ? *sc.point : Vec::Zero(2 * cx.germ.n);
  const std::map<std::string, std::function<void(Context&, TaskResult&)>> runners{
      {"spectrum", task_spectrum}, {"persistence", task_persistence}, {"sdm", task_sdm},
      {"isolation", task_isolation}, {"gaps", task_gaps},              {"morse", task_morse}};
  RunResult rr;
  rr.pass = true;
  Json tasks = Json::array();
  Json failed = Json::array();
  for (const auto& name : sc.tasks) {
    TaskResult tr;
    tr.task = name;
    try {
      runners.at(name)(cx, tr);
    } catch (const Error& e) {
      tr.ok = false;
      tr.error = e.what();
    }
    Json tj;
    tj["task"] = name;
    tj["status"] = tr.ok ? "ok" : "error";
    if (!tr.ok) tj["error"] = tr.error;
    tj["checks"] = to_json(tr.checks);
    tj["outputs"] = tr.outputs;
    tasks.push_back(std::move(tj));
    if (!tr.ok) {
      rr.pass = false;
      failed.push_back({{"task", name}, {"name", "module error"}, {"ref", tr.error}});
    }
    for (const auto& c : tr.checks)
      if (!c.pass) {
        rr.pass = false;
        failed.push_back({{"task", name}, {"name", c.name}, {"ref", c.ref}});
      }
    rr.tasks.push_back(std::move(tr));
  }
  Json params = Json::object();
  for (const auto& [k, v] : corpus_entry(sc.germ).defaults) params[k] = sc.params.count(k) ? sc.params.at(k) : v;
  Json s;
  s["schema"] = "hamiter-summary/1";
  s["scenario"] = sc.name;
  s["germ"] = {{"name", sc.germ}, {"formula", corpus_entry(sc.germ).formula}, {"params", params},
               {"point", to_json(cx.point)}};
  s["ks"] = sc.ks;
  s["seed"] = sc.seed;
  s["tasks"] = std::move(tasks);
  s["failed"] = std::move(failed);
  s["pass"] = rr.pass;
  rr.summary = s;
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, text] : cx.files) write_text(out_dir / name, text);
  write_text(out_dir / "summary.json", s.dump(2) + "\n");
  return rr;
}

}  // namespace hamiter
