#include "hamiter/locinv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hamiter {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double op_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()[0];
}

bool is_admissible(const FixedPointRecord& rec, int k) {
  if (rec.degeneracy == Degeneracy::StronglyDegenerate) return true;
  return admissible(SymplecticMatrix::validate(rec.linearization, 1e-7), k);
}

std::vector<Vec> lattice(const Box& box, int per_axis) {
  const int d = box.dim();
  long total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  std::vector<Vec> pts;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    Vec z(d);
    for (int i = 0; i < d; ++i) {
      int c = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      z[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * c / (per_axis - 1);
    }
    pts.push_back(z);
  }
  return pts;
}

// w with ψ(w) = u, i.e. (φ(w))_x = u_x and w_y = u_y.
std::optional<Vec> psi_inverse(const GermMap& phi, const Vec& u) {
  const int n = phi.n;
  Vec w = u;
  for (int it = 0; it < 60; ++it) {
    auto [p, j] = phi.eval(w);
    Vec g = p.head(n) - u.head(n);
    if (g.norm() <= 1e-14 * std::max(1.0, u.head(n).norm())) return w;
    w.head(n) -= j.topLeftCorner(n, n).lu().solve(g);
  }
  return std::nullopt;
}

BridgeCheck bridge_check(const GermMap& phi, const ScalarField& f, double radius) {
  BridgeCheck b;
  b.evaluated = true;
  b.box_radius = radius;
  const int m = 2 * phi.n;
  const int per_axis = m == 2 ? 17 : 5;
  for (const Vec& z : lattice(Box::cube(m, radius), per_axis)) {
    if (z.norm() == 0.0) continue;
    Vec at_psi = phi(z) - z;  // X_F(ψ(z))
    auto w = psi_inverse(phi, z);
    if (!w) continue;
    Vec at_z = phi(*w) - *w;  // X_F(z)
    if (at_z.norm() <= 1e-300) continue;
    b.epsilon = std::max(b.epsilon, (at_psi - at_z).norm() / at_z.norm());
  }
  long origin = f.node_at(Vec::Zero(m));
  b.hessian_norm = op_norm(f.hessian(origin));
  b.passed = b.epsilon < 1.0 && b.epsilon / (1.0 - b.epsilon) + b.hessian_norm < kTwoPi;
  return b;
}

LocalFloer route_nondegenerate(const FixedPointRecord& rec, int k) {
  LocalFloer lf;
  lf.route = Route::Nondegenerate;
  lf.convention = ShiftConvention::CzAnchor;
  SymplecticPath pk = iterate_path(rec.monodromy, k);
  int cz = conley_zehnder(pk);
  lf.ranks.set(cz, 1);
  lf.delta = k * rec.delta;
  return lf;
}

LocalFloer route_degenerate(const HamiltonianGerm& h, const FixedPointRecord& rec, int k,
                            const LocalFloerOptions& opts) {
  const int n = h.n, m = 2 * n;
  LocalFloer lf;
  lf.route = Route::StronglyDegenerate;
  lf.convention = ShiftConvention::GenfunN0;
  lf.delta = k * rec.delta;
  HamiltonianGerm g = translate(h, rec.z);
  GermMap phik = germ_map(g, k);
  Mat mk = Mat::Identity(m, m);
  for (int i = 0; i < k; ++i) mk = rec.linearization * mk;
  bool conj = false;
  if (op_norm(mk - Mat::Identity(m, m)) > 0.25 * opts.gf.c1_gate) {
    phik = conjugate(phik, near_identity_conjugator(mk, 0.25 * opts.gf.c1_gate));
    conj = true;
  }
  double limit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < m; ++a) limit = std::min({limit, -phik.box.lo[a], phik.box.hi[a]});
  double r = std::min(opts.box_radius, 0.5 * limit);
  const auto& res = m == 2 ? opts.resolutions_2d : opts.resolutions_4d;
  std::vector<ScalarField> fields;
  std::string last_error;
  for (int attempt = 0; attempt <= opts.max_shrinks; ++attempt, r *= 0.5) {
    // Cheap C¹ pre-scan before the full grid solve.
    double dev = 0.0;
    try {
      for (const Vec& z : lattice(Box::cube(m, r), m == 2 ? 9 : 5))
        dev = std::max(dev, op_norm(phik.jacobian(z) - Mat::Identity(m, m)));
    } catch (const Error& e) {
      if (e.code() != Errc::LeftDomain && e.code() != Errc::StepFailure) throw;
      last_error = e.what();
      continue;
    }
    if (dev > opts.gf.c1_gate) {
      last_error = "sup ‖Dφ^k − I‖ = " + std::to_string(dev) + " at radius " + std::to_string(r);
      continue;
    }
    try {
      fields.clear();
      for (int q : res)
        fields.push_back(generating_function(phik, 1, Box::cube(m, r), std::vector<int>(m, q), opts.gf).f);
      break;
    } catch (const Error& e) {
      const auto c = e.code();
      if (c != Errc::NotC1Small && c != Errc::NotInvertibleOnBox && c != Errc::LeftDomain &&
          c != Errc::ClosednessDefect && c != Errc::StepFailure)
        throw;
      last_error = e.what();
      fields.clear();
    }
  }
  if (fields.empty())
    throw Error(Errc::HypothesisFailed, "no box passed the generating-function gates: " + last_error);
  lf.bridge = bridge_check(phik, fields.back(), r);
  lf.bridge.conjugated = conj;
  if (!lf.bridge.passed) {
    std::ostringstream os;
    os << "bridge bounds fail: epsilon = " << lf.bridge.epsilon << ", |d2F(0)| = " << lf.bridge.hessian_norm;
    throw Error(Errc::HypothesisFailed, os.str());
  }
  MorseResult hm = local_morse_homology(fields);
  lf.ranks = hm.ranks.shifted(-n);
  return lf;
}

LocalFloer route_split(const HamiltonianGerm& h, const FixedPointRecord& rec, int k, const LocalFloerOptions& opts) {
  const auto& [fa, fb] = *h.factors;
  const int na = fa.n, nb = fb.n;
  Vec za(2 * na), zb(2 * nb);
  for (int i = 0; i < 2 * na; ++i) za[i] = rec.z[product_index_a(i, na, nb)];
  for (int i = 0; i < 2 * nb; ++i) zb[i] = rec.z[product_index_b(i, na, nb)];
  LocalFloerOptions sub = opts;
  sub.prefer_split = false;
  LocalFloer a = local_floer(fa, make_record(fa, za), k, sub);
  LocalFloer b = local_floer(fb, make_record(fb, zb), k, sub);
  LocalFloer lf;
  lf.route = Route::Split;
  lf.convention = ShiftConvention::KunnethProduct;
  lf.ranks = kunneth(a.ranks, b.ranks);
  lf.delta = a.delta + b.delta;
  return lf;
}

}  // namespace

std::string to_string(Route r) {
  switch (r) {
    case Route::Nondegenerate: return "nondegenerate";
    case Route::StronglyDegenerate: return "strongly_degenerate";
    case Route::Split: return "split";
  }
  return "unknown";
}

std::string to_string(ShiftConvention c) {
  switch (c) {
    case ShiftConvention::CzAnchor: return "cz_anchor";
    case ShiftConvention::GenfunN0: return "genfun_N0";
    case ShiftConvention::KunnethProduct: return "kunneth_product";
  }
  return "unknown";
}

LocalFloer local_floer(const HamiltonianGerm& h, const FixedPointRecord& record, int k, LocalFloerOptions opts) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be positive");
  if (!is_admissible(record, k)) throw Error(Errc::NotAdmissible, "k = " + std::to_string(k) + " is not admissible");
  LocalFloer lf;
  if (opts.prefer_split && h.factors)
    lf = route_split(h, record, k, opts);
  else if (record.degeneracy == Degeneracy::Nondegenerate)
    lf = route_nondegenerate(record, k);
  else if (record.degeneracy == Degeneracy::StronglyDegenerate)
    lf = route_degenerate(h, record, k, opts);
  else if (h.factors)
    lf = route_split(h, record, k, opts);
  else
    throw Error(Errc::RouteUnavailable, "weakly degenerate germ '" + h.name + "' without a product splitting");
  lf.n = h.n;
  lf.k = k;
  return lf;
}

GradedRanks kunneth(const GradedRanks& a, const GradedRanks& b) {
  std::map<int, int> out;
  for (auto [i, ra] : a.map())
    for (auto [j, rb] : b.map()) out[i + j] += ra * rb;
  return GradedRanks(out);
}

std::optional<int> degree_shift(const GradedRanks& a, const GradedRanks& b) {
  if (a.empty() && b.empty()) return std::nullopt;
  if (a.empty() || b.empty()) throw Error(Errc::ShiftAmbiguous, "one side is zero: " + a.str() + " vs " + b.str());
  int s = *b.min_degree() - *a.min_degree();
  if (!(a.shifted(s) == b)) throw Error(Errc::ShiftAmbiguous, "no shift aligns " + a.str() + " with " + b.str());
  return s;
}

std::vector<int> admissible_iterations(const FixedPointRecord& record, int k_max) {
  std::vector<int> ks;
  for (int k = 1; k <= k_max; ++k)
    if (is_admissible(record, k)) ks.push_back(k);
  return ks;
}

PersistenceReport verify_persistence(const HamiltonianGerm& h, const FixedPointRecord& record,
                                     const std::vector<int>& ks, LocalFloerOptions opts) {
  for (int k : ks)
    if (!is_admissible(record, k)) throw Error(Errc::NotAdmissible, "k = " + std::to_string(k) + " is not admissible");
  PersistenceReport rep;
  rep.n = h.n;
  rep.delta = record.delta;
  const int n = h.n;
  const double tol = 1e-6;
  LocalFloer base = local_floer(h, record, 1, opts);
  const bool strongly = record.degeneracy == Degeneracy::StronglyDegenerate;
  std::optional<EigenData> spec;
  if (!strongly) spec = spectrum(SymplecticMatrix::validate(record.linearization, 1e-7));

  bool even_ok = true, window_ok = true, support_ok = true, zero_ok = true, bounded = true;
  const bool zero_clause = std::abs(record.delta) <= tol && base.ranks[n] != 0;
  std::ostringstream fails;
  for (int k : ks) {
    PersistenceRow row;
    row.k = k;
    row.admissible = true;
    row.good = strongly ? true : good(*spec, k);
    LocalFloer lf = k == 1 ? base : local_floer(h, record, k, opts);
    row.ranks = lf.ranks;
    row.route = lf.route;
    row.s_k = degree_shift(base.ranks, lf.ranks);
    const double kd = k * record.delta;
    if (row.s_k) {
      row.s_k_even = *row.s_k % 2 == 0;
      row.limit_gap = std::abs(static_cast<double>(*row.s_k) / k - record.delta);
      if (row.good && !*row.s_k_even) {
        even_ok = false;
        fails << " odd s_" << k << " at good k;";
      }
      for (auto [l, r] : base.ranks.map())
        if (std::abs(*row.s_k + l - kd) > n + tol) row.window_ok = false;
      if (zero_clause && *row.s_k != 0) {
        zero_ok = false;
        fails << " s_" << k << " != 0;";
      }
    }
    for (auto [d, r] : row.ranks.map())
      if (d < kd - n - tol || d > kd + n + tol) row.support_ok = false;
    if (row.ranks.total() != base.ranks.total()) bounded = false;
    window_ok = window_ok && row.window_ok;
    support_ok = support_ok && row.support_ok;
    rep.rows.push_back(row);
  }
  rep.checks.push_back({"s_k even for good k", "shift is even at good iterations", even_ok, fails.str()});
  rep.checks.push_back({"shift window", "|s_k + l - k*Delta| <= n", window_ok, ""});
  rep.checks.push_back({"support window", "supported in [k*Delta - n, k*Delta + n]", support_ok, ""});
  if (zero_clause)
    rep.checks.push_back({"all s_k zero", "Delta = 0 and HF_n != 0 force zero shifts", zero_ok, fails.str()});
  rep.checks.push_back({"rank bounded", "total rank independent of k", bounded, ""});
  return rep;
}

SdmEvidence detect_sdm(const HamiltonianGerm& h, const FixedPointRecord& record, double delta_tol,
                       LocalFloerOptions opts) {
  SdmEvidence ev;
  const int n = h.n;
  LocalFloer lf = local_floer(h, record, 1, opts);
  ev.delta = record.delta;
  ev.hf_n_rank = lf.ranks[n];
  ev.strongly_degenerate = record.degeneracy == Degeneracy::StronglyDegenerate;
  ev.is_sdm = std::abs(ev.delta) <= delta_tol && ev.hf_n_rank >= 1;
  if (ev.strongly_degenerate) {
    ev.cross_check_k = n + 1;
    ev.cross_check = local_floer(h, record, ev.cross_check_k, opts).ranks[n] >= 1;
  } else {
    ev.cross_check = false;
  }
  return ev;
}

std::vector<SdmIterate> sdm_iterates(const HamiltonianGerm& h, const FixedPointRecord& record,
                                     const std::vector<int>& ks, double delta_tol, LocalFloerOptions opts) {
  std::vector<SdmIterate> out;
  for (int k : ks) {
    if (!is_admissible(record, k)) continue;
    LocalFloer lf = local_floer(h, record, k, opts);
    out.push_back({k, std::abs(lf.delta) <= delta_tol && lf.ranks[h.n] >= 1, lf.ranks});
  }
  return out;
}

}  // namespace hamiter
