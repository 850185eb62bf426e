#include "hamiter/genfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hamiter/parallel.hpp"

namespace hamiter {

namespace {
std::atomic<int> g_jobs{1};
}  // namespace

int jobs() { return g_jobs.load(); }
void set_jobs(int n) { g_jobs = std::max(1, n); }

namespace {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()[0];
}

std::vector<Vec> grid_samples(const Box& box, int per_axis) {
  const int d = box.dim();
  long total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;
  std::vector<Vec> pts;
  pts.reserve(total);
  for (long s = 0; s < total; ++s) {
    long rem = s;
    Vec z(d);
    for (int i = 0; i < d; ++i) {
      int c = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      z[i] = per_axis == 1 ? box.centre()[i] : box.lo[i] + (box.hi[i] - box.lo[i]) * c / (per_axis - 1);
    }
    pts.push_back(z);
  }
  return pts;
}

// Integrate the node gradients `g` from the origin node along axes in `order`.
std::vector<double> assemble(const ScalarField& grid, const std::vector<Vec>& g, const std::vector<int>& order) {
  const int m = grid.dim();
  const auto& res = grid.resolution();
  std::vector<int> origin(m);
  for (int a = 0; a < m; ++a) origin[a] = (res[a] - 1) / 2;
  std::vector<double> f(grid.size(), std::numeric_limits<double>::quiet_NaN());
  f[grid.index(origin)] = 0.0;
  for (int s = 0; s < m; ++s) {
    const int a = order[s];
    const double h = grid.spacing(a);
    const long st = grid.stride(a);
    for (long idx = 0; idx < grid.size(); ++idx) {
      auto c = grid.coords(idx);
      if (c[a] != origin[a]) continue;
      bool base = true;
      for (int r = s + 1; r < m; ++r)
        if (c[order[r]] != origin[order[r]]) base = false;
      if (!base) continue;
      for (int q = origin[a] + 1; q < res[a]; ++q) {
        long i1 = idx + (q - origin[a]) * st;
        f[i1] = f[i1 - st] + 0.5 * h * (g[i1 - st][a] + g[i1][a]);
      }
      for (int q = origin[a] - 1; q >= 0; --q) {
        long i0 = idx + (q - origin[a]) * st;
        f[i0] = f[i0 + st] - 0.5 * h * (g[i0][a] + g[i0 + st][a]);
      }
    }
  }
  return f;
}

double plaquette_defect(const ScalarField& grid, const std::vector<Vec>& g) {
  const int m = grid.dim();
  const auto& res = grid.resolution();
  double worst = 0.0;
  for (long idx = 0; idx < grid.size(); ++idx) {
    auto c = grid.coords(idx);
    for (int a = 0; a < m; ++a) {
      if (c[a] + 1 >= res[a]) continue;
      for (int b = a + 1; b < m; ++b) {
        if (c[b] + 1 >= res[b]) continue;
        const double ha = grid.spacing(a), hb = grid.spacing(b);
        long p = idx, pa = idx + grid.stride(a), pb = idx + grid.stride(b), pab = pa + grid.stride(b);
        double loop = 0.5 * ha * (g[p][a] + g[pa][a]) + 0.5 * hb * (g[pa][b] + g[pab][b]) -
                      0.5 * ha * (g[pb][a] + g[pab][a]) - 0.5 * hb * (g[p][b] + g[pb][b]);
        worst = std::max(worst, std::abs(loop));
      }
    }
  }
  return worst;
}

}  // namespace

ScalarField::ScalarField(Box box, std::vector<int> resolution)
    : box_(std::move(box)), resolution_(std::move(resolution)) {
  if (static_cast<int>(resolution_.size()) != box_.dim())
    throw Error(Errc::InvalidArgument, "resolution does not match box dimension");
  strides_.resize(resolution_.size());
  long total = 1;
  for (std::size_t a = 0; a < resolution_.size(); ++a) {
    if (resolution_[a] < 2) throw Error(Errc::InvalidArgument, "each axis needs at least two nodes");
    strides_[a] = total;
    total *= resolution_[a];
  }
  values_.assign(total, 0.0);
}

ScalarField ScalarField::sample(const Box& box, const std::vector<int>& resolution,
                                const std::function<double(const Vec&)>& f) {
  ScalarField s(box, resolution);
  parallel_for(s.size(), [&](long i) { s.values_[i] = f(s.node(i)); });
  return s;
}

double ScalarField::spacing(int axis) const {
  return (box_.hi[axis] - box_.lo[axis]) / (resolution_[axis] - 1);
}

std::vector<int> ScalarField::coords(long index) const {
  std::vector<int> c(resolution_.size());
  for (std::size_t a = 0; a < resolution_.size(); ++a) {
    c[a] = static_cast<int>(index % resolution_[a]);
    index /= resolution_[a];
  }
  return c;
}

long ScalarField::index(const std::vector<int>& c) const {
  long idx = 0;
  for (std::size_t a = 0; a < resolution_.size(); ++a) idx += c[a] * strides_[a];
  return idx;
}

Vec ScalarField::node(long index) const {
  auto c = coords(index);
  Vec z(dim());
  for (int a = 0; a < dim(); ++a) z[a] = box_.lo[a] + c[a] * spacing(a);
  return z;
}

long ScalarField::node_at(const Vec& z, double tol) const {
  std::vector<int> c(dim());
  for (int a = 0; a < dim(); ++a) {
    double q = (z[a] - box_.lo[a]) / spacing(a);
    double r = std::round(q);
    if (std::abs(q - r) > tol || r < 0 || r >= resolution_[a]) return -1;
    c[a] = static_cast<int>(r);
  }
  return index(c);
}

double ScalarField::operator()(const Vec& z) const {
  const int m = dim();
  std::vector<int> base(m);
  std::vector<double> frac(m);
  for (int a = 0; a < m; ++a) {
    double q = (z[a] - box_.lo[a]) / spacing(a);
    if (q < -1e-9 || q > resolution_[a] - 1 + 1e-9)
      throw Error(Errc::InvalidArgument, "interpolation point outside the field box");
    int b = std::clamp(static_cast<int>(std::floor(q)), 0, resolution_[a] - 2);
    base[a] = b;
    frac[a] = std::clamp(q - b, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int corner = 0; corner < (1 << m); ++corner) {
    double w = 1.0;
    long idx = 0;
    for (int a = 0; a < m; ++a) {
      int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx += (base[a] + bit) * strides_[a];
    }
    if (w != 0.0) sum += w * values_[idx];
  }
  return sum;
}

bool ScalarField::interior(long index, int margin) const {
  auto c = coords(index);
  for (int a = 0; a < dim(); ++a)
    if (c[a] < margin || c[a] > resolution_[a] - 1 - margin) return false;
  return true;
}

Vec ScalarField::gradient(long index) const {
  auto c = coords(index);
  Vec g(dim());
  for (int a = 0; a < dim(); ++a) {
    const double h = spacing(a);
    const long st = strides_[a];
    if (c[a] == 0)
      g[a] = (values_[index + st] - values_[index]) / h;
    else if (c[a] == resolution_[a] - 1)
      g[a] = (values_[index] - values_[index - st]) / h;
    else
      g[a] = (values_[index + st] - values_[index - st]) / (2 * h);
  }
  return g;
}

Mat ScalarField::hessian(long index) const {
  if (!interior(index)) throw Error(Errc::InvalidArgument, "Hessian needs an interior node");
  const int m = dim();
  Mat hs(m, m);
  for (int a = 0; a < m; ++a) {
    const double ha = spacing(a);
    const long sa = strides_[a];
    hs(a, a) = (values_[index + sa] - 2 * values_[index] + values_[index - sa]) / (ha * ha);
    for (int b = a + 1; b < m; ++b) {
      const double hb = spacing(b);
      const long sb = strides_[b];
      double v = (values_[index + sa + sb] - values_[index + sa - sb] - values_[index - sa + sb] +
                  values_[index - sa - sb]) /
                 (4 * ha * hb);
      hs(a, b) = hs(b, a) = v;
    }
  }
  return hs;
}

GermMap germ_map(const HamiltonianGerm& h, int k, FlowOptions opts) {
  HamiltonianGerm g = iterate(h, k);
  GermMap phi;
  phi.n = h.n;
  phi.box = h.domain;
  phi.eval = [g, opts](const Vec& z) { return flow_with_jacobian(g, z, 0.0, g.period_span, opts); };
  Vec o = phi(Vec::Zero(2 * h.n));
  if (o.norm() > 1e-9) throw Error(Errc::InvalidArgument, "germ map does not fix the origin");
  return phi;
}

GermMap linear_map(const Mat& m, const Box& box) {
  GermMap phi;
  phi.n = static_cast<int>(m.rows() / 2);
  phi.box = box;
  phi.eval = [m](const Vec& z) { return std::pair<Vec, Mat>(m * z, m); };
  return phi;
}

GermMap power(const GermMap& phi, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "power needs k >= 1");
  if (k == 1) return phi;
  GermMap out = phi;
  out.eval = [phi, k](const Vec& z) {
    Vec p = z;
    Mat j = Mat::Identity(z.size(), z.size());
    for (int i = 0; i < k; ++i) {
      auto [q, dq] = phi.eval(p);
      p = q;
      j = dq * j;
    }
    return std::pair<Vec, Mat>(p, j);
  };
  return out;
}

GermMap conjugate(const GermMap& phi, const Mat& c) {
  Mat ci = c.inverse();
  GermMap out = phi;
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.rows(); ++i) {
    double half = 0.5 * (phi.box.hi[i] - phi.box.lo[i]);
    r = std::min(r, half / c.row(i).cwiseAbs().sum());
  }
  out.box = Box::cube(static_cast<int>(c.rows()), r);
  out.eval = [phi, c, ci](const Vec& z) {
    auto [p, j] = phi.eval(c * z);
    return std::pair<Vec, Mat>(ci * p, ci * j * c);
  };
  return out;
}

Mat near_identity_conjugator(const Mat& m, double target) {
  const int n = static_cast<int>(m.rows() / 2);
  const Mat id = Mat::Identity(2 * n, 2 * n);
  for (int e = 0; e <= 40; ++e) {
    double c = std::ldexp(1.0, e);
    for (int flip = 0; flip < 2; ++flip) {
      double a = flip ? 1.0 / c : c;
      Mat conj = Mat::Zero(2 * n, 2 * n);
      conj.topLeftCorner(n, n) = a * Mat::Identity(n, n);
      conj.bottomRightCorner(n, n) = Mat::Identity(n, n) / a;
      Mat inv = Mat::Zero(2 * n, 2 * n);
      inv.topLeftCorner(n, n) = Mat::Identity(n, n) / a;
      inv.bottomRightCorner(n, n) = a * Mat::Identity(n, n);
      if (op_norm(inv * m * conj - id) <= target) return conj;
    }
  }
  throw Error(Errc::HypothesisFailed, "no diagonal symplectic scaling brings the linearization near the identity");
}

GermMap psi(const GermMap& phi, int k) {
  GermMap pk = power(phi, k);
  GermMap out = pk;
  const int n = phi.n;
  out.eval = [pk, n](const Vec& z) {
    auto [p, j] = pk.eval(z);
    Vec u = z;
    u.head(n) = p.head(n);
    Mat ju = Mat::Zero(2 * n, 2 * n);
    ju.topRows(n) = j.topRows(n);
    ju.bottomRightCorner(n, n) = Mat::Identity(n, n);
    return std::pair<Vec, Mat>(u, ju);
  };
  return out;
}

PsiInvertibility psi_invertibility(const GermMap& phi, int k, const Box& box, int samples_per_axis) {
  GermMap ps = psi(phi, k);
  PsiInvertibility r;
  const int d = 2 * phi.n;
  for (const Vec& z : grid_samples(box, samples_per_axis))
    r.max_deviation = std::max(r.max_deviation, op_norm(ps.jacobian(z) - Mat::Identity(d, d)));
  r.invertible = r.max_deviation < 1.0;
  if (!r.invertible)
    throw Error(Errc::NotInvertibleOnBox, "sup ‖Dψ − I‖ = " + std::to_string(r.max_deviation) + " ≥ 1");
  return r;
}

GeneratingFunction generating_function(const GermMap& phi, int k, const Box& box, const std::vector<int>& resolution,
                                       GFOptions opts) {
  const int n = phi.n, m = 2 * n;
  if (box.dim() != m) throw Error(Errc::InvalidArgument, "box dimension does not match the germ");
  for (int a = 0; a < m; ++a) {
    if (resolution[a] % 2 == 0) throw Error(Errc::InvalidArgument, "resolutions must be odd so 0 is a node");
    if (std::abs(box.lo[a] + box.hi[a]) > 1e-12 * (box.hi[a] - box.lo[a]))
      throw Error(Errc::InvalidArgument, "box must be centred at the origin");
  }
  GermMap pk = power(phi, k);
  GeneratingFunction gf;
  gf.k = k;
  gf.f = ScalarField(box, resolution);
  const long count = gf.f.size();
  gf.preimages.assign(count, Vec());
  gf.displacements.assign(count, Vec());
  std::vector<double> dev(count, 0.0);
  std::vector<int> failed(count, 0);
  const Mat id = Mat::Identity(m, m);

  // Invert ψ_k node by node: find x with (φ^k(x, Y))_x = X.
  parallel_for(count, [&](long i) {
    Vec u = gf.f.node(i);
    Vec z = u;
    std::pair<Vec, Mat> pj;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      pj = pk.eval(z);
      Vec g = pj.first.head(n) - u.head(n);
      if (g.norm() <= opts.newton_tol * std::max(1.0, u.head(n).norm())) {
        ok = true;
        break;
      }
      z.head(n) -= pj.second.topLeftCorner(n, n).lu().solve(g);
    }
    failed[i] = ok ? 0 : 1;
    gf.preimages[i] = z;
    gf.displacements[i] = pj.first - z;
    dev[i] = op_norm(pj.second - id);
  });
  for (long i = 0; i < count; ++i)
    if (failed[i])
      throw Error(Errc::NotInvertibleOnBox, "ψ inversion did not converge at node " + std::to_string(i));
  gf.c1_deviation = *std::max_element(dev.begin(), dev.end());
  if (gf.c1_deviation > opts.c1_gate)
    throw Error(Errc::NotC1Small, "sup ‖Dφ^k − I‖ = " + std::to_string(gf.c1_deviation) + " exceeds " +
                                      std::to_string(opts.c1_gate));

  // ∇F = (−d_y, d_x) from X_F = (F_y, −F_x) = d.
  std::vector<Vec> grad(count, Vec(m));
  for (long i = 0; i < count; ++i) {
    grad[i].head(n) = -gf.displacements[i].tail(n);
    grad[i].tail(n) = gf.displacements[i].head(n);
  }
  std::vector<int> order(m), reversed(m);
  for (int a = 0; a < m; ++a) order[a] = a, reversed[a] = m - 1 - a;
  gf.f.values() = assemble(gf.f, grad, order);
  auto alt = assemble(gf.f, grad, reversed);
  for (long i = 0; i < count; ++i) gf.path_discrepancy = std::max(gf.path_discrepancy, std::abs(alt[i] - gf.f[i]));
  gf.closedness_defect = plaquette_defect(gf.f, grad);
  if (gf.closedness_defect > opts.defect_tol)
    throw Error(Errc::ClosednessDefect, "plaquette defect " + std::to_string(gf.closedness_defect));

  for (long i = 0; i < count; ++i) {
    if (!gf.f.interior(i)) continue;
    Vec g = gf.f.gradient(i);
    Vec x(m);
    x.head(n) = g.tail(n);
    x.tail(n) = -g.head(n);
    gf.reconstruction_residual = std::max(gf.reconstruction_residual, (gf.displacements[i] - x).norm());
  }
  return gf;
}

GFPropertyReport gf_property_report(const GeneratingFunction& gf) {
  GFPropertyReport r;
  const ScalarField& f = gf.f;
  const long count = f.size();
  std::vector<double> a(count, std::numeric_limits<double>::infinity());
  std::vector<double> b(count, std::numeric_limits<double>::infinity());
  for (long i = 0; i < count; ++i) {
    if (!f.interior(i)) continue;
    a[i] = f.gradient(i).norm();
    b[i] = gf.displacements[i].norm();
    r.max_gradient_mismatch = std::max(r.max_gradient_mismatch, std::abs(a[i] - b[i]));
  }
  r.threshold = std::max(1e-10, 10 * r.max_gradient_mismatch);
  // A node is critical (fixed) when its value is a discrete local minimum below the threshold.
  auto local_min = [&](const std::vector<double>& v, long i) {
    if (!f.interior(i) || v[i] > r.threshold) return false;
    for (int ax = 0; ax < f.dim(); ++ax) {
      long s = f.stride(ax);
      if (v[i] > v[i + s] + 1e-3 * r.threshold || v[i] > v[i - s] + 1e-3 * r.threshold) return false;
    }
    return true;
  };
  std::vector<long> crit, fixed;
  for (long i = 0; i < count; ++i) {
    if (local_min(a, i)) crit.push_back(i);
    if (local_min(b, i)) fixed.push_back(i);
  }
  r.critical_nodes = static_cast<int>(crit.size());
  r.fixed_nodes = static_cast<int>(fixed.size());
  // Sets match within one grid cell: difference gradients near a degenerate
  // critical point blur it over its neighbours.
  auto near_any = [&](long i, const std::vector<long>& others) {
    const auto ci = f.coords(i);
    for (long j : others) {
      const auto cj = f.coords(j);
      bool close = true;
      for (int ax = 0; ax < f.dim() && close; ++ax) close = std::abs(ci[ax] - cj[ax]) <= 1;
      if (close) return true;
    }
    return false;
  };
  r.sets_match = true;
  for (long i : crit) r.sets_match = r.sets_match && near_any(i, fixed);
  for (long i : fixed) r.sets_match = r.sets_match && near_any(i, crit);
  return r;
}

void gf_ratio_sequence(const GermMap& phi, int k, const std::vector<double>& radii, int resolution,
                       GFPropertyReport& report, GFOptions opts) {
  const int m = 2 * phi.n;
  for (double rad : radii) {
    auto gf = generating_function(phi, k, Box::cube(m, rad), std::vector<int>(m, resolution), opts);
    double c2 = 0.0, c1 = gf.c1_deviation;
    for (long i = 0; i < gf.f.size(); ++i) {
      c1 = std::max(c1, gf.displacements[i].norm());
      if (!gf.f.interior(i)) continue;
      c2 = std::max({c2, std::abs(gf.f[i]), gf.f.gradient(i).norm(), op_norm(gf.f.hessian(i))});
    }
    report.box_radii.push_back(rad);
    report.c2_over_c1.push_back(c1 > 0 ? c2 / c1 : 0.0);
  }
  if (!report.c2_over_c1.empty()) {
    double first = report.c2_over_c1.front();
    double worst = *std::max_element(report.c2_over_c1.begin(), report.c2_over_c1.end());
    report.ratio_bounded = std::isfinite(worst) && worst <= 4 * std::max(first, 1e-300);
  }
}

IsolationScan homotopy_isolation_scan(const ScalarField& f, const ScalarField& fk, int k,
                                      const std::vector<double>& t_samples, Shell shell, double margin) {
  if (f.resolution() != fk.resolution()) throw Error(Errc::InvalidArgument, "fields must share a grid");
  IsolationScan s;
  s.min_gradient = std::numeric_limits<double>::infinity();
  int shell_nodes = 0;
  for (long i = 0; i < f.size(); ++i) {
    if (!f.interior(i)) continue;
    double r = f.node(i).norm();
    if (r < shell.r_inner || r > shell.r_outer) continue;
    ++shell_nodes;
    Vec g1 = f.gradient(i), gk = fk.gradient(i);
    for (double t : t_samples) {
      double v = (t * gk + (1 - t) * k * g1).norm();
      if (v < s.min_gradient) {
        s.min_gradient = v;
        s.worst_t = t;
      }
    }
  }
  if (shell_nodes == 0) {
    s.note = "shell contains no interior grid nodes";
    return s;
  }
  s.isolated = s.min_gradient > margin;
  if (!s.isolated) s.note = "NonIsolated: gradient of the homotopy vanishes on the shell";
  return s;
}

IterationBound iteration_bound(const GermMap& phi, int k, const Box& box, int samples_per_axis) {
  GermMap pk = power(phi, k);
  const int d = 2 * phi.n;
  IterationBound b;
  struct Sample {
    Vec e1, ek;
  };
  std::vector<Sample> samples;
  for (const Vec& z : grid_samples(box, samples_per_axis)) {
    auto [p, j] = phi.eval(z);
    Vec e1 = p - z;
    b.c1_norm = std::max({b.c1_norm, e1.norm(), op_norm(j - Mat::Identity(d, d))});
    if (e1.norm() <= 1e-14) continue;
    samples.push_back({e1, pk(z) - z});
  }
  for (const auto& s : samples) {
    if (b.c1_norm <= 0) break;
    b.constant = std::max(b.constant, (s.ek - k * s.e1).norm() / (b.c1_norm * s.e1.norm()));
  }
  return b;
}

}  // namespace hamiter
