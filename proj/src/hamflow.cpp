#include "hamiter/hamflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "hamiter/parallel.hpp"

namespace hamiter {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Stepper = odeint::runge_kutta_fehlberg78<State>;

Vec to_vec(const State& s, int offset, int len) {
  Vec v(len);
  for (int i = 0; i < len; ++i) v[i] = s[offset + i];
  return v;
}

[[noreturn]] void rethrow_step_failure(const std::exception& e) {
  throw Error(Errc::StepFailure, std::string("integrator: ") + e.what());
}

void check_inside(const HamiltonianGerm& h, const Vec& z, double t, const FlowOptions& opts) {
  if (!opts.check_domain) return;
  if (!z.allFinite() || !h.domain.contains(z, 1e-12)) {
    throw Error(Errc::LeftDomain, "trajectory of " + h.name + " left the domain at t = " + std::to_string(t));
  }
}

// Integrate z' = X_H and, when `with_jacobian`, Φ' = 𝕁 Hess H Φ, reporting the
// state at every requested time (ascending, first = start time).
std::vector<State> integrate(const HamiltonianGerm& h, const Vec& z0, const std::vector<double>& times,
                             bool with_jacobian, const FlowOptions& opts) {
  const int d = 2 * h.n;
  const Mat jmat = poisson_matrix(h.n);
  State x(with_jacobian ? d + d * d : d, 0.0);
  for (int i = 0; i < d; ++i) x[i] = z0[i];
  if (with_jacobian)
    for (int i = 0; i < d; ++i) x[d + i * d + i] = 1.0;

  auto sys = [&](const State& s, State& ds, double t) {
    Vec z = to_vec(s, 0, d);
    Vec v = h.field(t, z);
    for (int i = 0; i < d; ++i) ds[i] = v[i];
    if (with_jacobian) {
      Eigen::Map<const Mat> phi(s.data() + d, d, d);
      Eigen::Map<Mat> dphi(ds.data() + d, d, d);
      dphi = jmat * h.hessian(t, z) * phi;
    }
  };

  std::vector<State> out;
  out.reserve(times.size());
  auto observer = [&](const State& s, double t) {
    check_inside(h, to_vec(s, 0, d), t, opts);
    out.push_back(s);
  };
  if (times.size() == 1) {
    out.push_back(x);
    return out;
  }
  double dt = std::copysign(std::min(opts.initial_dt, std::abs(times.back() - times.front())),
                            times.back() - times.front());
  try {
    auto stepper = odeint::make_controlled<Stepper>(opts.abs_tol, opts.rel_tol);
    odeint::integrate_times(stepper, sys, x, times.begin(), times.end(), dt, observer);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    rethrow_step_failure(e);
  }
  return out;
}

Mat jacobian_of(const State& s, int d) {
  Mat phi(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) phi(r, c) = s[d + c * d + r];
  return phi;
}

double fd_step(const HamiltonianGerm& h) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * h.fd_scale;
}

double wrap_time(double t) { return t - std::floor(t); }

}  // namespace

Box Box::cube(int dim, double radius) { return {Vec::Constant(dim, -radius), Vec::Constant(dim, radius)}; }

Box Box::around(const Vec& centre, double radius) {
  return {centre.array() - radius, centre.array() + radius};
}

bool Box::contains(const Vec& z, double slack) const {
  for (int i = 0; i < dim(); ++i)
    if (z[i] < lo[i] - slack || z[i] > hi[i] + slack) return false;
  return true;
}

Vec HamiltonianGerm::gradient(double t, const Vec& z) const {
  if (grad) return grad(t, z);
  const double step = fd_step(*this);
  Vec g(z.size());
  Vec zp = z, zm = z;
  for (int i = 0; i < z.size(); ++i) {
    zp[i] = z[i] + step;
    zm[i] = z[i] - step;
    g[i] = (h(t, zp) - h(t, zm)) / (2 * step);
    zp[i] = zm[i] = z[i];
  }
  return g;
}

Mat HamiltonianGerm::hessian(double t, const Vec& z) const {
  if (hess) return hess(t, z);
  const double step = fd_step(*this);
  const int d = static_cast<int>(z.size());
  Mat m(d, d);
  Vec zp = z, zm = z;
  for (int i = 0; i < d; ++i) {
    zp[i] = z[i] + step;
    zm[i] = z[i] - step;
    m.col(i) = (gradient(t, zp) - gradient(t, zm)) / (2 * step);
    zp[i] = zm[i] = z[i];
  }
  return 0.5 * (m + m.transpose());
}

Vec HamiltonianGerm::field(double t, const Vec& z) const {
  Vec g = gradient(t, z);
  Vec v(2 * n);
  v.head(n) = g.tail(n);
  v.tail(n) = -g.head(n);
  return v;
}

FlowResult flow(const HamiltonianGerm& h, const Vec& z0, double t0, double t1, FlowOptions opts) {
  check_inside(h, z0, t0, opts);
  auto states = integrate(h, z0, {t0, t1}, false, opts);
  FlowResult r;
  r.z = to_vec(states.back(), 0, 2 * h.n);
  r.energy_drift = h.autonomous ? std::abs(h.value(t1, r.z) - h.value(t0, z0))
                                : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::pair<Vec, Mat> flow_with_jacobian(const HamiltonianGerm& h, const Vec& z0, double t0, double t1,
                                       FlowOptions opts) {
  check_inside(h, z0, t0, opts);
  auto states = integrate(h, z0, {t0, t1}, true, opts);
  const int d = 2 * h.n;
  return {to_vec(states.back(), 0, d), jacobian_of(states.back(), d)};
}

Vec time_one_map(const HamiltonianGerm& h, const Vec& z, FlowOptions opts) {
  return flow(h, z, 0.0, h.period_span, opts).z;
}

std::vector<Vec> orbit(const HamiltonianGerm& h, const Vec& z, const std::vector<double>& s, FlowOptions opts) {
  std::vector<double> times;
  bool prepend = s.empty() || s.front() > 0.0;
  if (prepend) times.push_back(0.0);
  for (double v : s) times.push_back(v * h.period_span);
  auto states = integrate(h, z, times, false, opts);
  std::vector<Vec> out;
  for (std::size_t i = prepend ? 1 : 0; i < states.size(); ++i) out.push_back(to_vec(states[i], 0, 2 * h.n));
  return out;
}

SymplecticPath monodromy(const HamiltonianGerm& h, const Vec& z, FlowOptions opts) {
  const int d = 2 * h.n;
  auto sampler = [h, z, opts, d](const std::vector<double>& s) {
    std::vector<double> times;
    bool prepend = s.front() > 0.0;
    if (prepend) times.push_back(0.0);
    for (double v : s) times.push_back(v * h.period_span);
    auto states = integrate(h, z, times, true, opts);
    std::vector<Mat> out;
    out.reserve(s.size());
    for (std::size_t i = prepend ? 1 : 0; i < states.size(); ++i) out.push_back(jacobian_of(states[i], d));
    return out;
  };
  return SymplecticPath(h.n, sampler, 64);
}

HamiltonianGerm iterate(const HamiltonianGerm& h, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "iterate needs k >= 1");
  HamiltonianGerm g = h;
  g.period_span = h.period_span * k;
  if (k > 1) g.name = h.name + "^#" + std::to_string(k);
  if (h.factors)
    g.factors = std::make_shared<const std::pair<HamiltonianGerm, HamiltonianGerm>>(
        iterate(h.factors->first, k), iterate(h.factors->second, k));
  return g;
}

double flat_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  double a = std::exp(-1.0 / s);
  double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double flat_step_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / s);
  double b = std::exp(-1.0 / (1.0 - s));
  double da = a / (s * s);
  double db = b / ((1.0 - s) * (1.0 - s));
  return (da * b + a * db) / ((a + b) * (a + b));
}

HamiltonianGerm compose(const HamiltonianGerm& k, const HamiltonianGerm& h) {
  if (k.n != h.n) throw Error(Errc::InvalidArgument, "compose needs equal dimensions");
  if (k.period_span != 1 || h.period_span != 1)
    throw Error(Errc::InvalidArgument, "compose needs one-periodic germs");
  HamiltonianGerm g;
  g.name = k.name + "#" + h.name;
  g.n = h.n;
  g.domain = {h.domain.lo.cwiseMax(k.domain.lo), h.domain.hi.cwiseMin(k.domain.hi)};
  g.autonomous = false;
  g.fd_scale = std::min(h.fd_scale, k.fd_scale);
  // Returns (germ, reparametrized time, speed) for normalized time t.
  auto phase = [k, h](double t) -> std::tuple<const HamiltonianGerm*, double, double> {
    double tau = wrap_time(t);
    if (tau < 0.5) return {&h, flat_step(2 * tau), 2 * flat_step_derivative(2 * tau)};
    return {&k, flat_step(2 * tau - 1), 2 * flat_step_derivative(2 * tau - 1)};
  };
  // The lambdas own copies of k and h through `phase`.
  g.h = [phase](double t, const Vec& z) {
    auto [germ, s, speed] = phase(t);
    return speed == 0.0 ? 0.0 : speed * germ->value(s, z);
  };
  g.grad = [phase](double t, const Vec& z) {
    auto [germ, s, speed] = phase(t);
    return Vec(speed == 0.0 ? Vec::Zero(z.size()) : Vec(speed * germ->gradient(s, z)));
  };
  g.hess = [phase](double t, const Vec& z) {
    auto [germ, s, speed] = phase(t);
    return Mat(speed == 0.0 ? Mat::Zero(z.size(), z.size()) : Mat(speed * germ->hessian(s, z)));
  };
  return g;
}

HamiltonianGerm product_germ(const HamiltonianGerm& a, const HamiltonianGerm& b) {
  if (a.period_span != b.period_span) throw Error(Errc::InvalidArgument, "product needs equal period spans");
  const int na = a.n, nb = b.n, n = na + nb;
  auto split = [na, nb](const Vec& z) {
    Vec za(2 * na), zb(2 * nb);
    for (int i = 0; i < 2 * na; ++i) za[i] = z[product_index_a(i, na, nb)];
    for (int i = 0; i < 2 * nb; ++i) zb[i] = z[product_index_b(i, na, nb)];
    return std::pair{za, zb};
  };
  auto join = [na, nb, n](const Vec& va, const Vec& vb) {
    Vec v(2 * n);
    for (int i = 0; i < 2 * na; ++i) v[product_index_a(i, na, nb)] = va[i];
    for (int i = 0; i < 2 * nb; ++i) v[product_index_b(i, na, nb)] = vb[i];
    return v;
  };
  HamiltonianGerm g;
  g.name = a.name + "x" + b.name;
  g.n = n;
  g.domain = {join(a.domain.lo, b.domain.lo), join(a.domain.hi, b.domain.hi)};
  g.period_span = a.period_span;
  g.autonomous = a.autonomous && b.autonomous;
  g.fd_scale = std::min(a.fd_scale, b.fd_scale);
  g.h = [a, b, split](double t, const Vec& z) {
    auto [za, zb] = split(z);
    return a.value(t, za) + b.value(t, zb);
  };
  g.grad = [a, b, split, join](double t, const Vec& z) {
    auto [za, zb] = split(z);
    return join(a.gradient(t, za), b.gradient(t, zb));
  };
  g.factors = std::make_shared<const std::pair<HamiltonianGerm, HamiltonianGerm>>(a, b);
  g.hess = [a, b, split, na, nb, n](double t, const Vec& z) {
    auto [za, zb] = split(z);
    Mat ha = a.hessian(t, za), hb = b.hessian(t, zb);
    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2 * na; ++i)
      for (int j = 0; j < 2 * na; ++j) m(product_index_a(i, na, nb), product_index_a(j, na, nb)) = ha(i, j);
    for (int i = 0; i < 2 * nb; ++i)
      for (int j = 0; j < 2 * nb; ++j) m(product_index_b(i, na, nb), product_index_b(j, na, nb)) = hb(i, j);
    return m;
  };
  return g;
}

HamiltonianGerm translate(const HamiltonianGerm& h, const Vec& p) {
  HamiltonianGerm g = h;
  g.domain = {h.domain.lo - p, h.domain.hi - p};
  g.h = [h, p](double t, const Vec& z) { return h.value(t, z + p); };
  g.grad = [h, p](double t, const Vec& z) { return h.gradient(t, z + p); };
  g.hess = [h, p](double t, const Vec& z) { return h.hessian(t, z + p); };
  return g;
}

std::string to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::Nondegenerate: return "nondegenerate";
    case Degeneracy::WeaklyDegenerate: return "weakly_degenerate";
    case Degeneracy::StronglyDegenerate: return "strongly_degenerate";
  }
  return "unknown";
}

Degeneracy classify(const Mat& m, double rank_tol) {
  int g = generalized_unit_dimension(m, rank_tol);
  if (g == 0) return Degeneracy::Nondegenerate;
  if (g == m.rows()) return Degeneracy::StronglyDegenerate;
  return Degeneracy::WeaklyDegenerate;
}

double action(const HamiltonianGerm& h, const std::vector<Vec>& loop, double closed_tol) {
  if (loop.size() < 2) throw Error(Errc::InvalidArgument, "loop needs at least two samples");
  double gap = (loop.back() - loop.front()).norm();
  if (gap > closed_tol) throw Error(Errc::NotClosed, "loop endpoints differ by " + std::to_string(gap));
  const int n = h.n;
  const int segs = static_cast<int>(loop.size()) - 1;
  const double dt = static_cast<double>(h.period_span) / segs;
  double ydx = 0.0, hint = 0.0;
  for (int i = 0; i < segs; ++i) {
    const Vec& a = loop[i];
    const Vec& b = loop[i + 1];
    for (int j = 0; j < n; ++j) ydx += 0.5 * (a[n + j] + b[n + j]) * (b[j] - a[j]);
    hint += 0.5 * dt * (h.value(i * dt, a) + h.value((i + 1) * dt, b));
  }
  return -ydx + hint;
}

double orbit_action(const HamiltonianGerm& h, const Vec& z, int segments, FlowOptions opts) {
  auto pts = orbit(h, z, uniform_times(segments), opts);
  const int n = h.n;
  const double dt = static_cast<double>(h.period_span) / segments;
  double total = 0.0;
  for (int i = 0; i <= segments; ++i) {
    double t = i * dt;
    Vec v = h.field(t, pts[i]);
    double f = h.value(t, pts[i]) - pts[i].tail(n).dot(v.head(n));
    total += (i == 0 || i == segments ? 0.5 : 1.0) * f * dt;
  }
  return total;
}

NewtonResult newton_fixed_point(const HamiltonianGerm& h, const Vec& seed, double newton_tol, int max_iter,
                                FlowOptions opts) {
  NewtonResult r;
  r.z = seed;
  const int d = 2 * h.n;
  try {
    for (int it = 0; it < max_iter; ++it) {
      auto [p, phi] = flow_with_jacobian(h, r.z, 0.0, h.period_span, opts);
      Vec res = p - r.z;
      r.residuals.push_back(res.norm());
      if (res.norm() == 0.0) break;
      Mat j = phi - Mat::Identity(d, d);
      Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-13);
      Vec step = -svd.solve(res);
      // Damp steps that would leave the domain.
      double scale = 1.0;
      while (!h.domain.contains(r.z + scale * step) && scale > 1e-6) scale *= 0.5;
      step *= scale;
      r.z += step;
      r.last_step = step.norm();
      if (r.last_step <= 1e-14 * std::max(1.0, r.z.norm())) {
        Vec fin = time_one_map(h, r.z, opts) - r.z;
        r.residuals.push_back(fin.norm());
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::LeftDomain && e.code() != Errc::StepFailure) throw;
    r.converged = false;
    return r;
  }
  r.converged = !r.residuals.empty() && r.residuals.back() <= newton_tol;
  return r;
}

FixedPointRecord make_record(const HamiltonianGerm& h, const Vec& z, double newton_tol, FlowOptions opts) {
  FixedPointRecord rec;
  rec.z = z;
  auto [p, phi] = flow_with_jacobian(h, z, 0.0, h.period_span, opts);
  rec.residual = (p - z).norm();
  if (rec.residual > newton_tol)
    throw Error(Errc::InvalidArgument, "make_record: residual " + std::to_string(rec.residual) + " above tolerance");
  rec.linearization = phi;
  rec.symplectic_defect = symplectic_defect(phi);
  SymplecticMatrix::validate(phi, 1e-7);
  rec.monodromy = monodromy(h, z, opts);
  rec.action = orbit_action(h, z, 256, opts);
  rec.delta = mean_index(rec.monodromy);
  rec.degeneracy = classify(phi);
  if (rec.degeneracy == Degeneracy::Nondegenerate) rec.cz = conley_zehnder(rec.monodromy);
  return rec;
}

FixedPointSearch find_fixed_points(const HamiltonianGerm& h, const Box& box, int grid_density, double newton_tol,
                                   FlowOptions opts) {
  const int d = 2 * h.n;
  if (grid_density < 1) throw Error(Errc::InvalidArgument, "grid_density must be positive");
  FixedPointSearch out;
  struct Hit {
    Vec z;
    double err;
    std::vector<double> residuals;
  };
  std::vector<Hit> hits;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= grid_density;
  double spacing = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d && grid_density > 1; ++i)
    spacing = std::min(spacing, (box.hi[i] - box.lo[i]) / (grid_density - 1));
  std::vector<NewtonResult> results(total);
  parallel_for(total, [&](long s) {
    long rem = s;
    Vec seed(d);
    for (int i = 0; i < d; ++i) {
      int c = static_cast<int>(rem % grid_density);
      rem /= grid_density;
      seed[i] = grid_density == 1 ? box.centre()[i]
                                  : box.lo[i] + (box.hi[i] - box.lo[i]) * c / (grid_density - 1);
    }
    results[s] = newton_fixed_point(h, seed, newton_tol, 300, opts);
  });
  for (const NewtonResult& nr : results) {
    if (!nr.converged || !box.contains(nr.z, 1e-12)) {
      if (!nr.converged) ++out.divergent_seeds;
      continue;
    }
    hits.push_back({nr.z, nr.last_step, nr.residuals});
  }
  // Deterministic merge: sort lexicographically, then greedy clustering.
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    for (int i = 0; i < a.z.size(); ++i)
      if (a.z[i] != b.z[i]) return a.z[i] < b.z[i];
    return false;
  });
  std::vector<Hit> unique;
  for (auto& hit : hits) {
    bool merged = false;
    for (auto& u : unique) {
      double radius = 10 * newton_tol + 10 * std::max(hit.err, u.err);
      if ((hit.z - u.z).norm() <= radius) {
        if (hit.residuals.back() < u.residuals.back()) u = hit;
        merged = true;
        break;
      }
    }
    if (!merged) unique.push_back(hit);
  }
  const double close = std::max(100 * newton_tol, 1.01 * spacing);
  for (std::size_t i = 0; i < unique.size(); ++i)
    for (std::size_t j = i + 1; j < unique.size(); ++j)
      if ((unique[i].z - unique[j].z).norm() <= close) out.non_isolated = true;
  if (out.non_isolated)
    out.diagnostics.push_back("NonIsolated: accepted fixed points closer than the grid spacing");
  if (out.divergent_seeds > 0)
    out.diagnostics.push_back("NewtonDivergence: " + std::to_string(out.divergent_seeds) + " seeds");
  for (auto& u : unique) {
    FixedPointRecord rec = make_record(h, u.z, newton_tol, opts);
    rec.newton_residuals = u.residuals;
    out.records.push_back(std::move(rec));
  }
  return out;
}

GapTable gap_table(const std::vector<FixedPointRecord>& records, const std::vector<int>& ks) {
  if (records.size() < 2) throw Error(Errc::InvalidArgument, "gap_table needs at least two records");
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto spec = spectrum(SymplecticMatrix::validate(records[r].linearization, 1e-7));
    for (int k : ks)
      if (!admissible(spec, k))
        throw Error(Errc::NotAdmissible, "k = " + std::to_string(k) + " not admissible for record " + std::to_string(r));
  }
  GapTable t;
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t j = i + 1; j < records.size(); ++j)
      for (int k : ks) {
        GapRow row;
        row.i = static_cast<int>(i);
        row.j = static_cast<int>(j);
        row.k = k;
        row.action_gap = std::abs(k * records[i].action - k * records[j].action);
        row.index_gap = std::abs(k * records[i].delta - k * records[j].delta);
        row.gamma = row.action_gap + row.index_gap;
        t.rows.push_back(row);
      }
  return t;
}

}  // namespace hamiter
