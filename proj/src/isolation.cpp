#include "hamiter/isolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hamiter/parallel.hpp"

namespace hamiter {

Vec DiscreteOrbit::mean() const {
  Vec s = Vec::Zero(points.empty() ? 0 : points.front().size());
  for (const auto& p : points) s += p;
  return points.empty() ? s : Vec(s / k());
}

double DiscreteOrbit::l1_norm() const {
  double s = 0.0;
  for (const auto& p : points) s += p.norm();
  return s;
}

double DiscreteOrbit::derivative_l1_norm() const {
  double s = 0.0;
  for (int l = 0; l < k(); ++l) s += (points[(l + 1) % k()] - points[l]).norm();
  return s;
}

CConstant c_constant(int k) {
  if (k < 2) throw Error(Errc::InvalidArgument, "c(k) needs k >= 2");
  CConstant best;
  best.k = k;
  best.value = -1.0;
  // ξ is determined by ξ̇ up to a constant; zero mean fixes the constant.
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      std::vector<double> d(k, 0.0);
      d[i] = 0.5;
      d[j] = -0.5;
      std::vector<double> xi(k, 0.0);
      for (int l = 1; l < k; ++l) xi[l] = xi[l - 1] + d[l - 1];
      double mean = 0.0;
      for (double v : xi) mean += v;
      mean /= k;
      DiscreteOrbit orb;
      for (double v : xi) orb.points.push_back(Vec::Constant(1, v - mean));
      double val = orb.l1_norm();
      if (val > best.value + 1e-15) {
        best.value = val;
        best.maximizer = orb;
      }
    }
  return best;
}

double sampled_l1_ratio(int k, int m, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    DiscreteOrbit orb;
    for (int l = 0; l < k; ++l) {
      Vec v(m);
      for (int a = 0; a < m; ++a) v[a] = normal(rng);
      orb.points.push_back(v);
    }
    Vec mu = orb.mean();
    for (auto& p : orb.points) p -= mu;
    double dn = orb.derivative_l1_norm();
    if (dn > 0) worst = std::max(worst, orb.l1_norm() / dn);
  }
  return worst;
}

namespace {

bool linearization_admissible(const Mat& m, int k) {
  if (classify(m) == Degeneracy::StronglyDegenerate) return true;
  return admissible(SymplecticMatrix::validate(m, 1e-7), k);
}

struct SeedOutcome {
  enum Kind { Converged, Divergent, Escaped } kind = Divergent;
  Vec z;
  double residual = 0.0;
};

SeedOutcome newton_periodic(const GermMap& phik, const Vec& seed, double r, const SearchOptions& opts) {
  const int m = static_cast<int>(seed.size());
  const Mat id = Mat::Identity(m, m);
  SeedOutcome out;
  Vec z = seed;
  try {
    for (int it = 0; it < opts.max_iter; ++it) {
      auto [p, j] = phik.eval(z);
      Vec g = p - z;
      out.residual = g.norm();
      Eigen::JacobiSVD<Mat> svd(j - id, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      // Directions with negligible derivative are treated as neutral.
      const double cut = 1e-10 * std::max(1.0, sv[0]);
      Vec step = Vec::Zero(m);
      for (int a = 0; a < m; ++a)
        if (sv[a] > cut) step -= svd.matrixV().col(a) * (svd.matrixU().col(a).dot(g) / sv[a]);
      if (step.norm() <= 1e-12 * r) {
        out.z = z;
        out.kind = out.residual <= opts.residual_tol * std::max(r, 1e-300) ? SeedOutcome::Converged
                                                                            : SeedOutcome::Divergent;
        return out;
      }
      z += step;
      if (z.norm() > 2 * r) {
        out.kind = SeedOutcome::Escaped;
        return out;
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::LeftDomain && e.code() != Errc::StepFailure) throw;
    out.kind = SeedOutcome::Escaped;
    return out;
  }
  out.kind = SeedOutcome::Divergent;
  return out;
}

RadiusScan scan_ball(const GermMap& phi, const GermMap& phik, double r, const SearchOptions& opts) {
  const int m = 2 * phi.n;
  const int per_axis = m == 2 ? opts.seeds_per_axis_2d : opts.seeds_per_axis_4d;
  std::vector<Vec> seeds;
  long total = 1;
  for (int a = 0; a < m; ++a) total *= per_axis;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    Vec z(m);
    for (int a = 0; a < m; ++a) {
      z[a] = -r + 2 * r * static_cast<double>(rem % per_axis) / (per_axis - 1);
      rem /= per_axis;
    }
    if (z.norm() <= r * (1 + 1e-12)) seeds.push_back(z);
  }
  std::vector<SeedOutcome> outcomes(seeds.size());
  parallel_for(static_cast<long>(seeds.size()), [&](long i) { outcomes[i] = newton_periodic(phik, seeds[i], r, opts); });

  RadiusScan scan;
  scan.radius = r;
  scan.seeds = static_cast<int>(seeds.size());
  std::vector<PeriodicPoint> found;
  for (const auto& o : outcomes) {
    if (o.kind == SeedOutcome::Divergent) {
      ++scan.divergent;
      continue;
    }
    if (o.kind == SeedOutcome::Escaped || o.z.norm() > r * (1 + 1e-9)) {
      ++scan.escaped;
      continue;
    }
    PeriodicPoint p;
    p.z = o.z;
    p.norm = o.z.norm();
    p.residual = o.residual;
    p.at_origin = p.norm <= opts.origin_fraction * r;
    found.push_back(p);
  }
  std::sort(found.begin(), found.end(), [](const PeriodicPoint& a, const PeriodicPoint& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return std::lexicographical_compare(a.z.data(), a.z.data() + a.z.size(), b.z.data(), b.z.data() + b.z.size());
  });
  const double merge = 1e-6 * r;
  for (const auto& p : found) {
    bool dup = false;
    for (auto& q : scan.points)
      if ((p.at_origin && q.at_origin) || (p.z - q.z).norm() <= merge) {
        dup = true;
        break;
      }
    if (!dup) scan.points.push_back(p);
  }
  for (auto& p : scan.points) {
    p.fixed_residual = (phi(p.z) - p.z).norm();
    p.fixed = p.at_origin || p.fixed_residual <= opts.residual_tol * r;
    if (!p.at_origin) scan.only_origin = false;
  }
  return scan;
}

}  // namespace

PeriodicSearch periodic_point_search(const GermMap& phi, int k, std::vector<double> radii, SearchOptions opts) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be positive");
  if (radii.empty()) throw Error(Errc::InvalidArgument, "at least one radius is required");
  const int m = 2 * phi.n;
  if (phi(Vec::Zero(m)).norm() > 1e-9) throw Error(Errc::InvalidArgument, "0 is not a fixed point");
  PeriodicSearch out;
  out.k = k;
  out.admissible = linearization_admissible(phi.jacobian(Vec::Zero(m)), k);
  std::sort(radii.begin(), radii.end(), std::greater<>());
  GermMap phik = power(phi, k);
  for (double r : radii) out.scans.push_back(scan_ball(phi, phik, r, opts));
  out.isolation_holds = out.scans.back().only_origin;
  return out;
}

ContractionCheck contraction_check(const GermMap& phi, int k, const Box& box, int samples_per_axis,
                                   bool cross_validate) {
  const int m = 2 * phi.n;
  const Mat id = Mat::Identity(m, m);
  Mat d0 = phi.jacobian(Vec::Zero(m));
  if ((d0 - id).cwiseAbs().maxCoeff() > 1e-7)
    throw Error(Errc::LinearizationNotIdentity, "dφ(0) differs from the identity");
  ContractionCheck c;
  c.k = k;
  c.threshold = 1.0 / c_constant(std::max(k, 2)).value;
  long total = 1;
  for (int a = 0; a < m; ++a) total *= samples_per_axis;
  std::vector<double> norms(total, 0.0);
  parallel_for(total, [&](long s) {
    long rem = s;
    Vec z(m);
    for (int a = 0; a < m; ++a) {
      z[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * static_cast<double>(rem % samples_per_axis) / (samples_per_axis - 1);
      rem /= samples_per_axis;
    }
    Eigen::JacobiSVD<Mat> svd(phi.jacobian(z) - id);
    norms[s] = svd.singularValues()[0];
  });
  c.sup_norm = *std::max_element(norms.begin(), norms.end());
  c.certified = c.sup_norm < c.threshold;
  if (c.certified && cross_validate) {
    double r = std::numeric_limits<double>::infinity();
    for (int a = 0; a < m; ++a) r = std::min({r, -box.lo[a], box.hi[a]});
    auto search = periodic_point_search(phi, k, {r});
    bool agrees = true;
    for (const auto& p : search.scans.back().points) agrees = agrees && p.fixed;
    c.search_agrees = agrees;
  }
  return c;
}

}  // namespace hamiter
