#pragma once

// Reference computations used only by tests.  Each one reaches its answer by a
// route that shares no code with the library routine it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
constexpr double pi = std::numbers::pi;

inline Mat poisson(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return j;
}

inline int signature(const Mat& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
  int s = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double e = es.eigenvalues()[i];
    if (std::abs(e) < 1e-9) return 1 << 20;  // degenerate crossing: oracle does not apply
    s += e > 0 ? 1 : -1;
  }
  return s;
}

/// Robbin–Salamon index of t ↦ exp(t·𝕁S), t ∈ [0, 1], via crossing forms
/// ⟨v, S v⟩ on ker(Ψ(t) − I), negated so that a small maximum gets +n.
/// Returns nullopt for a degenerate endpoint or an irregular crossing.
inline std::optional<int> crossing_form_cz(const Mat& s) {
  const int n = static_cast<int>(s.rows()) / 2;
  const Mat a = poisson(n) * s;
  auto psi = [&](double t) { return Mat((t * a).exp()); };
  auto smin = [&](double t) {
    Eigen::JacobiSVD<Mat> svd(psi(t) - Mat::Identity(2 * n, 2 * n));
    return svd.singularValues().minCoeff();
  };
  if (smin(1.0) < 1e-7) return std::nullopt;
  auto form_on_kernel = [&](double t) -> int {
    Eigen::JacobiSVD<Mat> svd(psi(t) - Mat::Identity(2 * n, 2 * n), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<int> cols;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] < 1e-5) cols.push_back(i);
    Mat v(2 * n, static_cast<long>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) v.col(static_cast<long>(c)) = svd.matrixV().col(cols[c]);
    return signature(v.transpose() * s * v);
  };
  int twice = signature(s);  // crossing at t = 0, counted with weight 1/2
  if (std::abs(twice) > 100) return std::nullopt;
  const int grid = 4000;
  std::vector<double> f(grid + 1);
  for (int i = 0; i <= grid; ++i) f[i] = smin(static_cast<double>(i) / grid);
  for (int i = 1; i < grid; ++i) {
    if (!(f[i] <= f[i - 1] && f[i] <= f[i + 1])) continue;
    double lo = static_cast<double>(i - 1) / grid, hi = static_cast<double>(i + 1) / grid;
    for (int it = 0; it < 200; ++it) {  // golden-section refinement of the minimum
      double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
      (smin(m1) < smin(m2) ? hi : lo) = smin(m1) < smin(m2) ? m2 : m1;
    }
    double t = 0.5 * (lo + hi);
    if (smin(t) > 1e-7) continue;
    int sig = form_on_kernel(t);
    if (std::abs(sig) > 100) return std::nullopt;
    twice += 2 * sig;
  }
  return -twice / 2;
}

/// Brouwer degree of a planar field on a circle by counting signed crossings
/// of the positive first axis.
inline int ray_crossing_degree(const std::function<Vec(const Vec&)>& v, double radius, int samples = 20000) {
  int deg = 0;
  auto at = [&](int i) {
    double t = 2 * pi * i / samples;
    Vec z(2);
    z << radius * std::cos(t), radius * std::sin(t);
    return v(z);
  };
  Vec prev = at(0);
  for (int i = 1; i <= samples; ++i) {
    Vec cur = at(i % samples);
    if (prev[1] < 0 && cur[1] >= 0) {
      double x = prev[0] + (cur[0] - prev[0]) * (-prev[1]) / (cur[1] - prev[1]);
      if (x > 0) ++deg;
    } else if (prev[1] >= 0 && cur[1] < 0) {
      double x = prev[0] + (cur[0] - prev[0]) * (-prev[1]) / (cur[1] - prev[1]);
      if (x > 0) --deg;
    }
    prev = cur;
  }
  return deg;
}

/// Fixed-point index of a planar map at an isolated fixed point: degree of
/// z ↦ z − φ(z) on a small circle.
inline int fixed_point_index(const std::function<Vec(const Vec&)>& phi, double radius, int samples = 2048) {
  return ray_crossing_degree([&](const Vec& z) { return Vec(z - phi(z)); }, radius, samples);
}

/// Critical points of f + ⟨c, z⟩ near 0 from Newton on a seed grid, counted by
/// Morse index.  The perturbed function must be Morse near 0.
inline std::map<int, int> morse_perturbation_counts(const std::function<Vec(const Vec&)>& grad,
                                                    const std::function<Mat(const Vec&)>& hess, const Vec& c,
                                                    double radius) {
  const int m = static_cast<int>(c.size());
  std::vector<Vec> found;
  const int per = m == 1 ? 401 : 41;
  long total = 1;
  for (int a = 0; a < m; ++a) total *= per;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    Vec z(m);
    for (int a = 0; a < m; ++a) {
      z[a] = -radius + 2 * radius * static_cast<double>(rem % per) / (per - 1);
      rem /= per;
    }
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      Vec g = grad(z) + c;
      if (g.norm() < 1e-13) {
        ok = true;
        break;
      }
      Mat h = hess(z);
      if (std::abs(h.determinant()) < 1e-300) break;
      z -= h.lu().solve(g);
      if (z.norm() > 2 * radius) break;
    }
    if (!ok || z.norm() > radius) continue;
    bool dup = false;
    for (const auto& f : found) dup = dup || (f - z).norm() < 1e-8;
    if (!dup) found.push_back(z);
  }
  std::map<int, int> counts;
  for (const auto& z : found) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hess(z));
    int idx = 0;
    for (int i = 0; i < m; ++i) idx += es.eigenvalues()[i] < 0;
    ++counts[idx];
  }
  return counts;
}

/// c(k) by brute-force vertex enumeration of {ξ: Σξ = 0, Σ|ξ_{l+1} − ξ_l| ≤ 1}
/// in its half-space form Σ s_l (ξ_{l+1} − ξ_l) ≤ 1, s ∈ {±1}^k.
inline double c_constant_bruteforce(int k) {
  // Coordinates on the zero-mean hyperplane: ξ = B u, u ∈ R^{k−1}.
  Mat b = Mat::Zero(k, k - 1);
  for (int j = 0; j < k - 1; ++j) {
    b(j, j) = 1.0;
    b(k - 1, j) = -1.0;
  }
  Mat d = Mat::Zero(k, k);
  for (int l = 0; l < k; ++l) {
    d(l, (l + 1) % k) += 1.0;
    d(l, l) -= 1.0;
  }
  const Mat db = d * b;
  std::vector<Eigen::RowVectorXd> rows;
  for (int s = 0; s < (1 << k); ++s) {
    Eigen::RowVectorXd sv(k);
    for (int l = 0; l < k; ++l) sv[l] = (s >> l) & 1 ? 1.0 : -1.0;
    rows.push_back(sv * db);
  }
  const int dim = k - 1;
  double best = 0.0;
  std::vector<int> pick(dim);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == dim) {
      Mat a(dim, dim);
      for (int i = 0; i < dim; ++i) a.row(i) = rows[pick[i]];
      Eigen::FullPivLU<Mat> lu(a);
      if (lu.rank() < dim) return;
      Vec u = lu.solve(Vec::Ones(dim));
      Vec xi = b * u;
      if ((d * xi).lpNorm<1>() > 1 + 1e-9) return;
      best = std::max(best, xi.lpNorm<1>());
      return;
    }
    for (int i = start; i < static_cast<int>(rows.size()); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace oracle
