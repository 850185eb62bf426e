#include "hamiter/pathindex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace hamiter {

namespace {

constexpr double kPi = std::numbers::pi;

// Eigenvalues closer than this are treated as one block for the Krein count.
// Looser than the spectrum clustering on purpose: near-collisions split a
// Jordan block by O(sqrt(eps)) and must still be read as one block.
constexpr double kKreinMerge = 1e-6;

struct UnitBlock {
  Complex value;   // unit-normalized cluster centre
  int multiplicity = 0;
  int positive = 0;  // m⁺: positive index of the Krein form
};

struct RotationData {
  std::vector<UnitBlock> unit;  // unit circle, away from ±1
  int negative_real = 0;
};

std::vector<std::vector<Complex>> merge_eigenvalues(const CVec& ev, double tol) {
  const int d = static_cast<int>(ev.size());
  std::vector<int> parent(d);
  for (int i = 0; i < d; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (std::abs(ev[i] - ev[j]) <= tol) parent[find(i)] = find(j);
  std::vector<std::vector<Complex>> groups;
  std::vector<int> slot(d, -1);
  for (int i = 0; i < d; ++i) {
    int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(ev[i]);
  }
  return groups;
}

// Positive index of −i·V*ΩV on the generalized eigenspace of λ (dimension m).
int krein_positive(const Mat& m, Complex lambda, int mult) {
  const int d = static_cast<int>(m.rows());
  CMat a = m.cast<Complex>() - lambda * CMat::Identity(d, d);
  CMat p = CMat::Identity(d, d);
  for (int i = 0; i < mult; ++i) p = p * a;
  Eigen::JacobiSVD<CMat> svd(p, Eigen::ComputeFullV);
  CMat v = svd.matrixV().rightCols(mult);
  CMat g = Complex(0, -1) * v.adjoint() * form_matrix(d / 2).cast<Complex>() * v;
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(g);
  int pos = 0;
  for (int i = 0; i < mult; ++i)
    if (es.eigenvalues()[i] > 0) ++pos;
  return pos;
}

RotationData rotation_data(const Mat& m, double cluster_tol) {
  RotationData out;
  Eigen::EigenSolver<Mat> es(m, false);
  const double tol = std::max(cluster_tol, kKreinMerge);
  for (const auto& group : merge_eigenvalues(es.eigenvalues(), tol)) {
    Complex c(0, 0);
    for (auto z : group) c += z;
    c /= static_cast<double>(group.size());
    const int mult = static_cast<int>(group.size());
    const bool real = std::abs(c.imag()) <= tol;
    if (real) {
      if (c.real() < 0) out.negative_real += mult;
      continue;
    }
    if (std::abs(std::abs(c) - 1.0) > tol) continue;
    UnitBlock b;
    b.value = c / std::abs(c);
    b.multiplicity = mult;
    b.positive = krein_positive(m, c, mult);
    out.unit.push_back(b);
  }
  return out;
}

struct WindingResult {
  double value = 0.0;
  double uncertainty = 0.0;
};

bool unwrap(const std::vector<Mat>& samples, const std::function<Complex(const Mat&)>& f,
            double max_jump, double& total) {
  total = 0.0;
  Complex prev = f(samples.front());
  bool resolved = true;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    Complex cur = f(samples[i]);
    double step = std::arg(cur / prev);
    if (std::abs(step) >= max_jump) resolved = false;
    total += step;
    prev = cur;
  }
  return resolved;
}

WindingResult winding_impl(const SymplecticPath& path,
                           const std::function<Complex(const Mat&)>& f, WindingOptions opts) {
  if (!path.refinable()) {
    WindingResult r;
    if (!unwrap(path.samples(), f, opts.max_jump, r.value))
      throw Error(Errc::WindingUnresolved,
                  "fixed-sample path has a jump above " + std::to_string(opts.max_jump) + " rad");
    return r;
  }
  int segments = std::max(1, opts.initial_segments);
  double prev = 0.0;
  bool prev_ok = unwrap(path.at(uniform_times(segments)), f, opts.max_jump, prev);
  while (true) {
    segments *= 2;
    if (segments > opts.max_segments)
      throw Error(Errc::WindingUnresolved,
                  "refinement cap reached at " + std::to_string(opts.max_segments) + " segments");
    double cur = 0.0;
    bool ok = unwrap(path.at(uniform_times(segments)), f, opts.max_jump, cur);
    if (ok && prev_ok && std::abs(cur - prev) <= opts.agreement_tol) return {cur, std::abs(cur - prev)};
    prev = cur;
    prev_ok = ok;
  }
}

}  // namespace

std::vector<double> uniform_times(int segments) {
  std::vector<double> t(segments + 1);
  for (int i = 0; i <= segments; ++i) t[i] = static_cast<double>(i) / segments;
  t.back() = 1.0;
  return t;
}

SymplecticPath::SymplecticPath(std::vector<double> times, std::vector<Mat> samples, Sampler sampler)
    : times_(std::move(times)), samples_(std::move(samples)), sampler_(std::move(sampler)) {
  if (samples_.empty() || samples_.size() != times_.size())
    throw Error(Errc::InvalidArgument, "path needs matching, nonempty times and samples");
  if (samples_.front().rows() % 2 != 0 || samples_.front().rows() != samples_.front().cols())
    throw Error(Errc::InvalidArgument, "path samples must be square of even size");
  n_ = static_cast<int>(samples_.front().rows() / 2);
  if (std::abs(times_.front()) > 1e-14 || std::abs(times_.back() - 1.0) > 1e-14)
    throw Error(Errc::InvalidArgument, "path times must run from 0 to 1");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error(Errc::InvalidArgument, "path times must be strictly increasing");
  if ((samples_.front() - Mat::Identity(2 * n_, 2 * n_)).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(Errc::InvalidArgument, "path must start at the identity");
}

SymplecticPath::SymplecticPath(int n, Sampler sampler, int segments) : n_(n), sampler_(std::move(sampler)) {
  times_ = uniform_times(segments);
  samples_ = sampler_(times_);
  if (static_cast<int>(samples_.size()) != segments + 1)
    throw Error(Errc::InvalidArgument, "sampler returned the wrong number of samples");
  if (samples_.front().rows() != 2 * n)
    throw Error(Errc::InvalidArgument, "sampler dimension does not match n");
}

SymplecticPath SymplecticPath::from_function(const std::function<Mat(double)>& f, int segments) {
  Mat m0 = f(0.0);
  auto sampler = [f](const std::vector<double>& ts) {
    std::vector<Mat> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(f(t));
    return out;
  };
  return SymplecticPath(static_cast<int>(m0.rows() / 2), sampler, segments);
}

SymplecticPath SymplecticPath::constant_identity(int n) {
  return from_function([n](double) { return Mat(Mat::Identity(2 * n, 2 * n)); }, 1);
}

std::vector<Mat> SymplecticPath::at(const std::vector<double>& times) const {
  if (sampler_) return sampler_(times);
  std::vector<Mat> out;
  out.reserve(times.size());
  std::size_t j = 0;
  for (double t : times) {
    while (j < times_.size() && times_[j] < t - 1e-14) ++j;
    if (j == times_.size() || std::abs(times_[j] - t) > 1e-14)
      throw Error(Errc::InvalidArgument, "path without sampler queried off its grid");
    out.push_back(samples_[j]);
  }
  return out;
}

SymplecticPath iterate_path(const SymplecticPath& path, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "iterate_path needs k >= 1");
  if (k == 1) return path;
  const Mat end = path.endpoint();
  auto sampler = [path, end, k](const std::vector<double>& ts) {
    // Split every t into (block j, local time s) and evaluate the base path
    // once on the merged set of local times.
    std::vector<int> block(ts.size());
    std::vector<double> local(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double u = ts[i] * k;
      int j = std::min(k - 1, static_cast<int>(std::floor(u)));
      block[i] = j;
      local[i] = std::clamp(u - j, 0.0, 1.0);
    }
    std::vector<double> uniq = local;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<Mat> base = path.at(uniq);
    std::vector<Mat> powers(k, Mat::Identity(end.rows(), end.cols()));
    for (int j = 1; j < k; ++j) powers[j] = end * powers[j - 1];
    std::vector<Mat> out;
    out.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      auto it = std::lower_bound(uniq.begin(), uniq.end(), local[i]);
      out.push_back(base[it - uniq.begin()] * powers[block[i]]);
    }
    return out;
  };
  if (path.refinable()) return SymplecticPath(path.n(), sampler, 64 * k);
  // Fixed samples: concatenate the stored grid k times.
  std::vector<double> ts;
  const auto& pt = path.times();
  for (int j = 0; j < k; ++j)
    for (std::size_t i = (j == 0 ? 0 : 1); i < pt.size(); ++i) ts.push_back((j + pt[i]) / k);
  ts.back() = 1.0;
  return SymplecticPath(ts, sampler(ts));
}

SymplecticPath direct_sum_path(const SymplecticPath& a, const SymplecticPath& b) {
  auto sampler = [a, b](const std::vector<double>& ts) {
    auto sa = a.at(ts);
    auto sb = b.at(ts);
    std::vector<Mat> out;
    out.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out.push_back(direct_sum(sa[i], sb[i]));
    return out;
  };
  if (a.refinable() && b.refinable()) return SymplecticPath(a.n() + b.n(), sampler, 64);
  const auto& ts = a.refinable() ? b.times() : a.times();
  return SymplecticPath(ts, sampler(ts));
}

SymplecticPath product_path(const SymplecticPath& a, const SymplecticPath& b) {
  if (a.n() != b.n()) throw Error(Errc::InvalidArgument, "product_path needs equal dimensions");
  auto sampler = [a, b](const std::vector<double>& ts) {
    auto sa = a.at(ts);
    auto sb = b.at(ts);
    std::vector<Mat> out;
    out.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out.push_back(sa[i] * sb[i]);
    return out;
  };
  if (a.refinable() && b.refinable()) return SymplecticPath(a.n(), sampler, 64);
  const auto& ts = a.refinable() ? b.times() : a.times();
  return SymplecticPath(ts, sampler(ts));
}

SymplecticPath exponential_path(const Mat& generator, int segments) {
  Mat g = generator;
  return SymplecticPath::from_function([g](double t) { return Mat((t * g).exp()); }, segments);
}

Complex rho(const Mat& m, double cluster_tol) {
  RotationData rd = rotation_data(m, cluster_tol);
  Complex r = (rd.negative_real / 2) % 2 == 0 ? Complex(1, 0) : Complex(-1, 0);
  for (const auto& b : rd.unit)
    for (int i = 0; i < b.positive; ++i) r *= b.value;
  return r / std::abs(r);
}

Complex rho(const SymplecticMatrix& m, double cluster_tol) { return rho(m.matrix(), cluster_tol); }

Complex rho_polar(const Mat& m) {
  const int n = static_cast<int>(m.rows() / 2);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU() * svd.matrixV().transpose();
  CMat w = u.topLeftCorner(n, n).cast<Complex>() + Complex(0, 1) * u.bottomLeftCorner(n, n).cast<Complex>();
  Complex d = w.determinant();
  return d / std::abs(d);
}

double cz_endpoint_correction(const Mat& m, double cluster_tol) {
  RotationData rd = rotation_data(m, cluster_tol);
  double e = 0.0;
  for (const auto& b : rd.unit) {
    double theta = std::arg(b.value);
    if (theta < 0) theta += 2 * kPi;
    e += b.positive * (1.0 - theta / kPi);
  }
  return e;
}

double winding(const SymplecticPath& path, const std::function<Complex(const Mat&)>& f,
               WindingOptions opts) {
  return winding_impl(path, f, opts).value;
}

double mean_index(const SymplecticPath& path, WindingOptions opts) {
  return winding(path, [](const Mat& m) { return rho(m); }, opts) / kPi;
}

int conley_zehnder(const SymplecticPath& path, double degeneracy_tol, WindingOptions opts) {
  const Mat& end = path.endpoint();
  Eigen::EigenSolver<Mat> es(end, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i] - Complex(1, 0)) <= degeneracy_tol)
      throw Error(Errc::DegenerateEndpoint, "endpoint has an eigenvalue within " +
                                                std::to_string(degeneracy_tol) + " of 1");
  double delta = mean_index(path, opts);
  double raw = delta + cz_endpoint_correction(end);
  double r = std::round(raw);
  if (std::abs(raw - r) > 1e-6)
    throw Error(Errc::WindingUnresolved, "Δ + e(M) = " + std::to_string(raw) + " is not an integer");
  return static_cast<int>(r);
}

int maslov_loop(const SymplecticPath& path, double loop_tol, WindingOptions opts) {
  const Mat& end = path.endpoint();
  double dev = (end - Mat::Identity(end.rows(), end.cols())).cwiseAbs().maxCoeff();
  if (dev > loop_tol)
    throw Error(Errc::NotALoop, "endpoint differs from identity by " + std::to_string(dev));
  double w = winding(path, rho_polar, opts) / (2 * kPi);
  double r = std::round(w);
  if (std::abs(w - r) > 1e-6)
    throw Error(Errc::WindingUnresolved, "loop winding " + std::to_string(w) + " is not an integer");
  return static_cast<int>(r);
}

IndexReport index_report(const SymplecticPath& path, double degeneracy_tol, WindingOptions opts) {
  IndexReport rep;
  rep.n = path.n();
  auto w = winding_impl(path, [](const Mat& m) { return rho(m); }, opts);
  rep.delta = w.value / kPi;
  rep.winding_uncertainty = w.uncertainty / kPi;
  const Mat& end = path.endpoint();
  Eigen::EigenSolver<Mat> es(end, false);
  rep.nondegenerate = true;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i] - Complex(1, 0)) <= degeneracy_tol) rep.nondegenerate = false;
  if (rep.nondegenerate) {
    double raw = rep.delta + cz_endpoint_correction(end);
    double r = std::round(raw);
    if (std::abs(raw - r) > 1e-6)
      throw Error(Errc::WindingUnresolved, "Δ + e(M) = " + std::to_string(raw) + " is not an integer");
    rep.cz = static_cast<int>(r);
  }
  if ((end - Mat::Identity(end.rows(), end.cols())).cwiseAbs().maxCoeff() <= 1e-7)
    rep.maslov = maslov_loop(path, 1e-7, opts);
  return rep;
}

}  // namespace hamiter
