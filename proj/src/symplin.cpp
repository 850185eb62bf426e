#include "hamiter/symplin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hamiter {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotSymplectic: return "NotSymplectic";
    case Errc::ClusterAmbiguous: return "ClusterAmbiguous";
    case Errc::NotAdmissible: return "NotAdmissible";
    case Errc::SplitFailed: return "SplitFailed";
    case Errc::WindingUnresolved: return "WindingUnresolved";
    case Errc::DegenerateEndpoint: return "DegenerateEndpoint";
    case Errc::NotALoop: return "NotALoop";
    case Errc::LeftDomain: return "LeftDomain";
    case Errc::StepFailure: return "StepFailure";
    case Errc::NotClosed: return "NotClosed";
    case Errc::NewtonDivergence: return "NewtonDivergence";
    case Errc::NotInvertibleOnBox: return "NotInvertibleOnBox";
    case Errc::NotC1Small: return "NotC1Small";
    case Errc::ClosednessDefect: return "ClosednessDefect";
    case Errc::CriticalValueInWindow: return "CriticalValueInWindow";
    case Errc::NotStabilized: return "NotStabilized";
    case Errc::NotIsolated: return "NotIsolated";
    case Errc::RouteUnavailable: return "RouteUnavailable";
    case Errc::HypothesisFailed: return "HypothesisFailed";
    case Errc::ShiftAmbiguous: return "ShiftAmbiguous";
    case Errc::LinearizationNotIdentity: return "LinearizationNotIdentity";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownFormula: return "UnknownFormula";
    case Errc::MissingReport: return "MissingReport";
  }
  return "Unknown";
}

Mat form_matrix(int n) {
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return omega;
}

Mat poisson_matrix(int n) { return form_matrix(n).transpose(); }

Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

double symplectic_defect(const Mat& m) {
  const int n = static_cast<int>(m.rows() / 2);
  const Mat omega = form_matrix(n);
  return (m.transpose() * omega * m - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix SymplecticMatrix::validate(const Mat& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw Error(Errc::InvalidArgument, "symplectic matrix must be square of even dimension");
  }
  if (!m.allFinite()) throw Error(Errc::NotSymplectic, "non-finite entries");
  const double defect = symplectic_defect(m);
  const double det_err = std::abs(m.determinant() - 1.0);
  if (defect > tol || det_err > std::max(tol, 1e-12) * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "defect " << defect << ", |det - 1| = " << det_err << " (tol " << tol << ")";
    throw Error(Errc::NotSymplectic, os.str());
  }
  return SymplecticMatrix(m, defect);
}

SymplecticMatrix SymplecticMatrix::identity(int n) {
  return SymplecticMatrix(Mat::Identity(2 * n, 2 * n), 0.0);
}

SymplecticMatrix SymplecticMatrix::power(int k) const {
  if (k < 0) return inverse().power(-k);
  Mat result = Mat::Identity(dim(), dim());
  Mat base = m_;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) result = result * base;
    base = base * base;
  }
  return SymplecticMatrix(result, symplectic_defect(result));
}

SymplecticMatrix SymplecticMatrix::inverse() const {
  // M⁻¹ = -Ω Mᵀ Ω for symplectic M.
  const Mat omega = form_matrix(n());
  Mat inv = -omega * m_.transpose() * omega;
  return SymplecticMatrix(inv, symplectic_defect(inv));
}

SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
  Mat p = a.m_ * b.m_;
  return SymplecticMatrix(p, symplectic_defect(p));
}

int product_index_a(int i, int na, int nb) { return i < na ? i : i + nb; }
int product_index_b(int j, int na, int nb) { return j < nb ? na + j : 2 * na + j; }

Mat direct_sum(const Mat& a, const Mat& b) {
  const int na = static_cast<int>(a.rows() / 2);
  const int nb = static_cast<int>(b.rows() / 2);
  Mat out = Mat::Zero(2 * (na + nb), 2 * (na + nb));
  for (int i = 0; i < 2 * na; ++i)
    for (int j = 0; j < 2 * na; ++j)
      out(product_index_a(i, na, nb), product_index_a(j, na, nb)) = a(i, j);
  for (int i = 0; i < 2 * nb; ++i)
    for (int j = 0; j < 2 * nb; ++j)
      out(product_index_b(i, na, nb), product_index_b(j, na, nb)) = b(i, j);
  return out;
}

SymplecticMatrix direct_sum(const SymplecticMatrix& a, const SymplecticMatrix& b) {
  return SymplecticMatrix::validate(direct_sum(a.matrix(), b.matrix()), 1e-7);
}

int EigenData::total_multiplicity() const {
  int total = 0;
  for (const auto& c : clusters) total += c.multiplicity;
  return total;
}

int EigenData::unit_multiplicity() const {
  for (const auto& c : clusters)
    if (c.value == Complex(1.0, 0.0)) return c.multiplicity;
  return 0;
}

namespace {

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

}  // namespace

EigenData spectrum(const SymplecticMatrix& m, SpectrumOptions opts) {
  const double tol = opts.cluster_tol;
  Eigen::EigenSolver<Mat> solver(m.matrix(), false);
  if (solver.info() != Eigen::Success) throw Error(Errc::InvalidArgument, "eigensolver failed");
  const CVec ev = solver.eigenvalues();
  const int dim = static_cast<int>(ev.size());

  UnionFind uf(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      if (std::abs(ev[i] - ev[j]) <= tol) uf.unite(i, j);

  std::vector<EigenCluster> clusters;
  std::vector<int> root_to_cluster(dim, -1);
  for (int i = 0; i < dim; ++i) {
    const int r = uf.find(i);
    if (root_to_cluster[r] < 0) {
      root_to_cluster[r] = static_cast<int>(clusters.size());
      clusters.push_back({});
    }
    auto& c = clusters[root_to_cluster[r]];
    c.value += ev[i];
    c.multiplicity += 1;
  }
  for (auto& c : clusters) c.value /= static_cast<double>(c.multiplicity);

  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (std::abs(clusters[i].value - clusters[j].value) <= 2.0 * tol) {
        std::ostringstream os;
        os << "clusters " << clusters[i].value << " and " << clusters[j].value
           << " closer than 2*cluster_tol = " << 2.0 * tol;
        throw Error(Errc::ClusterAmbiguous, os.str());
      }

  // Enforce the symplectic spectral symmetry that floating point breaks.
  for (auto& c : clusters) {
    Complex v = c.value;
    if (std::abs(v.imag()) <= tol) v = Complex(v.real(), 0.0);
    if (std::abs(std::abs(v) - 1.0) <= tol) {
      c.on_unit_circle = true;
      v /= std::abs(v);
      if (std::abs(v.imag()) <= tol) v = Complex(v.real() > 0 ? 1.0 : -1.0, 0.0);
    }
    c.value = v;
  }
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].on_unit_circle) continue;
    const Complex inv = 1.0 / clusters[i].value;
    for (std::size_t j = i + 1; j < clusters.size(); ++j) {
      if (clusters[j].on_unit_circle) continue;
      if (std::abs(clusters[j].value - inv) <= tol * std::max(1.0, std::norm(inv))) {
        const Complex mean = 0.5 * (clusters[i].value + 1.0 / clusters[j].value);
        clusters[i].value = mean;
        clusters[j].value = 1.0 / mean;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].value.imag() <= 0.0) continue;
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (std::abs(clusters[j].value - std::conj(clusters[i].value)) <= 4.0 * tol) {
        clusters[j].value = std::conj(clusters[i].value);
        break;
      }
    }
  }

  for (auto& c : clusters) {
    if (!c.on_unit_circle) continue;
    if (c.value == Complex(1.0, 0.0)) {
      c.root_of_unity_order = 1;
      continue;
    }
    for (int q = 2; q <= opts.q_max; ++q) {
      if (std::abs(std::pow(c.value, q) - 1.0) <= tol) {
        c.root_of_unity_order = q;
        const double p = std::round(std::arg(c.value) * q / (2.0 * std::numbers::pi));
        c.value = std::polar(1.0, 2.0 * std::numbers::pi * p / q);
        if (q == 2) c.value = Complex(-1.0, 0.0);
        break;
      }
    }
  }

  std::sort(clusters.begin(), clusters.end(), [](const EigenCluster& a, const EigenCluster& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return EigenData{std::move(clusters), tol, opts.q_max};
}

bool admissible(const EigenData& spec, int k) {
  if (k < 1) throw Error(Errc::InvalidArgument, "iteration k must be >= 1");
  for (const auto& c : spec.clusters) {
    if (c.value == Complex(1.0, 0.0)) continue;
    if (c.root_of_unity_order && k % *c.root_of_unity_order == 0) return false;
  }
  return true;
}

bool admissible(const SymplecticMatrix& m, int k, SpectrumOptions opts) {
  return admissible(spectrum(m, opts), k);
}

int negative_real_pairs(const EigenData& spec, int k) {
  int count = 0;
  for (const auto& c : spec.clusters) {
    bool negative = false;
    if (c.root_of_unity_order) {
      const int q = *c.root_of_unity_order;
      const long p = std::lround(std::arg(c.value) * q / (2.0 * std::numbers::pi));
      const long pk = ((p * k) % q + q) % q;
      negative = (q % 2 == 0) && (2 * pk == q);
    } else if (c.value.imag() == 0.0) {
      negative = c.value.real() < 0.0 && (k % 2 == 1);
    } else {
      const double phase = std::remainder(k * std::arg(c.value), 2.0 * std::numbers::pi);
      negative = std::abs(std::abs(phase) - std::numbers::pi) <= spec.cluster_tol * k;
    }
    if (negative) count += c.multiplicity;
  }
  return count / 2;
}

bool good(const EigenData& spec, int k) {
  if (!admissible(spec, k)) {
    throw Error(Errc::NotAdmissible, "k = " + std::to_string(k) + " is not admissible");
  }
  return negative_real_pairs(spec, 1) % 2 == negative_real_pairs(spec, k) % 2;
}

bool good(const SymplecticMatrix& m, int k, SpectrumOptions opts) {
  return good(spectrum(m, opts), k);
}

AdmissibleSet admissible_set(const SymplecticMatrix& m, int q_max, int horizon,
                             double cluster_tol) {
  const EigenData spec = spectrum(m, {cluster_tol, q_max});
  AdmissibleSet out;
  for (const auto& c : spec.clusters) {
    if (c.value == Complex(1.0, 0.0) || !c.root_of_unity_order) continue;
    out.forbidden_divisors.push_back(*c.root_of_unity_order);
  }
  std::sort(out.forbidden_divisors.begin(), out.forbidden_divisors.end());
  out.forbidden_divisors.erase(
      std::unique(out.forbidden_divisors.begin(), out.forbidden_divisors.end()),
      out.forbidden_divisors.end());
  int product = 1;
  for (int q : out.forbidden_divisors) product *= q;
  out.step = product;
  out.start = out.forbidden_divisors.empty() ? 1 : 1 + product;
  out.horizon = horizon;
  out.verified = true;
  for (int k = out.start; k <= horizon; k += out.step) out.verified = out.verified && admissible(spec, k);
  return out;
}

SpectralSplit split_spectral(const SymplecticMatrix& m, double tol) {
  const int dim = m.dim();
  Eigen::EigenSolver<Mat> solver(m.matrix(), false);
  const CVec ev = solver.eigenvalues();
  double max_w = 0.0;
  double min_v = std::numeric_limits<double>::infinity();
  int dim_w = 0;
  for (int i = 0; i < dim; ++i) {
    const double d = std::abs(ev[i] - 1.0);
    if (d <= tol) {
      max_w = std::max(max_w, d);
      ++dim_w;
    } else {
      min_v = std::min(min_v, d);
    }
  }
  if (min_v < 10.0 * tol) {
    std::ostringstream os;
    os << "eigenvalue at distance " << min_v << " from 1 is near the split tolerance " << tol;
    throw Error(Errc::SplitFailed, os.str());
  }
  SpectralSplit out;
  out.dim_w = dim_w;
  out.dim_v = dim - dim_w;
  if (dim_w == 0) {
    out.p_w = Mat::Zero(dim, dim);
  } else if (dim_w == dim) {
    out.p_w = Mat::Identity(dim, dim);
  } else {
    // Riesz projector (1/2πi)∮ (z − M)⁻¹ dz over the circle |z − 1| = r,
    // evaluated with the trapezoid rule (geometric convergence).
    const double r = std::sqrt(std::max(max_w, tol) * min_v);
    const int nodes = 256;
    CMat acc = CMat::Zero(dim, dim);
    const CMat mc = m.matrix().cast<Complex>();
    for (int j = 0; j < nodes; ++j) {
      const Complex e = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / nodes);
      const Complex z = 1.0 + r * e;
      const CMat resolvent = (z * CMat::Identity(dim, dim) - mc).partialPivLu().inverse();
      acc += (r * e / static_cast<double>(nodes)) * resolvent;
    }
    out.p_w = acc.real();
  }
  out.p_v = Mat::Identity(dim, dim) - out.p_w;
  return out;
}

int generalized_unit_dimension(const Mat& m, double rank_tol) {
  const int dim = static_cast<int>(m.rows());
  Mat a = m - Mat::Identity(dim, dim);
  Mat p = Mat::Identity(dim, dim);
  for (int i = 0; i < dim; ++i) p = p * a;
  Eigen::JacobiSVD<Mat> svd(p);
  const auto& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s[0] : 0.0);
  int nullity = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] <= rank_tol * scale) ++nullity;
  return nullity;
}

}  // namespace hamiter
