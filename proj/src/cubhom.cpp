#include "hamiter/cubhom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hamiter {

namespace {

std::vector<long> cell_strides(const std::vector<int>& node_res) {
  std::vector<long> st(node_res.size());
  long total = 1;
  for (std::size_t a = 0; a < node_res.size(); ++a) {
    st[a] = total;
    total *= 2L * node_res[a] - 1;
  }
  return st;
}

std::vector<long> node_strides(const std::vector<int>& node_res) {
  std::vector<long> st(node_res.size());
  long total = 1;
  for (std::size_t a = 0; a < node_res.size(); ++a) {
    st[a] = total;
    total *= node_res[a];
  }
  return st;
}

// Symmetric difference of two ascending index lists (Z₂ column addition).
void add_column(std::vector<int>& col, const std::vector<int>& other) {
  std::vector<int> out;
  out.reserve(col.size() + other.size());
  std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(out));
  col.swap(out);
}

void check_isolated_and_window(const ScalarField& f, long origin, double c, double delta, const MorseOptions& opts,
                               double& shell_min) {
  const int m = f.dim();
  double hmax = 0.0;
  for (int a = 0; a < m; ++a) hmax = std::max(hmax, f.spacing(a));
  const double core = opts.core_cells * hmax * (1 + 1e-9);
  const Vec o = f.node(origin);
  std::vector<double> gn(f.size(), std::numeric_limits<double>::infinity());
  for (long i = 0; i < f.size(); ++i)
    if (f.interior(i)) gn[i] = f.gradient(i).norm();
  double scale = 0.0;
  for (long i = 0; i < f.size(); ++i)
    if (std::isfinite(gn[i])) scale = std::max(scale, gn[i]);
  shell_min = std::numeric_limits<double>::infinity();
  for (long i = 0; i < f.size(); ++i) {
    if (!f.interior(i) || (f.node(i) - o).norm() <= core) continue;
    shell_min = std::min(shell_min, gn[i]);
    if (gn[i] <= opts.isolation_margin * std::max(1.0, scale))
      throw Error(Errc::NotIsolated, "gradient vanishes away from the origin");
    if (std::abs(f[i] - c) > delta) continue;
    // A discrete local minimum of |∇f| smaller than the local variation of ∇f
    // signals a zero of ∇f inside the adjacent cells.
    bool local_min = true;
    double variation = 0.0;
    Vec g = f.gradient(i);
    for (int a = 0; a < m && local_min; ++a) {
      for (long nb : {i + f.stride(a), i - f.stride(a)}) {
        if (gn[nb] < gn[i]) local_min = false;
        if (std::isfinite(gn[nb])) variation = std::max(variation, (f.gradient(nb) - g).norm());
      }
    }
    if (local_min && gn[i] <= variation)
      throw Error(Errc::CriticalValueInWindow,
                  "another critical point near node " + std::to_string(i) + " has value within the window");
  }
}

}  // namespace

GradedRanks::GradedRanks(const std::map<int, int>& ranks) {
  for (auto [d, r] : ranks) set(d, r);
}

int GradedRanks::operator[](int degree) const {
  auto it = ranks_.find(degree);
  return it == ranks_.end() ? 0 : it->second;
}

void GradedRanks::set(int degree, int rank) {
  if (rank < 0) throw Error(Errc::InvalidArgument, "ranks are nonnegative");
  if (rank == 0)
    ranks_.erase(degree);
  else
    ranks_[degree] = rank;
}

int GradedRanks::total() const {
  int t = 0;
  for (auto [d, r] : ranks_) t += r;
  return t;
}

int GradedRanks::euler() const {
  int e = 0;
  for (auto [d, r] : ranks_) e += (d % 2 == 0 ? 1 : -1) * r;
  return e;
}

std::optional<int> GradedRanks::min_degree() const {
  if (ranks_.empty()) return std::nullopt;
  return ranks_.begin()->first;
}

std::optional<int> GradedRanks::max_degree() const {
  if (ranks_.empty()) return std::nullopt;
  return ranks_.rbegin()->first;
}

GradedRanks GradedRanks::shifted(int s) const {
  GradedRanks g;
  for (auto [d, r] : ranks_) g.set(d + s, r);
  return g;
}

std::string GradedRanks::str() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto [d, r] : ranks_) {
    if (!first) os << ", ";
    os << d << ": " << r;
    first = false;
  }
  os << '}';
  return os.str();
}

std::vector<int> CubicalPair::cell_coords(long cell) const {
  std::vector<int> c(node_resolution.size());
  for (std::size_t a = 0; a < node_resolution.size(); ++a) {
    int w = 2 * node_resolution[a] - 1;
    c[a] = static_cast<int>(cell % w);
    cell /= w;
  }
  return c;
}

int CubicalPair::cell_dim(long cell) const {
  int d = 0;
  for (int c : cell_coords(cell)) d += c & 1;
  return d;
}

CubicalPair pair_from_nodes(const std::vector<int>& node_resolution, const std::vector<std::uint8_t>& x_nodes,
                            const std::vector<std::uint8_t>& a_nodes) {
  CubicalPair p;
  p.node_resolution = node_resolution;
  const int m = p.dim();
  auto nst = node_strides(node_resolution);
  long nodes = 1, cells = 1;
  for (int r : node_resolution) nodes *= r, cells *= 2L * r - 1;
  if (static_cast<long>(x_nodes.size()) != nodes || static_cast<long>(a_nodes.size()) != nodes)
    throw Error(Errc::InvalidArgument, "membership arrays do not match the lattice");
  for (long i = 0; i < nodes; ++i)
    if (a_nodes[i] && !x_nodes[i]) throw Error(Errc::InvalidArgument, "A must be contained in X");
  p.in_x.assign(cells, 0);
  p.in_a.assign(cells, 0);
  for (long cell = 0; cell < cells; ++cell) {
    auto c = p.cell_coords(cell);
    long base = 0;
    std::vector<long> odd;
    for (int a = 0; a < m; ++a) {
      base += (c[a] / 2) * nst[a];
      if (c[a] & 1) odd.push_back(nst[a]);
    }
    bool x = true, in_a = true;
    for (int v = 0; v < (1 << odd.size()) && (x || in_a); ++v) {
      long idx = base;
      for (std::size_t j = 0; j < odd.size(); ++j)
        if ((v >> j) & 1) idx += odd[j];
      x = x && x_nodes[idx];
      in_a = in_a && a_nodes[idx];
    }
    p.in_x[cell] = x;
    p.in_a[cell] = in_a;
  }
  return p;
}

CubicalPair sublevel_pair(const ScalarField& f, double c, double delta) {
  std::vector<std::uint8_t> xn(f.size()), an(f.size());
  for (long i = 0; i < f.size(); ++i) {
    xn[i] = f[i] <= c;
    an[i] = f[i] <= c - delta;
  }
  return pair_from_nodes(f.resolution(), xn, an);
}

GradedRanks relative_homology_z2(const CubicalPair& pair) {
  const int m = pair.dim();
  auto cst = cell_strides(pair.node_resolution);
  // Compact numbering of the relative cells X∖A in ascending cell order.
  std::vector<long> cells;
  std::vector<int> compact(pair.cell_count(), -1);
  for (long cell = 0; cell < pair.cell_count(); ++cell)
    if (pair.in_x[cell] && !pair.in_a[cell]) {
      compact[cell] = static_cast<int>(cells.size());
      cells.push_back(cell);
    }
  std::vector<int> dims(cells.size());
  std::vector<long> count(m + 2, 0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    dims[i] = pair.cell_dim(cells[i]);
    ++count[dims[i]];
  }
  std::vector<long> rank(m + 2, 0);  // rank of ∂_d
  std::vector<int> pivot_of(cells.size(), -1);
  std::vector<std::uint8_t> cleared(cells.size(), 0);
  std::vector<std::vector<int>> reduced(cells.size());
  for (int d = m; d >= 1; --d) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (dims[j] != d || cleared[j]) continue;
      auto c = pair.cell_coords(cells[j]);
      std::vector<int> col;
      for (int a = 0; a < m; ++a) {
        if (!(c[a] & 1)) continue;
        for (long face : {cells[j] - cst[a], cells[j] + cst[a]})
          if (compact[face] >= 0) col.push_back(compact[face]);
      }
      std::sort(col.begin(), col.end());
      while (!col.empty() && pivot_of[col.back()] >= 0) add_column(col, reduced[pivot_of[col.back()]]);
      if (col.empty()) continue;
      pivot_of[col.back()] = static_cast<int>(j);
      cleared[col.back()] = 1;
      ++rank[d];
      reduced[j] = std::move(col);
    }
  }
  GradedRanks out;
  for (int d = 0; d <= m; ++d) out.set(d, static_cast<int>(count[d] - rank[d] - rank[d + 1]));
  return out;
}

double default_delta(const ScalarField& f, double c) {
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i < f.size(); ++i) {
    if (f.interior(i) || f[i] >= c) continue;
    best = std::min(best, c - f[i]);
  }
  return 0.5 * best;
}

MorseResult local_morse_homology(const std::vector<ScalarField>& fields, MorseOptions opts) {
  if (fields.empty()) throw Error(Errc::InvalidArgument, "local_morse_homology needs at least one field");
  MorseResult res;
  res.shell_min_gradient = std::numeric_limits<double>::infinity();
  for (const auto& f : fields) {
    long origin = f.node_at(Vec::Zero(f.dim()));
    if (origin < 0) throw Error(Errc::InvalidArgument, "the origin must be a grid node");
    const double c = f[origin];
    const double delta = opts.delta ? *opts.delta : default_delta(f, c);
    double shell = 0.0;
    check_isolated_and_window(f, origin, c, std::isfinite(delta) ? delta : 0.0, opts, shell);
    res.shell_min_gradient = std::min(res.shell_min_gradient, shell);
    res.deltas.push_back(delta);
    res.per_resolution.push_back(relative_homology_z2(sublevel_pair(f, c, delta)));
  }
  res.ranks = res.per_resolution.back();
  if (res.per_resolution.size() >= 2 && !(res.per_resolution[res.per_resolution.size() - 2] == res.ranks))
    throw Error(Errc::NotStabilized, "ranks " + res.per_resolution[res.per_resolution.size() - 2].str() + " and " +
                                         res.ranks.str() + " differ at the two finest resolutions");
  return res;
}

MorseResult local_morse_homology(const std::function<double(const Vec&)>& f, const Box& box,
                                 const std::vector<int>& resolutions, MorseOptions opts) {
  std::vector<ScalarField> fields;
  for (int r : resolutions) fields.push_back(ScalarField::sample(box, std::vector<int>(box.dim(), r), f));
  return local_morse_homology(fields, opts);
}

int planar_degree(const std::function<Vec(const Vec&)>& v, double radius, int samples) {
  double total = 0.0;
  auto angle_at = [&](int i) {
    const double t = 2 * std::numbers::pi * i / samples;
    Vec z(2);
    z << radius * std::cos(t), radius * std::sin(t);
    Vec w = v(z);
    if (w.norm() == 0.0) throw Error(Errc::NotIsolated, "field vanishes on the circle");
    return std::atan2(w[1], w[0]);
  };
  double prev = angle_at(0);
  for (int i = 1; i <= samples; ++i) {
    double cur = angle_at(i % samples);
    double d = std::remainder(cur - prev, 2 * std::numbers::pi);
    if (std::abs(d) > 0.5 * std::numbers::pi)
      throw Error(Errc::WindingUnresolved, "field turns too fast for the sampling");
    total += d;
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

}  // namespace hamiter
