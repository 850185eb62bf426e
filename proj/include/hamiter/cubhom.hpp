#pragma once

// Z₂ cubical homology of sublevel pairs and local Morse homology of an
// isolated critical point at the origin.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamiter/genfun.hpp"

namespace hamiter {

/// Finitely supported degree → Z₂-rank map; zero ranks are never stored.
class GradedRanks {
 public:
  GradedRanks() = default;
  explicit GradedRanks(const std::map<int, int>& ranks);
  GradedRanks(std::initializer_list<std::pair<const int, int>> ranks) : GradedRanks(std::map<int, int>(ranks)) {}

  int operator[](int degree) const;
  void set(int degree, int rank);
  const std::map<int, int>& map() const { return ranks_; }

  int total() const;
  int euler() const;
  bool empty() const { return ranks_.empty(); }
  std::optional<int> min_degree() const;
  std::optional<int> max_degree() const;
  /// Ranks moved up by s: result[d + s] = this[d].
  GradedRanks shifted(int s) const;

  bool operator==(const GradedRanks&) const = default;
  std::string str() const;

 private:
  std::map<int, int> ranks_;
};

/// Pair (X, A) of cubical sets on a node lattice.  Cells use doubled
/// coordinates: an odd coordinate spans an edge along that axis.
struct CubicalPair {
  std::vector<int> node_resolution;
  std::vector<std::uint8_t> in_x;  // per cell
  std::vector<std::uint8_t> in_a;  // per cell

  int dim() const { return static_cast<int>(node_resolution.size()); }
  long cell_count() const { return static_cast<long>(in_x.size()); }
  std::vector<int> cell_coords(long cell) const;
  int cell_dim(long cell) const;
};

/// Closed pair from node membership: a cube belongs to X (A) iff all its
/// vertices do.  Throws InvalidArgument unless A ⊆ X on nodes.
CubicalPair pair_from_nodes(const std::vector<int>& node_resolution, const std::vector<std::uint8_t>& x_nodes,
                            const std::vector<std::uint8_t>& a_nodes);

/// (X, A) = ({f ≤ c}, {f ≤ c − δ}) on the grid of f.
CubicalPair sublevel_pair(const ScalarField& f, double c, double delta);

GradedRanks relative_homology_z2(const CubicalPair& pair);

/// Half the smallest drop c − f over boundary nodes with f < c; +∞ when
/// no boundary node lies below c.
double default_delta(const ScalarField& f, double c);

struct MorseOptions {
  std::optional<double> delta;
  /// Nodes within this many cells of the origin are the core excluded from scans.
  double core_cells = 2.0;
  double isolation_margin = 1e-14;
};

struct MorseResult {
  GradedRanks ranks;
  std::vector<GradedRanks> per_resolution;
  std::vector<double> deltas;
  double shell_min_gradient = 0.0;
};

/// Local Morse homology of f at the origin from fields at increasing resolution.
/// Throws NotIsolated, CriticalValueInWindow, NotStabilized.
MorseResult local_morse_homology(const std::vector<ScalarField>& fields, MorseOptions opts = {});
MorseResult local_morse_homology(const std::function<double(const Vec&)>& f, const Box& box,
                                 const std::vector<int>& resolutions, MorseOptions opts = {});

/// Brouwer degree of a planar field on the circle of the given radius, from the
/// accumulated angle of v.  Throws NotIsolated when v vanishes on the circle.
int planar_degree(const std::function<Vec(const Vec&)>& v, double radius, int samples = 4096);

}  // namespace hamiter
