#pragma once

// Persistence of isolation under iteration: the discrete zero-mean L¹
// constant c(k), Newton searches for k-periodic points near a fixed point,
// and the contraction certificate sup‖Dφ − I‖ < 1/c(k).

#include <cstdint>
#include <optional>
#include <vector>

#include "hamiter/genfun.hpp"

namespace hamiter {

/// A k-periodic sequence ξ_1..ξ_k in R^m with cyclic differences.
struct DiscreteOrbit {
  std::vector<Vec> points;

  int k() const { return static_cast<int>(points.size()); }
  Vec mean() const;
  /// Σ‖ξ_l‖.
  double l1_norm() const;
  /// Σ‖ξ_{l+1} − ξ_l‖ with ξ_{k+1} = ξ_1.
  double derivative_l1_norm() const;
};

struct CConstant {
  int k = 2;
  double value = 0.0;
  /// Zero-mean maximizer with ‖ξ̇‖ = 1 (m = 1).
  DiscreteOrbit maximizer;
};

/// c(k) = max ‖ξ‖ over zero-mean ξ with ‖ξ̇‖ ≤ 1, by enumerating the vertices
/// ξ̇ = (e_i − e_j)/2 of the constraint polytope (m = 1).  The value does not
/// depend on m.
CConstant c_constant(int k);

/// Largest ‖ξ‖/‖ξ̇‖ over `samples` random zero-mean ξ in R^m.
double sampled_l1_ratio(int k, int m, int samples, std::uint64_t seed);

struct PeriodicPoint {
  Vec z;
  double norm = 0.0;
  double residual = 0.0;     // ‖φ^k(z) − z‖
  double fixed_residual = 0.0;  // ‖φ(z) − z‖
  bool at_origin = false;
  bool fixed = false;
};

struct RadiusScan {
  double radius = 0.0;
  int seeds = 0;
  int divergent = 0;
  int escaped = 0;
  std::vector<PeriodicPoint> points;
  bool only_origin = true;
};

struct PeriodicSearch {
  int k = 1;
  bool admissible = false;
  std::vector<RadiusScan> scans;  // decreasing radius
  /// Only the origin was found at the smallest radius.
  bool isolation_holds = false;
  std::string conclusion() const { return isolation_holds ? "ISOLATION_HOLDS" : "ISOLATION_FAILS"; }
};

struct SearchOptions {
  int seeds_per_axis_2d = 17;
  int seeds_per_axis_4d = 9;
  /// Converged points closer to 0 than origin_fraction·radius are the origin.
  double origin_fraction = 1e-3;
  double residual_tol = 1e-10;
  int max_iter = 200;
};

/// Newton from a seed grid on each ball for zeros of φ^k − id.
PeriodicSearch periodic_point_search(const GermMap& phi, int k, std::vector<double> radii, SearchOptions opts = {});

struct ContractionCheck {
  int k = 2;
  double sup_norm = 0.0;   // sampled sup ‖Dφ − I‖₂ on the box
  double threshold = 0.0;  // 1/c(k)
  bool certified = false;
  /// When certified: every k-periodic point found on the inscribed ball is fixed.
  std::optional<bool> search_agrees;
};

/// Throws LinearizationNotIdentity unless dφ(0) = I to 1e-7.
ContractionCheck contraction_check(const GermMap& phi, int k, const Box& box, int samples_per_axis = 17,
                                   bool cross_validate = true);

}  // namespace hamiter
