#pragma once

// Local Floer homology of an isolated fixed point and the persistence checks
// under iteration: shifts s_k, their parity, support windows, the SDM test.

#include <optional>
#include <string>
#include <vector>

#include "hamiter/cubhom.hpp"
#include "hamiter/hamflow.hpp"
#include "hamiter/report.hpp"

namespace hamiter {

enum class Route { Nondegenerate, StronglyDegenerate, Split };
enum class ShiftConvention { CzAnchor, GenfunN0, KunnethProduct };
std::string to_string(Route r);
std::string to_string(ShiftConvention c);

/// Hypothesis bounds of the generating-function bridge, measured on F_k.
struct BridgeCheck {
  bool evaluated = false;
  /// max ‖X_F(ψ(z)) − X_F(z)‖ / ‖X_F(z)‖ over grid points.
  double epsilon = 0.0;
  /// ‖d²F_k(0)‖₂ from central differences.
  double hessian_norm = 0.0;
  bool passed = false;
  double box_radius = 0.0;
  bool conjugated = false;
};

struct LocalFloer {
  GradedRanks ranks;
  ShiftConvention convention = ShiftConvention::CzAnchor;
  Route route = Route::Nondegenerate;
  double delta = 0.0;
  int n = 1;
  int k = 1;
  BridgeCheck bridge;
};

struct LocalFloerOptions {
  std::vector<int> resolutions_2d{65, 129};
  std::vector<int> resolutions_4d{9, 17};
  /// Starting box radius for the generating function; halved until the C¹ gate passes.
  double box_radius = 0.1;
  int max_shrinks = 10;
  GFOptions gf;
  bool prefer_split = false;
};

/// HF_*(H^{#k}, γ^k) for the fixed point of `record` (a fixed point of φ_H).
/// Throws NotAdmissible, RouteUnavailable, HypothesisFailed.
LocalFloer local_floer(const HamiltonianGerm& h, const FixedPointRecord& record, int k, LocalFloerOptions opts = {});

/// Graded convolution of Z₂ ranks.
GradedRanks kunneth(const GradedRanks& a, const GradedRanks& b);

/// The unique s with b = a.shifted(s); nullopt when both are empty.  Throws
/// ShiftAmbiguous when no shift aligns them.
std::optional<int> degree_shift(const GradedRanks& a, const GradedRanks& b);

struct PersistenceRow {
  int k = 1;
  bool admissible = false;
  bool good = false;
  GradedRanks ranks;
  Route route = Route::Nondegenerate;
  std::optional<int> s_k;
  std::optional<bool> s_k_even;
  /// |s_k/k − Δ|.
  std::optional<double> limit_gap;
  bool window_ok = true;   // |s_k + l − kΔ| ≤ n for l in supp HF(k = 1)
  bool support_ok = true;  // supp HF(k) ⊆ [kΔ − n, kΔ + n]
};

struct PersistenceReport {
  int n = 1;
  double delta = 0.0;
  std::vector<PersistenceRow> rows;
  std::vector<Check> checks;
};

/// Throws NotAdmissible when some k is not admissible.
PersistenceReport verify_persistence(const HamiltonianGerm& h, const FixedPointRecord& record,
                                     const std::vector<int>& ks, LocalFloerOptions opts = {});

/// Admissible k in [1, k_max] for the record's linearization.
std::vector<int> admissible_iterations(const FixedPointRecord& record, int k_max);

struct SdmEvidence {
  bool is_sdm = false;
  double delta = 0.0;
  int hf_n_rank = 0;
  bool strongly_degenerate = false;
  /// Strong degeneracy plus HF_n ≠ 0 at an admissible k ≥ n + 1.
  std::optional<bool> cross_check;
  int cross_check_k = 0;
};

SdmEvidence detect_sdm(const HamiltonianGerm& h, const FixedPointRecord& record, double delta_tol = 1e-6,
                       LocalFloerOptions opts = {});

struct SdmIterate {
  int k = 1;
  bool is_sdm = false;
  GradedRanks ranks;
};

/// The SDM test applied to γ^k for each admissible k in `ks`.
std::vector<SdmIterate> sdm_iterates(const HamiltonianGerm& h, const FixedPointRecord& record,
                                     const std::vector<int>& ks, double delta_tol = 1e-6, LocalFloerOptions opts = {});

}  // namespace hamiter
