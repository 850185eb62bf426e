#pragma once

// Generating functions of near-identity germs with respect to the complement
// N₀ = {((x, 0), (0, y))}: φ(z) − z = X_F(ψ(z)) with ψ(z) = (x-part of φ(z), y)
// and F(0) = 0.

#include <functional>
#include <string>
#include <vector>

#include "hamiter/hamflow.hpp"

namespace hamiter {

/// Node-sampled function on a box; axis 0 varies fastest in `values`.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Box box, std::vector<int> resolution);

  static ScalarField sample(const Box& box, const std::vector<int>& resolution,
                            const std::function<double(const Vec&)>& f);

  int dim() const { return static_cast<int>(resolution_.size()); }
  long size() const { return static_cast<long>(values_.size()); }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return resolution_; }
  double spacing(int axis) const;
  long stride(int axis) const { return strides_[axis]; }

  std::vector<int> coords(long index) const;
  long index(const std::vector<int>& coords) const;
  Vec node(long index) const;
  /// Index of the node at the point z, or −1 when z is not a node.
  long node_at(const Vec& z, double tol = 1e-12) const;

  double& operator[](long i) { return values_[i]; }
  double operator[](long i) const { return values_[i]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Multilinear interpolation; z must lie in the box.
  double operator()(const Vec& z) const;

  /// Central-difference gradient at an interior node (one-sided on the boundary).
  Vec gradient(long index) const;
  /// Central-difference Hessian at a node at least one step from the boundary.
  Mat hessian(long index) const;
  bool interior(long index, int margin = 1) const;

 private:
  Box box_;
  std::vector<int> resolution_;
  std::vector<long> strides_;
  std::vector<double> values_;
};

/// Map germ with derivative; the fixed point sits at the origin.
struct GermMap {
  int n = 1;
  Box box;
  std::function<std::pair<Vec, Mat>(const Vec&)> eval;

  Vec operator()(const Vec& z) const { return eval(z).first; }
  Mat jacobian(const Vec& z) const { return eval(z).second; }
};

/// φ_H^k from the flow of H over [0, k·span].  Checks φ(0) = 0.
GermMap germ_map(const HamiltonianGerm& h, int k = 1, FlowOptions opts = {});
GermMap linear_map(const Mat& m, const Box& box);
GermMap power(const GermMap& phi, int k);
/// C⁻¹ ∘ φ ∘ C for an invertible C; the box is pulled back to a box containing C⁻¹(box).
GermMap conjugate(const GermMap& phi, const Mat& c);

/// Symplectic diagonal scaling C with ‖C⁻¹MC − I‖₂ ≤ target for unipotent M of
/// shear type.  Throws HypothesisFailed when no scaling in the search range works.
Mat near_identity_conjugator(const Mat& m, double target = 0.2);

/// ψ_k(z) = (x-part of φ^k(z), y) with its Jacobian.
GermMap psi(const GermMap& phi, int k = 1);

struct PsiInvertibility {
  double max_deviation = 0.0;  // sup ‖Dψ − I‖₂ over samples
  bool invertible = false;     // deviation < 1 on a convex box
};

/// Samples Dψ_k on a grid over `box`; throws NotInvertibleOnBox when ψ_k − id
/// is not a contraction there.
PsiInvertibility psi_invertibility(const GermMap& phi, int k, const Box& box, int samples_per_axis = 9);

struct GFOptions {
  double c1_gate = 0.2;
  double defect_tol = 1e-6;
  double newton_tol = 1e-14;
};

struct GeneratingFunction {
  ScalarField f;
  int k = 1;
  /// Max |loop integral| of the recovered 1-form over grid plaquettes.
  double closedness_defect = 0.0;
  /// Max difference between F assembled along two different axis orders.
  double path_discrepancy = 0.0;
  /// Max over interior nodes of ‖(φ^k(z) − z) − X_F(ψ_k(z))‖ with X_F from F by differences.
  double reconstruction_residual = 0.0;
  /// sup ‖Dφ^k − I‖₂ over the grid preimages.
  double c1_deviation = 0.0;
  /// Preimage z of each node and the displacement φ^k(z) − z there.
  std::vector<Vec> preimages;
  std::vector<Vec> displacements;
};

/// Box must be centred at 0 with odd resolutions so that 0 is a node.
/// Throws NotC1Small, NotInvertibleOnBox, ClosednessDefect.
GeneratingFunction generating_function(const GermMap& phi, int k, const Box& box, const std::vector<int>& resolution,
                                       GFOptions opts = {});

struct GFPropertyReport {
  int critical_nodes = 0;
  int fixed_nodes = 0;
  bool sets_match = false;
  double threshold = 0.0;
  double max_gradient_mismatch = 0.0;
  std::vector<double> box_radii;
  std::vector<double> c2_over_c1;
  bool ratio_bounded = false;
};

/// Critical nodes of F against nodes whose preimage is fixed.
GFPropertyReport gf_property_report(const GeneratingFunction& gf);

/// Appends the ratio ‖F‖_{C²}/‖φ − id‖_{C¹} over shrinking boxes to `report`.
void gf_ratio_sequence(const GermMap& phi, int k, const std::vector<double>& radii, int resolution,
                       GFPropertyReport& report, GFOptions opts = {});

struct Shell {
  double r_inner = 0.0;
  double r_outer = 0.0;
};

struct IsolationScan {
  bool isolated = false;
  double min_gradient = 0.0;
  double worst_t = 0.0;
  std::string note;
};

/// min over t and shell nodes of ‖∇(t·F_k + (1 − t)·k·F)‖ > margin.
IsolationScan homotopy_isolation_scan(const ScalarField& f, const ScalarField& fk, int k,
                                      const std::vector<double>& t_samples, Shell shell, double margin = 1e-12);

struct IterationBound {
  double c1_norm = 0.0;   // ‖φ − id‖_{C¹} on the samples
  double constant = 0.0;  // max ‖(φ^k − id) − k(φ − id)‖ / (‖φ − id‖_{C¹}·‖φ − id‖)
};

/// Empirical constant comparing the k-th iterate's displacement with k times
/// the displacement of φ on grid samples of `box`.
IterationBound iteration_bound(const GermMap& phi, int k, const Box& box, int samples_per_axis = 9);

}  // namespace hamiter
