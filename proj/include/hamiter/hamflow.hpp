#pragma once

// Hamiltonian germs on boxes in R^{2n}, their flows and linearized flows,
// fixed points of time-one maps, actions and gap tables.
//
// X_H = 𝕁∇H = (∂H/∂y, −∂H/∂x), so H = −a|z|²/2 turns the plane
// counterclockwise by a over unit time.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hamiter/pathindex.hpp"
#include "hamiter/symplin.hpp"

namespace hamiter {

struct Box {
  Vec lo;
  Vec hi;

  static Box cube(int dim, double radius);
  static Box around(const Vec& centre, double radius);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& z, double slack = 0.0) const;
  Vec centre() const { return 0.5 * (lo + hi); }
  double min_half_width() const { return 0.5 * (hi - lo).minCoeff(); }
};

struct HamiltonianGerm {
  using Scalar = std::function<double(double, const Vec&)>;
  using Gradient = std::function<Vec(double, const Vec&)>;
  using Hessian = std::function<Mat(double, const Vec&)>;

  std::string name;
  int n = 1;
  Box domain;
  Scalar h;
  Gradient grad;  // optional; central differences when empty
  Hessian hess;   // optional; differences of the gradient when empty
  /// This germ stands for H^{#k}: its time-one map is the flow over [0, k].
  int period_span = 1;
  bool autonomous = false;
  /// Length scale for finite-difference steps.
  double fd_scale = 1.0;
  /// Set by product_germ: the two factors, in (x_A, x_B, y_A, y_B) order.
  std::shared_ptr<const std::pair<HamiltonianGerm, HamiltonianGerm>> factors;

  double value(double t, const Vec& z) const { return h(t, z); }
  Vec gradient(double t, const Vec& z) const;
  Mat hessian(double t, const Vec& z) const;
  Vec field(double t, const Vec& z) const;
};

struct FlowOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_dt = 1e-3;
  bool check_domain = true;
};

struct FlowResult {
  Vec z;
  /// |H(z1) − H(z0)| for autonomous germs, NaN otherwise.
  double energy_drift = 0.0;
};

FlowResult flow(const HamiltonianGerm& h, const Vec& z0, double t0, double t1, FlowOptions opts = {});

/// Flow together with its derivative dφ from the variational equation Φ' = 𝕁 Hess H Φ.
std::pair<Vec, Mat> flow_with_jacobian(const HamiltonianGerm& h, const Vec& z0, double t0, double t1,
                                       FlowOptions opts = {});

/// Time-one map φ_H (the flow over [0, period_span]).
Vec time_one_map(const HamiltonianGerm& h, const Vec& z, FlowOptions opts = {});

/// Orbit points at the given normalized times s ∈ [0, 1] (real time s·period_span).
std::vector<Vec> orbit(const HamiltonianGerm& h, const Vec& z, const std::vector<double>& s,
                       FlowOptions opts = {});

/// Linearized flow t ↦ dφ^{t·span}(z) as a refinable path.
SymplecticPath monodromy(const HamiltonianGerm& h, const Vec& z, FlowOptions opts = {});

/// H realized over [0, k]; its time-one map is φ_H^k.
HamiltonianGerm iterate(const HamiltonianGerm& h, int k);

/// K#H by time concatenation: H over the first half, K over the second, both
/// reparametrized with a step flat to all orders at its ends.
HamiltonianGerm compose(const HamiltonianGerm& k, const HamiltonianGerm& h);

/// Germ on R^{2(na+nb)} with H(z) = H_A(z_A) + H_B(z_B) in (x_A, x_B, y_A, y_B) order.
HamiltonianGerm product_germ(const HamiltonianGerm& a, const HamiltonianGerm& b);

/// Translate so that `p` becomes the origin: H'(t, z) = H(t, z + p).
HamiltonianGerm translate(const HamiltonianGerm& h, const Vec& p);

/// Smooth step χ(s) = f(s)/(f(s)+f(1−s)), f(s) = e^{−1/s}, and its derivative.
double flat_step(double s);
double flat_step_derivative(double s);

enum class Degeneracy { Nondegenerate, WeaklyDegenerate, StronglyDegenerate };
std::string to_string(Degeneracy d);

/// Classification from the generalized 1-eigenspace dimension of M.
Degeneracy classify(const Mat& m, double rank_tol = 1e-7);

/// A = −∮ y dx + ∫ H_t(γ(t)) dt over t ∈ [0, span], with γ sampled at uniform
/// normalized times (first and last sample equal).  Throws NotClosed.
double action(const HamiltonianGerm& h, const std::vector<Vec>& loop, double closed_tol = 1e-8);

/// Action of the orbit through a fixed point, using the exact velocity.
double orbit_action(const HamiltonianGerm& h, const Vec& z, int segments = 256, FlowOptions opts = {});

struct FixedPointRecord {
  Vec z;
  double residual = 0.0;
  Mat linearization;
  SymplecticPath monodromy;
  double action = 0.0;
  double delta = 0.0;
  std::optional<int> cz;
  Degeneracy degeneracy = Degeneracy::Nondegenerate;
  double symplectic_defect = 0.0;
  /// ‖φ(z) − z‖ along the Newton iterations that produced z.
  std::vector<double> newton_residuals;
};

/// Fully populated record for a fixed point z of φ_H.
FixedPointRecord make_record(const HamiltonianGerm& h, const Vec& z, double newton_tol = 1e-10,
                             FlowOptions opts = {});

struct NewtonResult {
  Vec z;
  bool converged = false;
  std::vector<double> residuals;
  double last_step = 0.0;
};

/// Newton on φ_H(z) − z with a least-squares step.
NewtonResult newton_fixed_point(const HamiltonianGerm& h, const Vec& seed, double newton_tol,
                                int max_iter = 300, FlowOptions opts = {});

struct FixedPointSearch {
  std::vector<FixedPointRecord> records;
  bool non_isolated = false;
  int divergent_seeds = 0;
  std::vector<std::string> diagnostics;
};

FixedPointSearch find_fixed_points(const HamiltonianGerm& h, const Box& box, int grid_density,
                                   double newton_tol = 1e-10, FlowOptions opts = {});

struct GapRow {
  int i = 0;
  int j = 0;
  int k = 1;
  double action_gap = 0.0;
  double index_gap = 0.0;
  double gamma = 0.0;
};

struct GapTable {
  std::vector<GapRow> rows;
};

/// Rows for every pair i < j and every k.  Throws NotAdmissible.
GapTable gap_table(const std::vector<FixedPointRecord>& records, const std::vector<int>& ks);

}  // namespace hamiter
