#pragma once

// Index theory of paths in Sp(2n): the normalized rotation function ρ, the mean
// index Δ, the Conley–Zehnder index and the Maslov index of loops.
//
// Sign convention: a counterclockwise rotation of the (x, y) plane has ρ = e^{iθ}.
// With X_H = (H_y, −H_x), a nondegenerate maximum with small Hessian rotates
// counterclockwise, so it gets Δ ∈ (0, 2n) and μ_CZ = n.

#include <functional>
#include <optional>
#include <vector>

#include "hamiter/symplin.hpp"

namespace hamiter {

/// Path t ∈ [0, 1] ↦ M_t in Sp(2n) starting at the identity.  The optional
/// sampler evaluates the path at an ascending list of times and is used for
/// step-doubling refinement.
class SymplecticPath {
 public:
  using Sampler = std::function<std::vector<Mat>(const std::vector<double>& times)>;

  SymplecticPath() = default;
  SymplecticPath(std::vector<double> times, std::vector<Mat> samples, Sampler sampler = {});
  /// Refinable path; initial samples at `segments` uniform segments.
  SymplecticPath(int n, Sampler sampler, int segments = 64);

  /// Path backed by a pointwise generator t ↦ M_t; initial samples at N segments.
  static SymplecticPath from_function(const std::function<Mat(double)>& f, int segments = 64);
  static SymplecticPath constant_identity(int n);

  int n() const { return n_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Mat>& samples() const { return samples_; }
  const Mat& endpoint() const { return samples_.back(); }
  bool refinable() const { return static_cast<bool>(sampler_); }

  /// Path values at ascending times in [0, 1].  Without a sampler only the
  /// stored times can be requested.
  std::vector<Mat> at(const std::vector<double>& times) const;

 private:
  int n_ = 0;
  std::vector<double> times_;
  std::vector<Mat> samples_;
  Sampler sampler_;
};

std::vector<double> uniform_times(int segments);

/// Linearized k-th iterate: Ψ^k(t) = Ψ(kt − j) Ψ(1)^j for t ∈ [j/k, (j+1)/k].
SymplecticPath iterate_path(const SymplecticPath& path, int k);
/// Pointwise direct sum on (x_A, x_B, y_A, y_B).
SymplecticPath direct_sum_path(const SymplecticPath& a, const SymplecticPath& b);
/// Pointwise product t ↦ A(t) B(t); with A a loop this is the action of a local loop.
SymplecticPath product_path(const SymplecticPath& a, const SymplecticPath& b);
/// Path t ↦ exp(t·A) for a Hamiltonian matrix A.
SymplecticPath exponential_path(const Mat& generator, int segments = 64);

/// Normalized rotation ρ(M) = (−1)^{m₋/2} Π λ^{m⁺(λ)} over unit-circle eigenvalues
/// λ ≠ ±1, m⁺ the positive index of the Krein form −i·v*Ωv on the generalized
/// eigenspace and m₋ the total multiplicity of negative real eigenvalues.
Complex rho(const Mat& m, double cluster_tol = 1e-8);
Complex rho(const SymplecticMatrix& m, double cluster_tol = 1e-8);

/// det(X + iY) of the unitary factor U = [[X, −Y], [Y, X]] of the polar decomposition.
Complex rho_polar(const Mat& m);

/// Endpoint correction e(M) = Σ m⁺(λ)(1 − θ_λ/π) over unit-circle eigenvalues
/// λ = e^{iθ_λ} ≠ 1, θ_λ ∈ (0, 2π); μ_CZ = Δ + e(M) for nondegenerate endpoints.
double cz_endpoint_correction(const Mat& m, double cluster_tol = 1e-8);

struct WindingOptions {
  double agreement_tol = 1e-9;
  int initial_segments = 64;
  int max_segments = 1 << 20;
  /// Consecutive arguments must differ by less than this to count as resolved.
  double max_jump = 0.5;
};

/// Total continuous change of arg f(M_t) along the path; used by mean_index
/// (f = ρ) and maslov_loop (f = ρ_polar).
double winding(const SymplecticPath& path, const std::function<Complex(const Mat&)>& f,
               WindingOptions opts = {});

double mean_index(const SymplecticPath& path, WindingOptions opts = {});

/// Throws DegenerateEndpoint when the endpoint has an eigenvalue within
/// `degeneracy_tol` of 1.
int conley_zehnder(const SymplecticPath& path, double degeneracy_tol = 1e-8,
                   WindingOptions opts = {});

/// Throws NotALoop when the endpoint is not the identity within `loop_tol`.
int maslov_loop(const SymplecticPath& path, double loop_tol = 1e-7, WindingOptions opts = {});

struct IndexReport {
  int n = 0;
  double delta = 0.0;
  std::optional<int> cz;
  std::optional<int> maslov;
  bool nondegenerate = false;
  double winding_uncertainty = 0.0;
};

IndexReport index_report(const SymplecticPath& path, double degeneracy_tol = 1e-8,
                         WindingOptions opts = {});

}  // namespace hamiter
