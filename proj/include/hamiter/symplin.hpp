#pragma once

// Symplectic linear algebra on R^{2n} with coordinates z = (x_1..x_n, y_1..y_n)
// and symplectic form ω = Σ dy_i ∧ dx_i.

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hamiter/errors.hpp"

namespace hamiter {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Matrix Ω of the symplectic form: ω(u, v) = uᵀ Ω v.  Ω = [[0, -I], [I, 0]].
Mat form_matrix(int n);

/// Matrix 𝕁 with X_H = 𝕁 ∇H for i_{X_H} ω = -dH.  𝕁 = [[0, I], [-I, 0]] = Ωᵀ.
Mat poisson_matrix(int n);

/// Counterclockwise rotation of the (x, y) plane by `angle`.
Mat rotation2(double angle);

class SymplecticMatrix {
 public:
  /// Checks ‖MᵀΩM − Ω‖_∞ ≤ tol and |det M − 1| ≤ tol; throws NotSymplectic.
  static SymplecticMatrix validate(const Mat& m, double tol = 1e-9);
  static SymplecticMatrix identity(int n);

  int n() const { return static_cast<int>(m_.rows() / 2); }
  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double defect() const { return defect_; }

  SymplecticMatrix power(int k) const;
  SymplecticMatrix inverse() const;

  friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b);

 private:
  SymplecticMatrix(Mat m, double defect) : m_(std::move(m)), defect_(defect) {}
  Mat m_;
  double defect_ = 0.0;
};

/// Symplectic defect ‖MᵀΩM − Ω‖_∞ of an arbitrary square matrix.
double symplectic_defect(const Mat& m);

/// Direct sum A ⊕ B acting on (x_A, x_B, y_A, y_B).
Mat direct_sum(const Mat& a, const Mat& b);
SymplecticMatrix direct_sum(const SymplecticMatrix& a, const SymplecticMatrix& b);

/// Index permutation placing the factor coordinates of R^{2na} × R^{2nb} into the
/// product ordering (x_A, x_B, y_A, y_B): product index of factor-A index i.
int product_index_a(int i, int na, int nb);
int product_index_b(int i, int na, int nb);

struct EigenCluster {
  Complex value;
  int multiplicity = 0;
  bool on_unit_circle = false;
  std::optional<int> root_of_unity_order;
};

struct SpectrumOptions {
  double cluster_tol = 1e-8;
  int q_max = 64;
};

struct EigenData {
  std::vector<EigenCluster> clusters;
  double cluster_tol = 1e-8;
  int q_max = 64;

  int total_multiplicity() const;
  /// Multiplicity of the cluster at 1 (0 when absent).
  int unit_multiplicity() const;
};

/// Clustered, symmetry-enforced spectrum.  Throws ClusterAmbiguous when two
/// clusters are closer than 2·cluster_tol after merging.
EigenData spectrum(const SymplecticMatrix& m, SpectrumOptions opts = {});

/// True iff no eigenvalue cluster λ ≠ 1 has root-of-unity order dividing k.
bool admissible(const EigenData& spec, int k);
bool admissible(const SymplecticMatrix& m, int k, SpectrumOptions opts = {});

/// Number of pairs {λ, λ⁻¹} of negative real eigenvalues of M^k, counted with
/// multiplicity, computed from the spectrum of M.
int negative_real_pairs(const EigenData& spec, int k = 1);

/// Parity test between M and M^k.  Throws NotAdmissible when k is not admissible.
bool good(const EigenData& spec, int k);
bool good(const SymplecticMatrix& m, int k, SpectrumOptions opts = {});

struct AdmissibleSet {
  std::vector<int> forbidden_divisors;
  int start = 1;
  int step = 1;
  int horizon = 0;
  bool verified = false;
};

AdmissibleSet admissible_set(const SymplecticMatrix& m, int q_max, int horizon,
                             double cluster_tol = 1e-8);

struct SpectralSplit {
  Mat p_v;  // projector onto the part with spectrum away from 1
  Mat p_w;  // projector onto the generalized 1-eigenspace
  int dim_v = 0;
  int dim_w = 0;
};

/// Riesz-projector splitting R^{2n} = V ⊕ W with spec(M|_W) within `tol` of 1.
/// Throws SplitFailed when an eigenvalue sits near the tolerance boundary.
SpectralSplit split_spectral(const SymplecticMatrix& m, double tol = 1e-6);

/// Dimension of the generalized eigenspace of eigenvalue 1, by rank of (M − I)^{2n}.
int generalized_unit_dimension(const Mat& m, double rank_tol = 1e-7);

}  // namespace hamiter
