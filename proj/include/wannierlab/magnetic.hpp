#pragma once

#include <Eigen/Sparse>

#include "wannierlab/model.hpp"
#include "wannierlab/wannier.hpp"

namespace wannierlab {

using SpMat = Eigen::SparseMatrix<cxd>;

struct MagneticConfig {
  double b_max = 0.05;
  // empty: constant field B = 1 (the coupling b carries the magnitude);
  // otherwise a bounded field sampler with ||B||_C1 <= 1
  std::function<double(std::array<double, 2>)> field;
  bool constant() const { return !field; }
};

/// Line-integral Peierls phase along the segment x' -> x in the transverse
/// gauge. Constant field: phi = (x1' x2 - x1 x2') / 2, antisymmetric and
/// bilinear; variable field: 32-point Gauss-Legendre on both nested
/// integrals.
double peierls_phase(std::array<double, 2> x, std::array<double, 2> xp,
                     const MagneticConfig& cfg);

/// Finite L x L-cell patch of a 2d model, open boundary, cells centered at 0:
/// gamma in [-L/2, L/2)^2.
struct LatticePatch {
  TightBindingModel model;
  int L = 0;
  int sites_per_cell = 0;

  int cells() const { return L * L; }
  int sites() const { return cells() * sites_per_cell; }
  int cell_low() const { return -L / 2; }
  int cell_high() const { return L / 2 - 1; }
  bool in_patch(int gx, int gy) const {
    return gx >= cell_low() && gx <= cell_high() && gy >= cell_low() && gy <= cell_high();
  }
  int cell_index(int gx, int gy) const {
    return (gy - cell_low()) * L + (gx - cell_low());
  }
  int site_index(int gx, int gy, int s) const { return cell_index(gx, gy) * sites_per_cell + s; }
  std::array<double, 2> position(int idx) const {
    const int s = idx % sites_per_cell;
    const int c = idx / sites_per_cell;
    const int gx = c % L + cell_low();
    const int gy = c / L + cell_low();
    return {gx + model.sites[s][0], gy + model.sites[s][1]};
  }
};

LatticePatch build_patch(const TightBindingModel& model, int cells_per_side);

/// H_b on the patch: every hopping dressed by e^{i b phi(x, x')}; Hermitian.
SpMat peierls_hamiltonian(const LatticePatch& patch, const MagneticConfig& cfg, double b,
                          const Tolerances& tol = {});

/// Polynomial spectral projector for large sparse patch Hamiltonians: a
/// Chebyshev expansion of an erf-smoothed window indicator, with the
/// smoothing width tied to the spectral gap. Validated against dense
/// eigendecomposition on small patches.
class ChebyshevProjector {
 public:
  /// smoothing: erf width of the window edges; 0 picks (hi-lo)/25. Both
  /// window edges must clear the spectrum by >= 6 sigma.
  ChebyshevProjector(const SpMat& h, double window_lo, double window_hi,
                     double target_accuracy = 1e-12, double smoothing = 0.0);
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& block) const;
  /// real fast path, valid when the Hamiltonian itself is real
  Eigen::MatrixXd apply(const Eigen::MatrixXd& block) const;
  bool is_real() const { return real_ok_; }
  int degree() const { return int(coeffs_.size()) - 1; }
  /// max_j ||P^2 v_j - P v_j|| / ||v_j|| over random probes; large values
  /// signal gap closure under the perturbation
  double idempotency_probe(int probes = 4, unsigned seed = 2026) const;

 private:
  SpMat h_;
  Eigen::SparseMatrix<double> h_real_;
  bool real_ok_ = false;
  double center_ = 0, halfwidth_ = 1;
  std::vector<double> coeffs_;
};

/// Orthonormal localized functions w_{j,gamma} on the patch, stored as
/// sparse columns labeled by (cell, band).
struct LocalizedBasis {
  LatticePatch patch;
  int nbands = 0;
  SpMat cols;                                   // sites x (cells*nbands)
  std::vector<std::array<int, 2>> cell_of_col;  // gamma per column
  std::vector<int> band_of_col;

  int col_index(int gx, int gy, int j) const {
    return patch.cell_index(gx, gy) * nbands + j;
  }
  double orthonormality_defect() const;
  double max_imag() const;
};

/// Zero-field Wannier basis of the patch: bulk Wannier translates projected
/// onto Ran P0 of the patch Hamiltonian and symmetrically orthonormalized.
/// Exactly real for real models, orthonormal, exponentially localized, and
/// spanning Ran P0.
/// col_prune: drop basis-column entries below this after orthonormalization;
/// looser values trade a proportional bias in downstream residuals for
/// much sparser columns on large patches.
LocalizedBasis zero_field_basis(const LatticePatch& patch, const WannierSet& bulk,
                                double window_lo, double window_hi,
                                const Tolerances& tol = {}, double smoothing = 0.0,
                                double col_prune = 1e-12);

/// Peierls-dressed columns: d_{j,gamma}(x) = e^{i b phi(x, gamma)} w_{j,gamma}(x)
SpMat dressed_columns(const LocalizedBasis& w, const MagneticConfig& cfg, double b);

/// Gram matrix M_b(gamma,j;gamma',j') = <d_{gamma,j}, d_{gamma',j'}>;
/// errors when the smallest eigenvalue drops below 1/2 (b too large).
SpMat gram_matrix(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                  const Tolerances& tol = {});

/// inverse square root of a sparse near-identity Gram by the binomial series
/// in (M - Id), pruned; series_terms reports the order used
SpMat gram_inv_sqrt(const SpMat& gram, int* series_terms = nullptr);

/// Psi = dressed * M_b^{-1/2}: orthonormal basis of the dressed span S_b.
LocalizedBasis ortho_magnetic_basis(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                    const Tolerances& tol = {});

struct TransferResult {
  double pi_p_distance = 0;          // ||Pi_b - P_b||
  double range_residual = 0;         // max_c ||P_b Xi_c - Xi_c||
  double orthonormality_defect = 0;  // on the evaluated block
  double gram_min_eig_bound = 0;     // 1 - ||M_b - Id||
  // Xi columns for the requested (cell, band) labels
  std::vector<std::array<int, 2>> cells;
  std::vector<int> bands;
  Eigen::MatrixXcd xi;
  Eigen::MatrixXcd psi;      // matching Psi columns
  Eigen::MatrixXcd dressed;  // matching e^{i b phi(., gamma)} w columns
};

/// Sz.-Nagy transfer of Psi onto Ran P_b, evaluated on the requested cells.
/// All operator applications are matrix free (Chebyshev P_b, series U_b).
TransferResult magnetic_transfer(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                 double window_lo, double window_hi,
                                 const std::vector<std::array<int, 2>>& eval_cells,
                                 const Tolerances& tol = {}, double smoothing = 0.0);

struct CovarianceReport {
  double covariance_residual = 0;   // Xi_{j,gamma,b} vs tau_gamma^b Xi_{j,0,b}
  double conjugation_residual = 0;  // conj(Xi_{j,0,b}) vs Xi_{j,0,-b}
  bool covariance_pass = false;
  bool conjugation_pass = false;
};

/// Theorem-2(ii) identities on interior cells; requires a constant field.
CovarianceReport covariance_checks(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                   double window_lo, double window_hi, int margin_cells,
                                   const Tolerances& tol = {}, double smoothing = 0.0);

/// largest |eigenvalue| of the Hermitian difference Pi_b - P_b by power
/// iteration with matrix-free applications
double projector_distance(const LocalizedBasis& psi, const ChebyshevProjector& pb,
                          int iters = 60, unsigned seed = 7);

/// power-iteration estimate of the largest |eigenvalue| of a sparse
/// Hermitian matrix (avoids densifying large Grams)
double sparse_opnorm_hermitian(const SpMat& a, int iters = 60, unsigned seed = 5);

}  // namespace wannierlab
