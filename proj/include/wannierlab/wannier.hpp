#pragma once

#include "wannierlab/frame.hpp"

namespace wannierlab {

/// Real-space amplitudes w_j(ybar+gamma) on the cell box |gamma_i| <= radius:
/// one D x N matrix per cell offset (row = basis site, column = j).
struct WannierSet {
  int dim = 1;
  int d = 0;
  int nbands = 0;
  int radius = 0;
  std::string provenance;
  std::vector<Mat> amps;  // row-major over the box

  int side() const { return 2 * radius + 1; }
  int cells() const { return dim == 1 ? side() : side() * side(); }
  const Mat& at(int g1, int g2 = 0) const {
    return amps[size_t(g1 + radius) * (dim == 2 ? side() : 1) + (dim == 2 ? g2 + radius : 0)];
  }
  Mat& at(int g1, int g2 = 0) {
    return amps[size_t(g1 + radius) * (dim == 2 ? side() : 1) + (dim == 2 ? g2 + radius : 0)];
  }

  double parseval_defect() const;      // max_j |sum |w_j|^2 - 1|
  double orthonormality_defect() const;
  double max_imag() const;
  /// center of mass sum_j sum_gamma gamma |w_j(.+gamma)|^2 along an axis
  double center_of_mass(int axis = 0) const;
  /// l2 norm over all sites and bands in the shell ||gamma|| = r
  std::vector<std::pair<double, double>> shell_norms() const;  // (r, norm)
};

/// w_j(ybar+gamma) = (1/n^d) sum_k e^{-2 pi i k.gamma} Xi_j(ybar;k), the exact
/// DFT quadrature of the frame on its uniform periodic grid. Errors when the
/// box exceeds what the grid resolves (aliasing).
WannierSet wannier_transform(const BlochFrame& frame, int radius);

struct DecayFit {
  double log_c = 0;
  double alpha = 0;
  double residual = 0;  // fraction of log-variance unexplained by the line
  bool exponential = false;
};

struct DecayReport {
  std::vector<DecayFit> per_band;  // [0] is the joint fit over all bands
};

/// least squares of log shell norm vs ||gamma||; requires >= 4 usable shells
DecayReport decay_fit(const WannierSet& w);

/// Mollify-by-Poisson-kernel, project, and Gram-correct: analytic surrogate
/// of a continuous frame. Errors when ||gram - Id|| exceeds 1/2 (delta too
/// large).
BlochFrame smooth_lift(const BlochFrame& frame, const ProjectionSampler& p, double delta,
                       const Tolerances& tol = {});

/// auto-halve delta from 0.1 until smooth_lift accepts; returns the frame and
/// the accepted delta
std::pair<BlochFrame, double> smooth_lift_auto(const BlochFrame& frame,
                                               const ProjectionSampler& p,
                                               const Tolerances& tol = {});

/// fitted geometric ratio r of the frame's Fourier coefficient norms
/// (exponential Fourier decay is the grid surrogate of analyticity)
double fourier_decay_ratio(const BlochFrame& frame);

}  // namespace wannierlab
