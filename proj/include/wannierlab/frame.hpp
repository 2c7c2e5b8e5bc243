#pragma once

#include "wannierlab/grid.hpp"
#include "wannierlab/spectral.hpp"
#include "wannierlab/transport.hpp"
#include "wannierlab/unilog.hpp"

namespace wannierlab {

/// Orthonormal frame of Ran P(k) over the closed grid: a D x N matrix per
/// node, periodic, optionally conjugation symmetric.
struct BlochFrame {
  KGrid grid;
  int d = 0;         // ambient dimension D
  int nbands = 0;    // N
  CsState cs = CsState::unknown;
  std::string provenance;
  // dim 1: n1+1 entries; dim 2: (n1+1)*(n2+1), row-major in (i, j)
  std::vector<Mat> values;

  const Mat& at(int i) const { return values[size_t(i)]; }
  Mat& at(int i) { return values[size_t(i)]; }
  const Mat& at(int i, int j) const { return values[size_t(i) * (grid.n2 + 1) + j]; }
  Mat& at(int i, int j) { return values[size_t(i) * (grid.n2 + 1) + j]; }

  struct Residuals {
    double orthonormality = 0;
    double range = 0;
    double periodicity = 0;
    double cs = 0;
  };
  Residuals residuals(const ProjectionSampler& p) const;
};

/// Real orthonormal basis of Ran P0 for a real (conjugation-invariant) P0.
RMat real_seed(const Mat& p0, const Tolerances& tol = {});

/// d=1 construction: U(k) = A(k,0) e^{-ikM}, frame = U(k) seed.
/// With a CS sampler and real seed the output satisfies conj(F(k)) = F(-k).
BlochFrame frame_1d(const ProjectionSampler& p, std::optional<RMat> seed = std::nullopt,
                    TransportMode mode = TransportMode::magnus, const Tolerances& tol = {});

/// beta_{nm}(k2) = <Xi_n(0,k2), A_{k2}(1,0) Xi_m(0,k2)>
UnitaryFamily matching_matrix(const ProjectionSampler& p, const BlochFrame& column,
                              TransportMode mode = TransportMode::magnus,
                              const Tolerances& tol = {});

/// d=2 construction under CS: column frame, k1-transport, matching matrix,
/// straightening. Errors at the CS gate with the Chern number attached.
BlochFrame frame_2d(const ProjectionSampler& p, TransportMode mode = TransportMode::magnus,
                    const Tolerances& tol = {});

}  // namespace wannierlab
