#pragma once

#include "wannierlab/spectral.hpp"

namespace wannierlab {

struct ChernResult {
  int chern = 0;
  double residual = 0;  // |sum/2pi - chern|; > 0.1 marks the value unreliable
};

/// Lattice field-strength (plaquette link) Chern number; gauge-free.
ChernResult chern_number(const ProjectionSampler& p, const Tolerances& tol = {});

/// Total Berry phase of a 1d slice (arg det of the Wilson loop of local
/// eigenframe overlaps), in (-pi, pi]. Wannier center sum = -phase/2pi mod 1.
double berry_phase(const std::function<Mat(double)>& slice, int rank, int nodes = 2048);

struct TopologyReport {
  std::optional<ChernResult> chern;
  std::vector<double> berry_phases;
  std::optional<int> det_winding;
};

}  // namespace wannierlab
