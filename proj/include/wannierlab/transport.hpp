#pragma once

#include <functional>

#include "wannierlab/common.hpp"

namespace wannierlab {

/// 1-parameter slice of a projection family
using ProjSlice = std::function<Mat(double)>;

struct Propagator {
  double from = 0;
  double to = 0;
  Mat u;
};

enum class TransportMode {
  // commutator-free 4th-order Magnus steps (two Gauss-node exponentials),
  // re-unitarized by polar projection
  magnus,
  // chained Sz.-Nagy intertwiners between adjacent nodes; intertwines the
  // endpoint projections exactly, used as a cross-validation oracle
  projector_composition,
};

/// Kato kernel K(x) = i [P'(x), P(x)], P' by central differences at spacing
/// dx, Hermitian by explicit symmetrization.
Mat kato_kernel(const ProjSlice& p, double x, double dx);

/// Parallel transport over [from, to] in `steps` grid steps.
Propagator propagate(const ProjSlice& p, double from, double to, int steps,
                     TransportMode mode = TransportMode::magnus);

/// Principal self-adjoint logarithm of the loop propagator, block-diagonal in
/// the p0 / (1-p0) split; errors when the loop fails to commute with p0
/// within tau_commute.
Mat holonomy_log(const Mat& a_loop, const Mat& p0, double tau_commute);

}  // namespace wannierlab
