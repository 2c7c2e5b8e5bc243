#pragma once

#include <optional>

#include "wannierlab/common.hpp"

namespace wannierlab {

/// Periodic family of N x N unitaries on the closed symmetric k-grid:
/// values[i] at k = -1/2 + i/n for i = 0..n. Node i pairs with node n-i
/// under k -> -k; nodes 0 and n are the identified boundary.
struct UnitaryFamily {
  int n = 0;
  std::vector<Mat> values;  // n+1 entries
  bool cs_prime = false;

  double node(int i) const { return -0.5 + double(i) / n; }
  int center() const { return n / 2; }
  int mirror(int i) const { return n - i; }
  int size() const { return values.empty() ? 0 : int(values[0].rows()); }

  static UnitaryFamily sample(int n, const std::function<Mat(double)>& f, bool cs_prime = false);
  double unitarity_residual() const;
  double periodicity_residual() const;
  double cs_residual() const;  // max ||beta(k)^T - beta(-k)||
};

struct HermitianFamily {
  int n = 0;
  std::vector<Mat> values;

  double node(int i) const { return -0.5 + double(i) / n; }
  int center() const { return n / 2; }
  int mirror(int i) const { return n - i; }

  double cs_residual() const;
  double periodicity_residual() const;
  /// max_k ||e^{i h(k)} - beta(k)||
  double exp_residual(const UnitaryFamily& beta) const;
};

/// winding number of a periodic non-vanishing scalar family given on the
/// closed grid; errors on a zero crossing or when the rounding residual
/// exceeds 0.1 (grid too coarse)
int winding(const std::vector<cxd>& f, const Tolerances& tol = {});

/// beta(k) = beta(0) e^{i phi(k)} with phi real, even, periodic, phi(0) = 0;
/// input must be even and unimodular
std::vector<double> lift_phase(const std::vector<cxd>& beta, const Tolerances& tol = {});

/// logarithm assuming per-node nondegenerate spectrum on the circle;
/// branches tracked by overlap-maximal matching, lifted by lift_phase
HermitianFamily log_noncrossing(const UnitaryFamily& beta, const Tolerances& tol = {});

/// center of the widest spectral-free angular window (inflated by tol.degen),
/// or nullopt when no window of at least 2 pi / bins survives
std::optional<double> circle_gap(const UnitaryFamily& beta, int bins = 256,
                                 const Tolerances& tol = {});

/// global Cayley-transform logarithm, valid when e^{i phi0} avoids the
/// spectrum of beta(k) for every k
HermitianFamily log_cayley(const UnitaryFamily& beta, double phi0, const Tolerances& tol = {});

struct RegularizeResult {
  UnitaryFamily family;
  double sup_distance = 0;   // ||beta' - beta||_inf
  double endpoint_gap = 0;   // min eigenvalue gap at k in {0, +-1/2}
};

/// analytic surrogate with nondegenerate spectrum at 0 and +-1/2: endpoint
/// cluster splitting of size s through the local logarithm, then circular
/// convolution with the periodized Poisson kernel of width nu and polar
/// re-unitarization
RegularizeResult regularize(const UnitaryFamily& beta, double s, double nu,
                            const Tolerances& tol = {});

/// logarithm for families with nondegenerate endpoint spectrum; interior
/// crossings resolved by overlap-maximal branch continuation (grid surrogate
/// of analytic continuation), branch evenness and projection transposition
/// enforced
HermitianFamily log_analytic_endpoints(const UnitaryFamily& beta, const Tolerances& tol = {});

/// u(x,k2) = e^{-ix h1(k2)} e^{-ix h2(k2)} with
/// u(-1/2,k2)^{-1} beta(k2) u(1/2,k2) = Id
struct StraighteningField {
  HermitianFamily h1;
  HermitianFamily h2;
  double s_used = 0;
  double nu_used = 0;
  double boundary_residual = 0;  // the contract above, max over nodes
  double symmetry_residual = 0;  // max ||conj(u(x,k)) - u(-x,-k)||

  Mat u(double x, int node) const;
};

StraighteningField straighten(const UnitaryFamily& beta, const Tolerances& tol = {});

}  // namespace wannierlab
