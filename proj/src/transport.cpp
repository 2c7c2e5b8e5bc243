#include "wannierlab/transport.hpp"

#include <cmath>

#include "wannierlab/linalg.hpp"
#include "wannierlab/spectral.hpp"

namespace wannierlab {

Mat kato_kernel(const ProjSlice& p, double x, double dx) {
  Mat dp = (p(x + dx / 2) - p(x - dx / 2)) / dx;
  Mat px = p(x);
  Mat k = cxd(0, 1) * (dp * px - px * dp);
  return hermitize(k);
}

namespace {

// 4th-order central difference of P at x, base spacing dx
Mat dproj4(const ProjSlice& p, double x, double dx) {
  const double h = dx / 2;
  return (8.0 * (p(x + h) - p(x - h)) - (p(x + 2 * h) - p(x - 2 * h))) / (12 * h);
}

Mat kato_kernel4(const ProjSlice& p, double x, double dx) {
  Mat dp = dproj4(p, x, dx);
  Mat px = p(x);
  return hermitize(cxd(0, 1) * (dp * px - px * dp));
}

// commutator-free 4th-order Magnus step from x to x+dx
Mat step_cf4(const ProjSlice& p, double x, double dx) {
  static const double sq3 = std::sqrt(3.0);
  const double c1 = x + dx * (0.5 - sq3 / 6), c2 = x + dx * (0.5 + sq3 / 6);
  Mat k1 = kato_kernel4(p, c1, std::abs(dx));
  Mat k2 = kato_kernel4(p, c2, std::abs(dx));
  const double a1 = 0.25 + sq3 / 6, a2 = 0.25 - sq3 / 6;
  return expi(a1 * k1 + a2 * k2, -dx) * expi(a2 * k1 + a1 * k2, -dx);
}

}  // namespace

Propagator propagate(const ProjSlice& p, double from, double to, int steps, TransportMode mode) {
  const int d = int(p(from).rows());
  Mat a = Mat::Identity(d, d);
  if (steps <= 0 || from == to) return {from, to, a};
  const double dx = (to - from) / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = from + i * dx;
    if (mode == TransportMode::magnus) {
      a = step_cf4(p, x, dx) * a;
    } else {
      a = sz_nagy(p(x + dx), p(x)) * a;
    }
    a = polar_unitary(a);
  }
  return {from, to, a};
}

Mat holonomy_log(const Mat& a_loop, const Mat& p0, double tau_commute) {
  const auto id = Mat::Identity(p0.rows(), p0.cols());
  if (opnorm(p0 * a_loop - a_loop * p0) > tau_commute)
    throw Error("holonomy_log", "holonomy does not preserve fiber");
  Mat blk = p0 * a_loop * p0 + (id - p0) * a_loop * (id - p0);
  blk = polar_unitary(blk);
  auto eig = eig_unitary(blk);
  Vec phases(eig.vals.size());
  for (Eigen::Index i = 0; i < eig.vals.size(); ++i) phases(i) = principal_arg(eig.vals(i));
  return hermitize(eig.vecs * phases.asDiagonal() * eig.vecs.adjoint());
}

}  // namespace wannierlab
