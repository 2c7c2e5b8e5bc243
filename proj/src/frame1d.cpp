#include <Eigen/QR>

#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"

namespace wannierlab {

BlochFrame::Residuals BlochFrame::residuals(const ProjectionSampler& p) const {
  Residuals r;
  const Mat id = Mat::Identity(nbands, nbands);
  auto visit = [&](int i, int j) {
    const Mat& f = grid.dim == 1 ? at(i) : at(i, j);
    r.orthonormality = std::max(r.orthonormality, (f.adjoint() * f - id).norm());
    r.range = std::max(r.range, (p(grid.node(i, j)) * f - f).norm());
    const Mat& fm = grid.dim == 1 ? at(grid.mirror1(i)) : at(grid.mirror1(i), grid.mirror2(j));
    r.cs = std::max(r.cs, (f.conjugate() - fm).norm());
  };
  if (grid.dim == 1) {
    for (int i = 0; i <= grid.n1; ++i) visit(i, 0);
    r.periodicity = (at(0) - at(grid.n1)).norm();
  } else {
    for (int i = 0; i <= grid.n1; ++i)
      for (int j = 0; j <= grid.n2; ++j) visit(i, j);
    for (int j = 0; j <= grid.n2; ++j)
      r.periodicity = std::max(r.periodicity, (at(0, j) - at(grid.n1, j)).norm());
    for (int i = 0; i <= grid.n1; ++i)
      r.periodicity = std::max(r.periodicity, (at(i, 0) - at(i, grid.n2)).norm());
  }
  return r;
}

RMat real_seed(const Mat& p0, const Tolerances& tol) {
  if ((p0.conjugate() - p0).norm() > tol.cs)
    throw Error("real_seed", "projection at k=0 is not real");
  const int d = int(p0.rows());
  const int n = int(std::lround(p0.real().trace()));
  // real/imaginary parts of an eigenbasis, then pivoted orthogonalization
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(p0));
  RMat cand(d, 2 * n);
  for (int j = 0; j < n; ++j) {
    cand.col(2 * j) = es.eigenvectors().col(d - 1 - j).real();
    cand.col(2 * j + 1) = es.eigenvectors().col(d - 1 - j).imag();
  }
  Eigen::ColPivHouseholderQR<RMat> qr(cand);
  RMat q = qr.householderQ() * RMat::Identity(d, n);
  if (qr.rank() < n) throw Error("real_seed", "rank deficiency after realification");
  // columns must span Ran P0
  if ((p0 * q.cast<cxd>() - q.cast<cxd>()).norm() > 1e-8)
    throw Error("real_seed", "realified basis left the range of P0");
  return q;
}

namespace {

// step-cumulative transport from the center node outward; index a = |i - n/2|
std::vector<Mat> cumulative(const ProjSlice& slice, double dk, int halfsteps, int dir,
                            TransportMode mode) {
  std::vector<Mat> acc;
  const int d = int(slice(0.0).rows());
  acc.reserve(halfsteps + 1);
  acc.push_back(Mat::Identity(d, d));
  for (int i = 0; i < halfsteps; ++i) {
    double x0 = dir * i * dk;
    Propagator step = propagate(slice, x0, x0 + dir * dk, 1, mode);
    acc.push_back(polar_unitary(step.u * acc.back()));
  }
  return acc;
}

}  // namespace

BlochFrame frame_1d(const ProjectionSampler& p, std::optional<RMat> seed_in, TransportMode mode,
                    const Tolerances& tol) {
  if (p.dim() != 1) throw Error("frame_1d", "expected a 1d sampler");
  const KGrid& grid = p.grid();
  const int n = grid.n1, d = p.size(), nb = p.rank();
  auto slice = p.slice1();
  const Mat p0 = slice(0.0);

  Mat seed;
  const bool want_cs = p.cs_flag() == CsState::holds;
  if (seed_in) {
    seed = seed_in->cast<cxd>();
    if (seed.rows() != d || seed.cols() != nb) throw Error("frame_1d", "seed has wrong shape");
  } else if (want_cs) {
    seed = real_seed(p0, tol).cast<cxd>();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(p0));
    seed = es.eigenvectors().rightCols(nb);
  }
  if ((p0 * seed - seed).norm() > tol.frame)
    throw Error("frame_1d", "seed is not in the range of P(0)");

  auto right = cumulative(slice, grid.dk1(), n / 2, +1, mode);
  auto left = cumulative(slice, grid.dk1(), n / 2, -1, mode);
  // A(1,0) = A(1,1/2) A(1/2,0) = A(0,-1/2) A(1/2,0)
  Mat loop = left.back().adjoint() * right.back();
  const double dx = grid.dk1();
  Mat m = holonomy_log(loop, p0, std::max(100.0 * dx * dx, 1e-10));

  BlochFrame f;
  f.grid = grid;
  f.d = d;
  f.nbands = nb;
  f.cs = want_cs && !seed_in ? CsState::holds : CsState::unknown;
  f.provenance = "frame_1d";
  f.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double k = grid.node1(i);
    const int a = std::abs(i - n / 2);
    const Mat& trans = (i >= n / 2) ? right[a] : left[a];
    f.at(i) = trans * expi(m, -k) * seed;
  }
  return f;
}

}  // namespace wannierlab
