#include "wannierlab/spectral.hpp"

#include <cmath>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

std::vector<int> SpectralWindow::resolve(const RVec& evals) const {
  const int d = int(evals.size());
  if (std::holds_alternative<std::vector<int>>(sel)) {
    auto idx = std::get<std::vector<int>>(sel);
    if (idx.size() == 1 && idx[0] == -1) {  // lower_half marker
      idx.clear();
      for (int i = 0; i < d / 2; ++i) idx.push_back(i);
    }
    for (int i : idx)
      if (i < 0 || i >= d) throw Error("spectral", "band index out of range");
    return idx;
  }
  auto [lo, hi] = std::get<std::pair<double, double>>(sel);
  std::vector<int> idx;
  for (int i = 0; i < d; ++i)
    if (evals(i) >= lo && evals(i) <= hi) idx.push_back(i);
  return idx;
}

ProjectionSampler spectral_projection(const BlochSampler& h, const SpectralWindow& window,
                                      const KGrid& grid, const Tolerances& tol) {
  const int d = h.size();
  // one pass over the grid: fix N, record the gap, catch closures early
  int rank = -1;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid.n1; ++i) {
    const int jmax = grid.dim == 2 ? grid.n2 : 0;
    for (int j = 0; j <= jmax; ++j) {
      KVec k = grid.node(i, j);
      Eigen::SelfAdjointEigenSolver<Mat> es(h(k));
      auto idx = window.resolve(es.eigenvalues());
      if (idx.empty() || int(idx.size()) == d) {
        if (idx.empty()) throw Error("spectral", "window selects no bands", k, grid.dim);
      }
      if (rank < 0) rank = int(idx.size());
      if (int(idx.size()) != rank)
        throw Error("spectral", "window selects a varying band count", k, grid.dim);
      std::vector<bool> in(d, false);
      for (int b : idx) in[b] = true;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          if (in[a] && !in[b])
            min_gap = std::min(min_gap, std::abs(es.eigenvalues()(a) - es.eigenvalues()(b)));
      if (min_gap < tol.gap && rank != d)
        throw Error("spectral", "spectral gap closes (gap=" + std::to_string(min_gap) + ")", k,
                    grid.dim);
    }
  }
  if (rank == d) min_gap = std::numeric_limits<double>::infinity();

  SpectralWindow win = window;
  auto heval = h;
  ProjectionSampler p(grid.dim, d, rank, grid, [heval, win, rank](KVec k) {
    Eigen::SelfAdjointEigenSolver<Mat> es(heval(k));
    auto idx = win.resolve(es.eigenvalues());
    if (int(idx.size()) != rank)
      throw Error("spectral", "window selects a varying band count off-grid");
    Mat p = Mat::Zero(es.eigenvectors().rows(), es.eigenvectors().rows());
    for (int b : idx) {
      auto v = es.eigenvectors().col(b);
      p += v * v.adjoint();
    }
    return p;
  });
  p.set_min_gap(min_gap);
  p.set_cs(h.cs_flag());
  return p;
}

Mat sz_nagy(const Mat& p, const Mat& q, const Tolerances& tol) {
  const double dist = opnorm(p - q);
  if (dist >= 1.0) throw Error("sz_nagy", "projections too far: ||P-Q|| >= 1");
  const auto id = Mat::Identity(p.rows(), p.cols());
  Mat d = id - (q - p) * (q - p);
  Mat u = (p * q + (id - p) * (id - q)) * inv_sqrt_psd(hermitize(d), tol);
  return u;
}

Mat inv_sqrt_psd(const Mat& a, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(a));
  if (es.eigenvalues().minCoeff() <= tol.pd)
    throw Error("inv_sqrt_psd", "matrix is not positive definite (min eig " +
                                    std::to_string(es.eigenvalues().minCoeff()) + ")");
  RVec inv = es.eigenvalues().array().rsqrt();
  return es.eigenvectors() * inv.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// simultaneous spectral data of commuting unitaries: shared orthonormal basis
// plus per-tau principal args; taus assumed pairwise commuting
std::pair<Mat, std::vector<RVec>> joint_unitary_args(const std::vector<Mat>& taus,
                                                     double cluster_tol) {
  const int d = int(taus[0].rows());
  Mat basis = Mat::Identity(d, d);
  // diagonalize the first, then refine inside its (near-)degenerate blocks
  auto e0 = eig_unitary(taus[0]);
  basis = e0.vecs;
  if (taus.size() > 1) {
    auto args = principal_args(e0.vals);
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return args[a] < args[b]; });
    Mat sorted(d, d);
    for (int i = 0; i < d; ++i) sorted.col(i) = basis.col(order[i]);
    basis = sorted;
    int start = 0;
    while (start < d) {
      int stop = start + 1;
      while (stop < d &&
             std::abs(arc_diff(args[order[stop]], args[order[stop - 1]])) < cluster_tol)
        ++stop;
      if (stop - start > 1) {
        Mat blockbasis = basis.middleCols(start, stop - start);
        Mat compressed = blockbasis.adjoint() * taus[1] * blockbasis;
        auto eb = eig_unitary(compressed);
        basis.middleCols(start, stop - start) = blockbasis * eb.vecs;
      }
      start = stop;
    }
  }
  std::vector<RVec> args;
  for (const auto& tau : taus) {
    Vec diag = (basis.adjoint() * tau * basis).diagonal();
    RVec a(d);
    for (int i = 0; i < d; ++i) a(i) = principal_arg(diag(i));
    args.push_back(a);
  }
  return {basis, args};
}

}  // namespace

ProjectionSampler zak_to_periodic(const std::function<Mat(KVec)>& pi, int dim, int rank,
                                  const std::vector<Mat>& taus, const KGrid& grid,
                                  const Tolerances& tol) {
  if (int(taus.size()) != dim) throw Error("zak_to_periodic", "need one tau per direction");
  const int d = int(taus[0].rows());
  for (size_t i = 0; i < taus.size(); ++i)
    for (size_t j = i + 1; j < taus.size(); ++j)
      if ((taus[i] * taus[j] - taus[j] * taus[i]).norm() > tol.comm)
        throw Error("zak_to_periodic", "translation unitaries do not commute");
  auto [basis, args] = joint_unitary_args(taus, tol.degen);
  auto pieval = pi;
  Mat b = basis;
  std::vector<RVec> ar = args;
  ProjectionSampler p(dim, d, rank, grid, [pieval, b, ar, d, dim](KVec k) {
    Vec ph(d);
    for (int i = 0; i < d; ++i) {
      double a = k[0] * ar[0](i) + (dim == 2 ? k[1] * ar[1](i) : 0.0);
      ph(i) = std::exp(cxd(0, a));
    }
    Mat uk = b * ph.asDiagonal() * b.adjoint();
    return (uk.adjoint() * pieval(k) * uk).eval();
  });
  return p;
}

}  // namespace wannierlab
