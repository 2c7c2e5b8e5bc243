#include "wannierlab/diagnostics.hpp"

#include <cmath>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

namespace {

Mat local_frame(const Mat& p, int rank) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(p));
  return es.eigenvectors().rightCols(rank);
}

}  // namespace

ChernResult chern_number(const ProjectionSampler& p, const Tolerances& tol) {
  (void)tol;
  const KGrid& g = p.grid();
  if (p.dim() != 2) throw Error("chern_number", "expected a 2d sampler");
  if (g.n1 < 16 || g.n2 < 16) throw Error("chern_number", "grid must be at least 16x16");
  const int rank = p.rank();
  // local eigenframes on the open grid (periodic wrap)
  std::vector<Mat> frames(size_t(g.n1) * g.n2);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      frames[size_t(i) * g.n2 + j] = local_frame(p(g.node(i, j)), rank);
  auto fr = [&](int i, int j) -> const Mat& {
    return frames[size_t((i + g.n1) % g.n1) * g.n2 + (j + g.n2) % g.n2];
  };
  auto link = [&](int i0, int j0, int i1, int j1) {
    return (fr(i0, j0).adjoint() * fr(i1, j1)).determinant();
  };
  double total = 0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      cxd u1 = link(i, j, i + 1, j);
      cxd u2 = link(i + 1, j, i + 1, j + 1);
      cxd u3 = link(i + 1, j + 1, i, j + 1);
      cxd u4 = link(i, j + 1, i, j);
      total += std::arg(u1 * u2 * u3 * u4);
    }
  const double c = total / (2 * kPi);
  ChernResult res{int(std::lround(c)), std::abs(c - std::lround(c))};
  if (res.residual > 0.1)
    throw Error("chern_number",
                "plaquette sum residual " + std::to_string(res.residual) + "; refine the grid");
  return res;
}

double berry_phase(const std::function<Mat(double)>& slice, int rank, int nodes) {
  std::vector<Mat> frames(nodes);
  for (int i = 0; i < nodes; ++i) frames[i] = local_frame(slice(-0.5 + double(i) / nodes), rank);
  cxd w = 1.0;
  for (int i = 0; i < nodes; ++i) {
    cxd d = (frames[i].adjoint() * frames[(i + 1) % nodes]).determinant();
    if (std::abs(d) < 1e-8)
      throw Error("berry_phase", "singular overlap matrix; grid too coarse");
    w *= d / std::abs(d);
  }
  return principal_arg(w);
}

}  // namespace wannierlab
