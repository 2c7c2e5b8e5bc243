#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"

namespace wannierlab {

namespace {

// A_{k2}(1,0) = A_{k2}(0,-1/2) A_{k2}(1/2,0) assembled from outward transports
Mat loop_propagator(const ProjectionSampler& p, double k2, TransportMode mode) {
  auto slice = p.slice1(k2);
  const int half = p.grid().n1 / 2;
  Propagator right = propagate(slice, 0.0, 0.5, half, mode);
  Propagator left = propagate(slice, 0.0, -0.5, half, mode);
  return left.u.adjoint() * right.u;
}

}  // namespace

UnitaryFamily matching_matrix(const ProjectionSampler& p, const BlochFrame& column,
                              TransportMode mode, const Tolerances& tol) {
  if (p.dim() != 2) throw Error("matching_matrix", "expected a 2d sampler");
  const KGrid& g = p.grid();
  if (column.grid.n1 != g.n2)
    throw Error("matching_matrix", "column frame grid does not match the k2 grid");
  UnitaryFamily beta;
  beta.n = g.n2;
  beta.cs_prime = p.cs_flag() == CsState::holds && column.cs == CsState::holds;
  beta.values.resize(g.n2 + 1);
  for (int j = 0; j <= g.n2; ++j) {
    Mat loop = loop_propagator(p, g.node2(j), mode);
    beta.values[j] = column.at(j).adjoint() * loop * column.at(j);
  }
  double unit = beta.unitarity_residual();
  if (unit > std::max(tol.frame, 1e-6) * 100)
    throw Error("matching_matrix",
                "matching matrix failed unitarity (residual " + std::to_string(unit) + ")");
  return beta;
}

BlochFrame frame_2d(const ProjectionSampler& p, TransportMode mode, const Tolerances& tol) {
  if (p.dim() != 2) throw Error("frame_2d", "expected a 2d sampler");
  if (p.cs_flag() != CsState::holds) {
    Error err("frame_2d", "sampler lacks conjugation symmetry; no periodic CS frame exists "
                          "in general (see attached Chern number)");
    try {
      auto c = chern_number(p, tol);
      err.chern = c.chern;
      err.chern_residual = c.residual;
    } catch (const Error&) {
      // leave the report empty when the oracle itself fails
    }
    throw err;
  }
  const KGrid& g = p.grid();
  const int n1 = g.n1, n2 = g.n2, d = p.size(), nb = p.rank();

  // (1) column frame along k2 at k1 = 0
  ProjectionSampler col(1, d, nb, KGrid::line(n2), [p](KVec k) {
    return p({0.0, k[0]});
  });
  col.set_cs(CsState::holds);
  BlochFrame column = frame_1d(col, std::nullopt, mode, tol);

  // (2) transported frame Psi(k1,k2) for k1 in [-1/2,1/2], outward from 0
  std::vector<std::vector<Mat>> right(n2 + 1), left(n2 + 1);
  for (int j = 0; j <= n2; ++j) {
    auto slice = p.slice1(g.node2(j));
    const double dk = g.dk1();
    right[j].reserve(n1 / 2 + 1);
    left[j].reserve(n1 / 2 + 1);
    right[j].push_back(Mat::Identity(d, d));
    left[j].push_back(Mat::Identity(d, d));
    for (int i = 0; i < n1 / 2; ++i) {
      right[j].push_back(
          polar_unitary(propagate(slice, i * dk, (i + 1) * dk, 1, mode).u * right[j].back()));
      left[j].push_back(
          polar_unitary(propagate(slice, -i * dk, -(i + 1) * dk, 1, mode).u * left[j].back()));
    }
  }

  // (3) matching matrix from the same loop propagators
  UnitaryFamily beta;
  beta.n = n2;
  beta.cs_prime = true;
  beta.values.resize(n2 + 1);
  for (int j = 0; j <= n2; ++j) {
    Mat loop = left[j].back().adjoint() * right[j].back();
    beta.values[j] = column.at(j).adjoint() * loop * column.at(j);
  }

  // (4) straightening field
  StraighteningField u = straighten(beta, tol);

  // (5) rotate: Xi(x,k2) = Psi(x,k2) u(x,k2)
  BlochFrame f;
  f.grid = g;
  f.d = d;
  f.nbands = nb;
  f.cs = CsState::holds;
  f.provenance = "frame_2d";
  f.values.resize(size_t(n1 + 1) * (n2 + 1));
  for (int j = 0; j <= n2; ++j) {
    for (int i = 0; i <= n1; ++i) {
      const double x = g.node1(i);
      const int a = std::abs(i - n1 / 2);
      const Mat& trans = (i >= n1 / 2) ? right[j][a] : left[j][a];
      f.at(i, j) = trans * column.at(j) * u.u(x, j);
    }
  }
  return f;
}

}  // namespace wannierlab
