#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wannierlab/common.hpp"

namespace wannierlab {

inline double opnorm(const Mat& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return a.jacobiSvd().singularValues()(0);
}

inline Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

/// exp(i*scale*h) for Hermitian h
inline Mat expi(const Mat& h, double scale = 1.0) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h));
  Vec ph = (cxd(0, scale) * es.eigenvalues().array().cast<cxd>()).exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// unitary polar factor of an (almost invertible) matrix
inline Mat polar_unitary(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// eigen-decomposition of a (normal) unitary matrix via complex Schur:
/// eigenvalues = vals[i], orthonormal eigenvectors = columns of vecs
struct UnitaryEig {
  Vec vals;
  Mat vecs;
};

inline UnitaryEig eig_unitary(const Mat& u) {
  Eigen::ComplexSchur<Mat> schur(u, /*computeU=*/true);
  return {schur.matrixT().diagonal(), schur.matrixU()};
}

inline std::vector<double> principal_args(const Vec& vals) {
  std::vector<double> a(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) a[i] = principal_arg(vals(i));
  return a;
}

/// smallest arc distance between distinct eigenvalue positions on the circle;
/// 2*pi for a single point
inline double min_circle_gap(const Vec& vals) {
  std::vector<double> a = principal_args(vals);
  std::sort(a.begin(), a.end());
  if (a.size() < 2) return 2 * kPi;
  double g = a.front() + 2 * kPi - a.back();
  for (size_t i = 1; i < a.size(); ++i) g = std::min(g, a[i] - a[i - 1]);
  return g;
}

}  // namespace wannierlab
