#pragma once

#include <functional>
#include <variant>

#include "wannierlab/grid.hpp"
#include "wannierlab/model.hpp"

namespace wannierlab {

/// Band selection: explicit 0-based index set, or a closed energy interval.
struct SpectralWindow {
  std::variant<std::vector<int>, std::pair<double, double>> sel;

  static SpectralWindow bands(std::vector<int> idx) { return {std::move(idx)}; }
  static SpectralWindow lower_half() { return {std::vector<int>{-1}}; }  // resolved per D
  static SpectralWindow interval(double lo, double hi) { return {std::make_pair(lo, hi)}; }

  std::vector<int> resolve(const RVec& evals) const;
};

/// Family of rank-N orthogonal projections over the grid, evaluator-backed.
class ProjectionSampler {
 public:
  ProjectionSampler() = default;
  ProjectionSampler(int dim, int d, int rank, KGrid grid, std::function<Mat(KVec)> eval)
      : dim_(dim), d_(d), rank_(rank), grid_(grid), eval_(std::move(eval)) {}

  Mat operator()(KVec k) const { return eval_(k); }
  Mat at1(double k) const { return eval_({k, 0.0}); }
  int dim() const { return dim_; }
  int size() const { return d_; }
  int rank() const { return rank_; }
  const KGrid& grid() const { return grid_; }
  CsState cs_flag() const { return cs_; }
  void set_cs(CsState s) { cs_ = s; }
  double min_gap() const { return min_gap_; }
  void set_min_gap(double g) { min_gap_ = g; }

  /// fix k2 (grid node value), view as a 1-parameter slice in k1
  std::function<Mat(double)> slice1(double k2 = 0.0) const {
    auto e = eval_;
    return [e, k2](double x) { return e({x, k2}); };
  }
  /// fix k1, slice in k2
  std::function<Mat(double)> slice2(double k1 = 0.0) const {
    auto e = eval_;
    return [e, k1](double x) { return e({k1, x}); };
  }

 private:
  int dim_ = 1;
  int d_ = 0;
  int rank_ = 0;
  KGrid grid_;
  std::function<Mat(KVec)> eval_;
  CsState cs_ = CsState::unknown;
  double min_gap_ = 0;
};

/// Riesz projection by full Hermitian eigendecomposition and outer products.
/// Errors on gap closure (< tol.gap) or a varying selection count.
ProjectionSampler spectral_projection(const BlochSampler& h, const SpectralWindow& window,
                                      const KGrid& grid, const Tolerances& tol = {});

/// Sz.-Nagy unitary: U = {PQ + (1-P)(1-Q)} {1 - (Q-P)^2}^{-1/2}, P U = U Q.
Mat sz_nagy(const Mat& p, const Mat& q, const Tolerances& tol = {});

/// B Hermitian positive with B A B = Id; errors when min eigenvalue <= tol.pd.
Mat inv_sqrt_psd(const Mat& a, const Tolerances& tol = {});

/// Zak-type covariant family -> periodic family: u_k = e^{i sum k_j M_j} with
/// M_j the principal logarithms of the commuting taus; P(k) = u_k^* Pi(k) u_k.
ProjectionSampler zak_to_periodic(const std::function<Mat(KVec)>& pi, int dim, int rank,
                                  const std::vector<Mat>& taus, const KGrid& grid,
                                  const Tolerances& tol = {});

}  // namespace wannierlab
