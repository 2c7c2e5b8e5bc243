#include "wannierlab/wannier.hpp"

#include <cmath>
#include <map>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

double WannierSet::parseval_defect() const {
  double worst = 0;
  for (int j = 0; j < nbands; ++j) {
    double s = 0;
    for (const auto& a : amps) s += a.col(j).squaredNorm();
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double WannierSet::orthonormality_defect() const {
  Mat gram = Mat::Zero(nbands, nbands);
  for (const auto& a : amps) gram += a.adjoint() * a;
  return (gram - Mat::Identity(nbands, nbands)).norm();
}

double WannierSet::max_imag() const {
  double m = 0;
  for (const auto& a : amps) m = std::max(m, a.imag().cwiseAbs().maxCoeff());
  return m;
}

double WannierSet::center_of_mass(int axis) const {
  double c = 0;
  for (int g1 = -radius; g1 <= radius; ++g1) {
    if (dim == 1) {
      c += g1 * at(g1).squaredNorm();
    } else {
      for (int g2 = -radius; g2 <= radius; ++g2)
        c += (axis == 0 ? g1 : g2) * at(g1, g2).squaredNorm();
    }
  }
  return c;
}

std::vector<std::pair<double, double>> WannierSet::shell_norms() const {
  // shells of the lattice (l1) cell distance; in 1d this is |gamma|
  std::map<int, double> acc;
  for (int g1 = -radius; g1 <= radius; ++g1) {
    if (dim == 1) {
      acc[std::abs(g1)] += at(g1).squaredNorm();
    } else {
      for (int g2 = -radius; g2 <= radius; ++g2)
        acc[std::abs(g1) + std::abs(g2)] += at(g1, g2).squaredNorm();
    }
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [r, s] : acc) out.emplace_back(double(r), std::sqrt(s));
  return out;
}

WannierSet wannier_transform(const BlochFrame& frame, int radius) {
  const KGrid& g = frame.grid;
  if (radius > g.n1 / 2 || (g.dim == 2 && radius > g.n2 / 2))
    throw Error("wannier_transform", "box radius " + std::to_string(radius) +
                                         " exceeds the grid's dual range (aliasing)");
  WannierSet w;
  w.dim = g.dim;
  w.d = frame.d;
  w.nbands = frame.nbands;
  w.radius = radius;
  w.provenance = frame.provenance;
  w.amps.assign(size_t(w.cells()), Mat::Zero(frame.d, frame.nbands));
  if (g.dim == 1) {
    for (int g1 = -radius; g1 <= radius; ++g1) {
      Mat acc = Mat::Zero(frame.d, frame.nbands);
      for (int i = 0; i < g.n1; ++i)  // open grid: node n duplicates node 0
        acc += std::exp(cxd(0, -2 * kPi * g.node1(i) * g1)) * frame.at(i);
      w.at(g1) = acc / double(g.n1);
    }
  } else {
    for (int g1 = -radius; g1 <= radius; ++g1)
      for (int g2 = -radius; g2 <= radius; ++g2) {
        Mat acc = Mat::Zero(frame.d, frame.nbands);
        for (int i = 0; i < g.n1; ++i) {
          cxd ph1 = std::exp(cxd(0, -2 * kPi * g.node1(i) * g1));
          for (int j = 0; j < g.n2; ++j)
            acc += ph1 * std::exp(cxd(0, -2 * kPi * g.node2(j) * g2)) * frame.at(i, j);
        }
        w.at(g1, g2) = acc / double(g.n1 * g.n2);
      }
  }
  return w;
}

namespace {

DecayFit fit_line(const std::vector<std::pair<double, double>>& shells) {
  // simple least squares of log(norm) against radius
  const int m = int(shells.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [r, v] : shells) {
    const double y = std::log(v);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
  }
  const double det = m * sxx - sx * sx;
  DecayFit fit;
  const double slope = (m * sxy - sx * sy) / det;
  fit.alpha = -slope;
  fit.log_c = (sy * sxx - sx * sxy) / det;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / m;
  for (const auto& [r, v] : shells) {
    const double y = std::log(v);
    ss_res += (y - (fit.log_c + slope * r)) * (y - (fit.log_c + slope * r));
    ss_tot += (y - mean) * (y - mean);
  }
  fit.residual = ss_tot > 0 ? ss_res / ss_tot : 0.0;
  fit.exponential = fit.alpha > 0 && fit.residual < 0.1;
  return fit;
}

std::vector<std::pair<double, double>> usable(const std::vector<std::pair<double, double>>& s) {
  std::vector<std::pair<double, double>> out;
  const double floor = 10 * std::numeric_limits<double>::epsilon();
  for (const auto& e : s)
    if (e.second > floor) out.push_back(e);
  return out;
}

}  // namespace

DecayReport decay_fit(const WannierSet& w) {
  DecayReport rep;
  auto shells = usable(w.shell_norms());
  if (shells.size() < 4)
    throw Error("decay_fit", "need at least 4 usable shells, have " +
                                 std::to_string(shells.size()));
  rep.per_band.push_back(fit_line(shells));
  for (int j = 0; j < w.nbands; ++j) {
    std::map<int, double> acc;
    for (int g1 = -w.radius; g1 <= w.radius; ++g1) {
      if (w.dim == 1) {
        acc[std::abs(g1)] += w.at(g1).col(j).squaredNorm();
      } else {
        for (int g2 = -w.radius; g2 <= w.radius; ++g2)
          acc[std::abs(g1) + std::abs(g2)] += w.at(g1, g2).col(j).squaredNorm();
      }
    }
    std::vector<std::pair<double, double>> sj;
    for (const auto& [r, s] : acc) sj.emplace_back(double(r), std::sqrt(s));
    sj = usable(sj);
    if (sj.size() < 4) throw Error("decay_fit", "band " + std::to_string(j) + ": too few shells");
    rep.per_band.push_back(fit_line(sj));
  }
  return rep;
}

namespace {

double poisson_1d(double x, double delta) {
  return std::sinh(2 * kPi * delta) / (std::cosh(2 * kPi * delta) - std::cos(2 * kPi * x));
}

}  // namespace

BlochFrame smooth_lift(const BlochFrame& frame, const ProjectionSampler& p, double delta,
                       const Tolerances& tol) {
  const KGrid& g = frame.grid;
  BlochFrame out = frame;
  out.provenance = frame.provenance + "+smooth_lift";
  const Mat id = Mat::Identity(frame.nbands, frame.nbands);
  double worst_gram = 0;
  if (g.dim == 1) {
    std::vector<Mat> phi(g.n1 + 1);
    for (int i = 0; i <= g.n1; ++i) {
      Mat acc = Mat::Zero(frame.d, frame.nbands);
      for (int j = 0; j < g.n1; ++j)
        acc += poisson_1d(g.node1(i) - g.node1(j), delta) * frame.at(j);
      phi[i] = p(g.node(i)) * (acc / double(g.n1));
      worst_gram = std::max(worst_gram, opnorm(phi[i].adjoint() * phi[i] - id));
    }
    if (worst_gram > 0.5)
      throw Error("smooth_lift", "delta too large: ||gram - Id|| = " + std::to_string(worst_gram));
    for (int i = 0; i <= g.n1; ++i)
      out.at(i) = phi[i] * inv_sqrt_psd(phi[i].adjoint() * phi[i], tol);
  } else {
    std::vector<Mat> phi(size_t(g.n1 + 1) * (g.n2 + 1));
    for (int i = 0; i <= g.n1; ++i)
      for (int j = 0; j <= g.n2; ++j) {
        Mat acc = Mat::Zero(frame.d, frame.nbands);
        for (int a = 0; a < g.n1; ++a) {
          const double k1 = poisson_1d(g.node1(i) - g.node1(a), delta);
          for (int b = 0; b < g.n2; ++b)
            acc += k1 * poisson_1d(g.node2(j) - g.node2(b), delta) * frame.at(a, b);
        }
        Mat f = p(g.node(i, j)) * (acc / double(g.n1 * g.n2));
        phi[size_t(i) * (g.n2 + 1) + j] = f;
        worst_gram = std::max(worst_gram, opnorm(f.adjoint() * f - id));
      }
    if (worst_gram > 0.5)
      throw Error("smooth_lift", "delta too large: ||gram - Id|| = " + std::to_string(worst_gram));
    for (int i = 0; i <= g.n1; ++i)
      for (int j = 0; j <= g.n2; ++j) {
        Mat& f = phi[size_t(i) * (g.n2 + 1) + j];
        out.at(i, j) = f * inv_sqrt_psd(f.adjoint() * f, tol);
      }
  }
  return out;
}

std::pair<BlochFrame, double> smooth_lift_auto(const BlochFrame& frame,
                                               const ProjectionSampler& p,
                                               const Tolerances& tol) {
  double delta = 0.1;
  for (int i = 0; i < 12; ++i) {
    try {
      return {smooth_lift(frame, p, delta, tol), delta};
    } catch (const Error&) {
      delta /= 2;
    }
  }
  throw Error("smooth_lift", "no acceptable delta found");
}

double fourier_decay_ratio(const BlochFrame& frame) {
  const int radius = frame.grid.n1 / 2 - 1;
  WannierSet w = wannier_transform(frame, std::min(radius, 24));
  auto shells = w.shell_norms();
  std::vector<std::pair<double, double>> use;
  for (const auto& e : shells)
    if (e.second > 1e-13) use.push_back(e);
  if (use.size() < 4) return 0.0;  // decays faster than measurable
  DecayFit fit = fit_line(use);
  return std::exp(-fit.alpha);
}

}  // namespace wannierlab
