#include "wannierlab/magnetic.hpp"

#include <cmath>
#include <atomic>
#include <cstdlib>
#include <random>
#include <thread>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

namespace {

// 32-point Gauss-Legendre nodes/weights on [0,1]
struct Gauss32 {
  std::array<double, 32> x{}, w{};
  Gauss32() {
    // nodes of P_32 on [-1,1] by Newton iteration, mapped to [0,1]
    const int n = 32;
    for (int i = 0; i < n; ++i) {
      double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = 0;
        for (int j = 0; j < n; ++j) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2 * j + 1) * t * p1 - j * p2) / (j + 1);
        }
        double dp = n * (t * p0 - p1) / (t * t - 1);
        double t1 = t - p0 / dp;
        if (std::abs(t1 - t) < 1e-15) {
          t = t1;
          break;
        }
        t = t1;
      }
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * t * p1 - j * p2) / (j + 1);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1);
      x[i] = 0.5 * (1 - t);  // descending -> ascending irrelevant
      w[i] = 1.0 / ((1 - t * t) * dp * dp);
    }
  }
};

const Gauss32& gauss32() {
  static Gauss32 g;
  return g;
}

// transverse gauge A(y) = [int_0^1 t B(t y) dt] * (-y2, y1), oriented so the
// constant-field case reduces to phi = (x1' x2 - x1 x2')/2
std::array<double, 2> vector_potential(std::array<double, 2> y,
                                       const std::function<double(std::array<double, 2>)>& B) {
  const auto& g = gauss32();
  double c = 0;
  for (int i = 0; i < 32; ++i) c += g.w[i] * g.x[i] * B({g.x[i] * y[0], g.x[i] * y[1]});
  return {-c * y[1], c * y[0]};
}

}  // namespace

double peierls_phase(std::array<double, 2> x, std::array<double, 2> xp,
                     const MagneticConfig& cfg) {
  if (cfg.constant()) return 0.5 * (xp[0] * x[1] - x[0] * xp[1]);
  const auto& g = gauss32();
  const std::array<double, 2> d{x[0] - xp[0], x[1] - xp[1]};
  double acc = 0;
  for (int i = 0; i < 32; ++i) {
    auto a = vector_potential({xp[0] + g.x[i] * d[0], xp[1] + g.x[i] * d[1]}, cfg.field);
    acc += g.w[i] * (a[0] * d[0] + a[1] * d[1]);
  }
  return acc;
}

LatticePatch build_patch(const TightBindingModel& model, int cells_per_side) {
  if (model.dim != 2) throw Error("magnetic", "patch requires a 2d model");
  if (cells_per_side < 4 || cells_per_side % 2 != 0)
    throw Error("magnetic", "cells per side must be even and >= 4");
  model.validate();
  return LatticePatch{model, cells_per_side, model.num_sites()};
}

SpMat peierls_hamiltonian(const LatticePatch& patch, const MagneticConfig& cfg, double b,
                          const Tolerances& tol) {
  // one entry per canonical matrix element; the closure contains both
  // orientations of every bond, and phi's exact antisymmetry keeps H Hermitian
  auto elements = hermitian_closure(patch.model, tol.herm);
  std::vector<Eigen::Triplet<cxd>> trip;
  trip.reserve(size_t(patch.cells()) * elements.size());
  for (int gy = patch.cell_low(); gy <= patch.cell_high(); ++gy)
    for (int gx = patch.cell_low(); gx <= patch.cell_high(); ++gx)
      for (const auto& h : elements) {
        const int tx = gx + h.cell[0], ty = gy + h.cell[1];
        if (!patch.in_patch(tx, ty)) continue;
        const int from = patch.site_index(gx, gy, h.from);
        const int to = patch.site_index(tx, ty, h.to);
        const auto pf = patch.position(from), pt = patch.position(to);
        trip.emplace_back(to, from, h.t * std::exp(cxd(0, b * peierls_phase(pt, pf, cfg))));
      }
  SpMat hmat(patch.sites(), patch.sites());
  hmat.setFromTriplets(trip.begin(), trip.end());
  return hmat;
}

// ---- Chebyshev spectral projector ----

namespace {

std::pair<double, double> gershgorin_bounds(const SpMat& h) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int col = 0; col < h.outerSize(); ++col) {
    double center = 0, radius = 0;
    for (SpMat::InnerIterator it(h, col); it; ++it) {
      if (it.row() == col)
        center = it.value().real();
      else
        radius += std::abs(it.value());
    }
    lo = std::min(lo, center - radius);
    hi = std::max(hi, center + radius);
  }
  return {lo, hi};
}

}  // namespace

ChebyshevProjector::ChebyshevProjector(const SpMat& h, double window_lo, double window_hi,
                                       double target_accuracy, double smoothing)
    : h_(h) {
  auto [lo, hi] = gershgorin_bounds(h);
  lo -= 0.01 * (hi - lo);
  hi += 0.01 * (hi - lo);
  center_ = 0.5 * (lo + hi);
  halfwidth_ = 0.5 * (hi - lo);
  // erf-smoothed indicator of [window_lo, window_hi]. The window edges must
  // be placed inside spectral gaps with clearance >= 6 sigma; the probe below
  // and the tests police this.
  const double sigma = smoothing > 0 ? smoothing : (window_hi - window_lo) / 25.0;
  auto f = [&](double e) {
    return 0.5 * (std::erf((e - window_lo) / sigma) - std::erf((e - window_hi) / sigma));
  };
  // Chebyshev coefficients by Gauss-Chebyshev quadrature
  const int quad = 4096;
  int maxdeg = 600;
  std::vector<double> fx(quad);
  for (int i = 0; i < quad; ++i) {
    const double theta = kPi * (i + 0.5) / quad;
    fx[i] = f(center_ + halfwidth_ * std::cos(theta));
  }
  coeffs_.clear();
  for (int k = 0; k <= maxdeg; ++k) {
    double c = 0;
    for (int i = 0; i < quad; ++i) c += fx[i] * std::cos(k * kPi * (i + 0.5) / quad);
    c *= (k == 0 ? 1.0 : 2.0) / quad;
    coeffs_.push_back(c);
    if (k > 8 && std::abs(coeffs_[k]) < target_accuracy &&
        std::abs(coeffs_[k - 1]) < target_accuracy)
      break;
  }
  double imag_norm = 0;
  for (int col = 0; col < h_.outerSize(); ++col)
    for (SpMat::InnerIterator it(h_, col); it; ++it)
      imag_norm = std::max(imag_norm, std::abs(it.value().imag()));
  if (imag_norm == 0.0) {
    real_ok_ = true;
    h_real_ = h_.real();
  }
}

Eigen::MatrixXd ChebyshevProjector::apply(const Eigen::MatrixXd& block) const {
  if (!real_ok_) throw Error("chebyshev", "real fast path on a complex Hamiltonian");
  Eigen::MatrixXd t0 = block;
  Eigen::MatrixXd t1 = (h_real_ * block - center_ * block) / halfwidth_;
  Eigen::MatrixXd acc = coeffs_[0] * t0;
  if (coeffs_.size() > 1) acc += coeffs_[1] * t1;
  for (size_t k = 2; k < coeffs_.size(); ++k) {
    Eigen::MatrixXd t2 = 2.0 / halfwidth_ * (h_real_ * t1 - center_ * t1) - t0;
    acc += coeffs_[k] * t2;
    t0.swap(t1);
    t1.swap(t2);
  }
  return acc;
}

Eigen::MatrixXcd ChebyshevProjector::apply(const Eigen::MatrixXcd& block) const {
  // y = sum_k c_k T_k(Htilde) block
  Eigen::MatrixXcd t0 = block;
  Eigen::MatrixXcd t1 = (h_ * block - center_ * block) / halfwidth_;
  Eigen::MatrixXcd acc = coeffs_[0] * t0;
  if (coeffs_.size() > 1) acc += coeffs_[1] * t1;
  for (size_t k = 2; k < coeffs_.size(); ++k) {
    Eigen::MatrixXcd t2 = 2.0 / halfwidth_ * (h_ * t1 - center_ * t1) - t0;
    acc += coeffs_[k] * t2;
    t0.swap(t1);
    t1.swap(t2);
  }
  return acc;
}

double ChebyshevProjector::idempotency_probe(int probes, unsigned seed) const {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  const int n = int(h_.rows());
  Eigen::MatrixXcd v(n, probes);
  for (int j = 0; j < probes; ++j)
    for (int i = 0; i < n; ++i) v(i, j) = cxd(gauss(rng), gauss(rng));
  v.colwise().normalize();
  Eigen::MatrixXcd pv = apply(v);
  Eigen::MatrixXcd ppv = apply(pv);
  double worst = 0;
  for (int j = 0; j < probes; ++j) worst = std::max(worst, (ppv.col(j) - pv.col(j)).norm());
  return worst;
}

// ---- localized bases ----

double LocalizedBasis::orthonormality_defect() const {
  SpMat gram = SpMat(cols.adjoint()) * cols;
  double worst = 0;
  for (int c = 0; c < gram.outerSize(); ++c)
    for (SpMat::InnerIterator it(gram, c); it; ++it) {
      const double want = it.row() == it.col() ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(it.value() - want));
    }
  return worst;
}

double LocalizedBasis::max_imag() const {
  double m = 0;
  for (int c = 0; c < cols.outerSize(); ++c)
    for (SpMat::InnerIterator it(cols, c); it; ++it)
      m = std::max(m, std::abs(it.value().imag()));
  return m;
}

namespace {

SpMat prune_copy(const SpMat& a, double eps) {
  SpMat b = a;
  b.prune(eps, 1.0);
  return b;
}

double one_norm(const SpMat& a) {
  double worst = 0;
  for (int c = 0; c < a.outerSize(); ++c) {
    double col = 0;
    for (SpMat::InnerIterator it(a, c); it; ++it) col += std::abs(it.value());
    worst = std::max(worst, col);
  }
  return worst;
}

// binomial series for (Id + D)^{-1/2}; returns terms used via *terms.
// The next term is skipped outright when |a_{k+1}| ||D^k||_1 ||D||_1 already
// sits below the accuracy target (Hermitian D: the 1-norm bounds the 2-norm).
SpMat inv_sqrt_series(const SpMat& d, int* terms, double prune = 1e-13,
                      double accuracy = 1e-13) {
  const int n = int(d.rows());
  SpMat id(n, n);
  id.setIdentity();
  SpMat acc = id;
  SpMat power = id;
  const double dnorm1 = one_norm(d);
  double pownorm1 = 1.0;
  double coeff = 1.0;
  int used = 0;
  for (int k = 1; k <= 40; ++k) {
    const double next_coeff = std::abs(coeff) * (2.0 * k - 1.0) / (2.0 * k);
    if (next_coeff * pownorm1 * dnorm1 < accuracy) break;
    power = prune_copy(SpMat(power * d), prune);
    pownorm1 = one_norm(power);
    coeff *= -(2.0 * k - 1.0) / (2.0 * k);
    acc = acc + coeff * power;
    used = k;
    if (pownorm1 * std::abs(coeff) < accuracy) break;
  }
  if (terms) *terms = used;
  acc.makeCompressed();
  return acc;
}

// power iteration estimate of the largest |eigenvalue| of a Hermitian
// operator given as a matvec
double hermitian_opnorm(const std::function<Vec(const Vec&)>& op, int n, int iters,
                        unsigned seed, int restarts = 2) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  double best = 0;
  for (int restart = 0; restart < restarts; ++restart) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = cxd(gauss(rng), gauss(rng));
    v.normalize();
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
      Vec w = op(v);
      double nw = w.norm();
      if (nw < 1e-300) break;
      lam = nw;  // |lambda| since op is Hermitian
      v = w / nw;
    }
    best = std::max(best, lam);
  }
  return best;
}

}  // namespace

LocalizedBasis zero_field_basis(const LatticePatch& patch, const WannierSet& bulk,
                                double window_lo, double window_hi, const Tolerances& tol,
                                double smoothing, double col_prune) {
  if (bulk.dim != 2) throw Error("magnetic", "bulk Wannier data must be 2d");
  if (bulk.max_imag() > tol.w)
    throw Error("magnetic", "bulk Wannier data must be real (conjugation-symmetric pipeline)");
  const int nb = bulk.nbands;
  const int ncols = patch.cells() * nb;

  // trial columns: real parts of bulk Wannier translates, clipped to patch
  std::vector<Eigen::Triplet<cxd>> trip;
  for (int gy = patch.cell_low(); gy <= patch.cell_high(); ++gy)
    for (int gx = patch.cell_low(); gx <= patch.cell_high(); ++gx)
      for (int dy = -bulk.radius; dy <= bulk.radius; ++dy)
        for (int dx = -bulk.radius; dx <= bulk.radius; ++dx) {
          if (!patch.in_patch(gx + dx, gy + dy)) continue;
          const Mat& amp = bulk.at(dx, dy);
          for (int s = 0; s < patch.sites_per_cell; ++s)
            for (int j = 0; j < nb; ++j) {
              const double v = amp(s, j).real();
              if (std::abs(v) < 1e-14) continue;
              trip.emplace_back(patch.site_index(gx + dx, gy + dy, s),
                                patch.cell_index(gx, gy) * nb + j, v);
            }
        }
  SpMat trials(patch.sites(), ncols);
  trials.setFromTriplets(trip.begin(), trip.end());

  // project onto Ran P0 of the patch Hamiltonian; chunks of columns run on
  // a small thread pool (WANNIERLAB_THREADS caps it)
  MagneticConfig cfg0;
  SpMat h0 = peierls_hamiltonian(patch, cfg0, 0.0, tol);
  ChebyshevProjector p0(h0, window_lo, window_hi, 1e-12, smoothing);
  const int chunk = 128;
  const int nchunks = (ncols + chunk - 1) / chunk;
  int nthreads = int(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WANNIERLAB_THREADS"))
    if (std::atoi(env) > 0) nthreads = std::atoi(env);
  nthreads = std::clamp(nthreads, 1, std::min(8, nchunks));
  SpMat projected(patch.sites(), ncols);
  {
    std::vector<std::vector<Eigen::Triplet<cxd>>> ptrip(nchunks);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int job = next++; job < nchunks; job = next++) {
        const int c0 = job * chunk;
        const int nc = std::min(chunk, ncols - c0);
        // the zero-field problem is real: use the real fast path
        Eigen::MatrixXd block = Eigen::MatrixXcd(trials.middleCols(c0, nc)).real();
        block = p0.apply(block);
        for (int c = 0; c < nc; ++c)
          for (int r = 0; r < patch.sites(); ++r) {
            const double v = block(r, c);
            if (std::abs(v) > 0.1 * col_prune) ptrip[job].emplace_back(r, c0 + c, v);
          }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::vector<Eigen::Triplet<cxd>> all;
    for (auto& part : ptrip) all.insert(all.end(), part.begin(), part.end());
    projected.setFromTriplets(all.begin(), all.end());
  }

  // symmetric (Loewdin) orthonormalization
  SpMat gram = SpMat(projected.adjoint()) * projected;
  SpMat id(ncols, ncols);
  id.setIdentity();
  SpMat dmat = prune_copy(SpMat(gram - id), 1e-15);
  const double dnorm = hermitian_opnorm(
      [&](const Vec& v) { return Vec(dmat * v); }, ncols, 50, 11);
  if (dnorm > 0.9)
    throw Error("magnetic", "trial Gram too far from identity (" + std::to_string(dnorm) +
                                "); projected trials nearly dependent");
  SpMat corr = inv_sqrt_series(dmat, nullptr, std::max(1e-13, 0.1 * col_prune),
                               std::max(1e-13, 10.0 * col_prune));
  LocalizedBasis basis;
  basis.patch = patch;
  basis.nbands = nb;
  basis.cols = prune_copy(SpMat(projected * corr), col_prune);
  basis.cell_of_col.resize(ncols);
  basis.band_of_col.resize(ncols);
  for (int gy = patch.cell_low(); gy <= patch.cell_high(); ++gy)
    for (int gx = patch.cell_low(); gx <= patch.cell_high(); ++gx)
      for (int j = 0; j < nb; ++j) {
        basis.cell_of_col[patch.cell_index(gx, gy) * nb + j] = {gx, gy};
        basis.band_of_col[patch.cell_index(gx, gy) * nb + j] = j;
      }
  return basis;
}

SpMat dressed_columns(const LocalizedBasis& w, const MagneticConfig& cfg, double b) {
  std::vector<Eigen::Triplet<cxd>> trip;
  for (int c = 0; c < w.cols.outerSize(); ++c) {
    const auto gamma = w.cell_of_col[c];
    const std::array<double, 2> gpos{double(gamma[0]), double(gamma[1])};
    for (SpMat::InnerIterator it(w.cols, c); it; ++it) {
      const double phi = peierls_phase(w.patch.position(int(it.row())), gpos, cfg);
      trip.emplace_back(int(it.row()), c, it.value() * std::exp(cxd(0, b * phi)));
    }
  }
  SpMat out(w.cols.rows(), w.cols.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat gram_matrix(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                  const Tolerances& tol) {
  (void)tol;
  SpMat d = dressed_columns(w, cfg, b);
  SpMat gram = prune_copy(SpMat(SpMat(d.adjoint()) * d), 1e-14);
  const int n = int(gram.rows());
  SpMat id(n, n);
  id.setIdentity();
  SpMat dev = prune_copy(SpMat(gram - id), 1e-16);
  const double dn = hermitian_opnorm([&](const Vec& v) { return Vec(dev * v); }, n, 50, 13);
  if (dn > 0.5)
    throw Error("gram_matrix",
                "b too large: Gram deviates from identity by " + std::to_string(dn) +
                    ", min eigenvalue below 1/2");
  return gram;
}

SpMat gram_inv_sqrt(const SpMat& gram, int* series_terms) {
  const int n = int(gram.rows());
  SpMat id(n, n);
  id.setIdentity();
  SpMat dev = prune_copy(SpMat(gram - id), 1e-16);
  // entries far below the deviation scale cannot reach the series accuracy;
  // dropping them keeps the powers sparse
  double scale = 0;
  for (int c = 0; c < dev.outerSize(); ++c)
    for (SpMat::InnerIterator it(dev, c); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  dev = prune_copy(dev, std::max(1e-14, 1e-7 * scale));
  return prune_copy(inv_sqrt_series(dev, series_terms, 1e-13, 1e-10), 1e-12);
}

LocalizedBasis ortho_magnetic_basis(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                    const Tolerances& tol) {
  SpMat d = dressed_columns(w, cfg, b);
  SpMat gram = gram_matrix(w, cfg, b, tol);
  SpMat corr = gram_inv_sqrt(gram, nullptr);
  LocalizedBasis psi = w;
  psi.cols = prune_copy(SpMat(d * corr), 1e-12);
  return psi;
}

TransferResult magnetic_transfer(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                 double window_lo, double window_hi,
                                 const std::vector<std::array<int, 2>>& eval_cells,
                                 const Tolerances& tol, double smoothing) {
  SpMat gram0 = gram_matrix(w, cfg, b, tol);
  double gram_dev;
  {
    SpMat id(gram0.rows(), gram0.cols());
    id.setIdentity();
    gram_dev = sparse_opnorm_hermitian(SpMat(gram0 - id), 30, 13);
  }
  LocalizedBasis psi = w;
  psi.cols = prune_copy(SpMat(dressed_columns(w, cfg, b) * gram_inv_sqrt(gram0, nullptr)), 1e-12);
  SpMat hb = peierls_hamiltonian(w.patch, cfg, b, tol);
  ChebyshevProjector pb(hb, window_lo, window_hi, 1e-12, smoothing);
  const double idem = pb.idempotency_probe();
  if (idem > 1e-6)
    throw Error("magnetic_transfer", "spectral island not isolated under b (projector "
                                     "idempotency probe " + std::to_string(idem) + ")");

  const int nsites = int(psi.cols.rows());
  const SpMat psi_adj = psi.cols.adjoint();
  auto pi_apply = [&](const Eigen::MatrixXcd& v) {
    return Eigen::MatrixXcd(psi.cols * (psi_adj * v));
  };
  auto p_apply = [&](const Eigen::MatrixXcd& v) { return pb.apply(v); };

  TransferResult out;
  out.gram_min_eig_bound = 1.0 - gram_dev;
  out.pi_p_distance = hermitian_opnorm(
      [&](const Vec& v) {
        Eigen::MatrixXcd m = v;
        return Vec(pi_apply(m) - p_apply(m));
      },
      nsites, 45, 7);
  if (out.pi_p_distance >= 1.0)
    throw Error("magnetic_transfer", "||Pi_b - P_b|| >= 1; Sz.-Nagy transfer undefined");

  SpMat dressed = dressed_columns(w, cfg, b);
  std::vector<int> colidx;
  for (const auto& c : eval_cells)
    for (int j = 0; j < w.nbands; ++j) {
      colidx.push_back(w.col_index(c[0], c[1], j));
      out.cells.push_back(c);
      out.bands.push_back(j);
    }
  const int ncols = int(colidx.size());
  Eigen::MatrixXcd psi_block(nsites, ncols), dressed_block(nsites, ncols);
  for (int c = 0; c < ncols; ++c) {
    psi_block.col(c) = psi.cols.col(colidx[c]);
    dressed_block.col(c) = dressed.col(colidx[c]);
  }

  // U_b block application: N = P Pi + (1-P)(1-Pi), S = (Id - (Pi-P)^2)^{-1/2}
  auto x_apply = [&](const Eigen::MatrixXcd& v) {
    Eigen::MatrixXcd d1 = pi_apply(v) - p_apply(v);
    return Eigen::MatrixXcd(pi_apply(d1) - p_apply(d1));
  };
  // binomial series (1 - x)^{-1/2} = sum c_n x^n, c_0 = 1, c_n = c_{n-1}(2n-1)/(2n)
  Eigen::MatrixXcd sterm = psi_block, sacc = psi_block;
  double cn = 1.0;
  for (int k = 1; k <= 8; ++k) {
    sterm = x_apply(sterm);
    cn *= (2.0 * k - 1.0) / (2.0 * k);
    sacc += cn * sterm;
    if (sterm.norm() * cn < 1e-13) break;
  }
  Eigen::MatrixXcd pis = pi_apply(sacc), ps = p_apply(sacc);
  Eigen::MatrixXcd xi = p_apply(pis) + (sacc - pis) - (ps - p_apply(pis));
  out.xi = xi;
  out.psi = psi_block;
  out.dressed = dressed_block;

  Eigen::MatrixXcd pxi = p_apply(xi);
  out.range_residual = 0;
  for (int c = 0; c < ncols; ++c)
    out.range_residual = std::max(out.range_residual, (pxi.col(c) - xi.col(c)).norm());
  Eigen::MatrixXcd gram = xi.adjoint() * xi;
  out.orthonormality_defect =
      (gram - Eigen::MatrixXcd::Identity(ncols, ncols)).cwiseAbs().maxCoeff();
  return out;
}

CovarianceReport covariance_checks(const LocalizedBasis& w, const MagneticConfig& cfg, double b,
                                   double window_lo, double window_hi, int margin_cells,
                                   const Tolerances& tol, double smoothing) {
  if (!cfg.constant())
    throw Error("covariance_checks", "identities are only claimed for constant fields");
  const LatticePatch& patch = w.patch;
  // interior ring plus the center cell
  std::vector<std::array<int, 2>> cells{{0, 0}};
  const int lo = patch.cell_low() + margin_cells, hi = patch.cell_high() - margin_cells;
  if (lo >= hi) throw Error("covariance_checks", "margin leaves no interior cells");
  for (int g : {lo, hi}) {
    for (int t = lo; t <= hi; t += std::max(1, (hi - lo) / 6)) {
      cells.push_back({g, t});
      cells.push_back({t, g});
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  TransferResult plus = magnetic_transfer(w, cfg, b, window_lo, window_hi, cells, tol, smoothing);
  TransferResult minus =
      magnetic_transfer(w, cfg, -b, window_lo, window_hi, {{0, 0}}, tol, smoothing);

  CovarianceReport rep;
  // locate the Xi_{j,0,b} columns
  const int nb = w.nbands;
  auto col_at = [&](const TransferResult& r, std::array<int, 2> cell, int j) {
    for (size_t c = 0; c < r.cells.size(); ++c)
      if (r.cells[c] == cell && r.bands[c] == j) return int(c);
    throw Error("covariance_checks", "internal: evaluated cell not found");
  };
  // (M-13): Xi_{j,gamma,b}(x) = e^{i b phi(x,gamma)} Xi_{j,0,b}(x - gamma)
  for (size_t c = 0; c < plus.cells.size(); ++c) {
    const auto gamma = plus.cells[c];
    if (gamma[0] == 0 && gamma[1] == 0) continue;
    const int j = plus.bands[c];
    const Vec& ref = plus.xi.col(col_at(plus, {0, 0}, j));
    Vec expected = Vec::Zero(patch.sites());
    const std::array<double, 2> gpos{double(gamma[0]), double(gamma[1])};
    for (int gy = patch.cell_low(); gy <= patch.cell_high(); ++gy)
      for (int gx = patch.cell_low(); gx <= patch.cell_high(); ++gx) {
        if (!patch.in_patch(gx - gamma[0], gy - gamma[1])) continue;
        for (int s = 0; s < patch.sites_per_cell; ++s) {
          const int dst = patch.site_index(gx, gy, s);
          const int src = patch.site_index(gx - gamma[0], gy - gamma[1], s);
          expected(dst) =
              std::exp(cxd(0, b * peierls_phase(patch.position(dst), gpos, cfg))) * ref(src);
        }
      }
    rep.covariance_residual =
        std::max(rep.covariance_residual, (Vec(plus.xi.col(c)) - expected).norm());
  }
  for (int j = 0; j < nb; ++j) {
    const Vec a = plus.xi.col(col_at(plus, {0, 0}, j));
    const Vec bb = minus.xi.col(col_at(minus, {0, 0}, j));
    rep.conjugation_residual = std::max(rep.conjugation_residual, (a.conjugate() - bb).norm());
  }
  rep.covariance_pass = rep.covariance_residual < tol.mag_trunc;
  rep.conjugation_pass = rep.conjugation_residual < tol.mag_trunc;
  return rep;
}

double projector_distance(const LocalizedBasis& psi, const ChebyshevProjector& pb, int iters,
                          unsigned seed) {
  const int n = int(psi.cols.rows());
  const SpMat psi_adj = psi.cols.adjoint();
  return hermitian_opnorm(
      [&](const Vec& v) {
        Eigen::MatrixXcd m = v;
        Eigen::MatrixXcd piv = psi.cols * (psi_adj * m);
        return Vec(piv - pb.apply(m));
      },
      n, iters, seed);
}

double sparse_opnorm_hermitian(const SpMat& a, int iters, unsigned seed) {
  return hermitian_opnorm([&](const Vec& v) { return Vec(a * v); }, int(a.rows()), iters, seed);
}

}  // namespace wannierlab
