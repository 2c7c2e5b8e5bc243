// Acceptance suite: one criterion per section, each printing PASS/FAIL with
// the measured numbers. Run everything (default) or --criterion N.

#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"
#include "wannierlab/magnetic.hpp"
#include "wannierlab/wannier.hpp"

using namespace wannierlab;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    detail += (detail.empty() ? "" : "; ") + what + (cond ? "" : " [FAILED]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

ProjectionSampler ssh_sampler(int n) {
  auto h = build_bloch(preset_ssh(1.0, 2.0));
  auto grid = KGrid::line(n);
  check_cs(h, grid);
  return spectral_projection(h, SpectralWindow::bands({0}), grid);
}

ProjectionSampler trs2d_sampler(int n) {
  auto h = build_bloch(preset_trs2d(1.0, 2.0, 0.4));
  auto grid = KGrid::square(n, n);
  check_cs(h, grid);
  return spectral_projection(h, SpectralWindow::bands({0, 1}), grid);
}

UnitaryFamily rotation_family(int n) {
  return UnitaryFamily::sample(
      n,
      [](double k) {
        Mat b(2, 2);
        b << std::cos(2 * kPi * k), std::sin(2 * kPi * k), -std::sin(2 * kPi * k),
            std::cos(2 * kPi * k);
        return b;
      },
      true);
}

// shared fixture for criteria 9 and 10: strongly localized coupled stack
struct MagneticFixture {
  LocalizedBasis basis;
  double win_lo, win_hi;
};

const MagneticFixture& magnetic_fixture() {
  static MagneticFixture fx = [] {
    auto h = build_bloch(preset_trs2d(8.0, 1.0, 1.0));
    auto grid = KGrid::square(64, 64);
    check_cs(h, grid);
    auto p = spectral_projection(h, SpectralWindow::bands({0, 1}), grid);
    auto frame = frame_2d(p);
    auto bulk = wannier_transform(frame, 6);
    auto patch = build_patch(preset_trs2d(8.0, 1.0, 1.0), 40);
    MagneticFixture fx2;
    fx2.win_lo = -20.0;
    fx2.win_hi = 0.0;
    // window edges clear the spectrum by ~7 units: smoothing 1.2 keeps the
    // projector accurate to ~1e-12 at a manageable polynomial degree
    fx2.basis = zero_field_basis(patch, bulk, fx2.win_lo, fx2.win_hi, {}, 1.2, 1e-10);
    return fx2;
  }();
  return fx;
}

// ---- criteria ----

Check criterion1() {
  Check c;
  auto p = ssh_sampler(256);
  auto f = frame_1d(p);
  auto r = f.residuals(p);
  c.require(r.orthonormality < 1e-6, "orth " + num(r.orthonormality) + " < 1e-6");
  c.require(r.periodicity < 1e-6, "per " + num(r.periodicity) + " < 1e-6");
  c.require(r.range < 1e-6, "range " + num(r.range) + " < 1e-6");
  c.require(r.cs < 1e-6, "cs " + num(r.cs) + " < 1e-6");
  auto p2 = ssh_sampler(512);
  auto r2 = frame_1d(p2).residuals(p2);
  const double floor_tol = 1e-12;
  auto shrinks = [&](double a, double b) { return b <= a / 3 || b < floor_tol; };
  c.require(shrinks(r.orthonormality, r2.orthonormality),
            "orth shrink " + num(r.orthonormality) + "->" + num(r2.orthonormality));
  c.require(shrinks(r.periodicity, r2.periodicity),
            "per shrink " + num(r.periodicity) + "->" + num(r2.periodicity));
  c.require(shrinks(r.range, r2.range), "range shrink " + num(r.range) + "->" + num(r2.range));
  c.require(shrinks(r.cs, r2.cs), "cs shrink " + num(r.cs) + "->" + num(r2.cs));
  return c;
}

Check criterion2() {
  Check c;
  auto p = ssh_sampler(256);
  auto f = frame_1d(p);
  auto w = wannier_transform(f, 20);
  const double center = w.center_of_mass();
  const double oracle = -berry_phase(p.slice1(), 1, 4096) / (2 * kPi);
  double d = std::fmod(std::abs(center - oracle), 1.0);
  d = std::min(d, 1.0 - d);
  c.require(d < 1e-5, "center " + num(center) + " vs -berry/2pi " + num(oracle) +
                          " (mod-1 distance " + num(d) + " < 1e-5)");
  return c;
}

Check criterion3() {
  Check c;
  auto p = ssh_sampler(256);
  auto w = wannier_transform(frame_1d(p), 20);
  auto rep = decay_fit(w);
  c.require(rep.per_band[0].alpha > 0, "alpha " + num(rep.per_band[0].alpha) + " > 0");
  c.require(rep.per_band[0].residual < 0.05,
            "fit residual " + num(rep.per_band[0].residual) + " < 0.05");
  auto shells = w.shell_norms();
  double peak = 0, at20 = 0;
  for (auto& [r, v] : shells) {
    peak = std::max(peak, v);
    if (std::abs(r - 20.0) < 1e-9) at20 = v;
  }
  c.require(at20 / peak < 1e-6, "amplitude ratio at 20: " + num(at20 / peak) + " < 1e-6");
  return c;
}

Check criterion4() {
  Check c;
  auto beta = rotation_family(256);
  bool threw = false;
  std::string where;
  try {
    log_noncrossing(beta);
  } catch (const Error& e) {
    threw = true;
    if (e.knode()) {
      const double k = (*e.knode())[0];
      where = num(k);
      c.require(std::abs(k) < 1e-12 || std::abs(std::abs(k) - 0.5) < 1e-12,
                "degeneracy flagged at k = " + where);
    } else {
      c.require(false, "error carried no k-node");
    }
  }
  c.require(threw, "log_noncrossing rejects the rotation family");
  auto u = straighten(beta);
  c.require(u.boundary_residual < 1e-8,
            "straighten boundary residual " + num(u.boundary_residual) + " < 1e-8");
  c.require(u.symmetry_residual < 1e-8,
            "straighten symmetry residual " + num(u.symmetry_residual) + " < 1e-8");
  return c;
}

Check criterion5() {
  Check c;
  auto p = trs2d_sampler(128);
  auto f = frame_2d(p);
  auto r = f.residuals(p);
  c.require(r.orthonormality < 1e-5, "orth " + num(r.orthonormality) + " < 1e-5");
  c.require(r.periodicity < 1e-5, "per " + num(r.periodicity) + " < 1e-5");
  c.require(r.range < 1e-5, "range " + num(r.range) + " < 1e-5");
  c.require(r.cs < 1e-5, "cs " + num(r.cs) + " < 1e-5");
  auto w = wannier_transform(f, 10);
  c.require(w.max_imag() < 1e-5, "wannier imag " + num(w.max_imag()) + " < 1e-5");
  auto rep = decay_fit(w);
  c.require(rep.per_band[0].alpha > 0, "alpha " + num(rep.per_band[0].alpha) + " > 0");
  c.require(rep.per_band[0].residual < 0.1,
            "fit residual " + num(rep.per_band[0].residual) + " < 0.1");
  return c;
}

Check criterion6() {
  Check c;
  auto h = build_bloch(preset_haldane(1.0, 0.15, kPi / 2, 0.0));
  auto grid = KGrid::square(32, 32);
  check_cs(h, grid);
  auto p = spectral_projection(h, SpectralWindow::bands({0}), grid);
  bool gated = false;
  try {
    frame_2d(p);
  } catch (const Error& e) {
    gated = true;
    c.require(e.chern.has_value(), "cs gate attaches a chern report");
    if (e.chern) {
      c.require(std::abs(*e.chern) == 1, "chern " + std::to_string(*e.chern) + " = +-1");
      c.require(*e.chern_residual < 0.1, "chern residual " + num(*e.chern_residual) + " < 0.1");
    }
  }
  c.require(gated, "frame_2d fails at the cs gate");
  // every successful frame_2d run has chern 0
  auto ptrs = trs2d_sampler(64);
  (void)frame_2d(ptrs);
  auto ch = chern_number(ptrs);
  c.require(ch.chern == 0, "successful run: chern 0");
  return c;
}

Check criterion7() {
  Check c;
  const int n = 256;
  // lift_phase fixture as a 1x1 family
  {
    auto fam = UnitaryFamily::sample(
        n,
        [](double k) {
          Mat b(1, 1);
          b(0, 0) = std::exp(cxd(0, std::pow(std::sin(2 * kPi * k), 2)));
          return b;
        },
        true);
    std::vector<cxd> scal(n + 1);
    for (int i = 0; i <= n; ++i) scal[i] = fam.values[i](0, 0);
    auto phi = lift_phase(scal);
    HermitianFamily h;
    h.n = n;
    h.values.resize(n + 1);
    const double base = principal_arg(scal[n / 2]);
    for (int i = 0; i <= n; ++i) {
      Mat m(1, 1);
      m(0, 0) = base + phi[i];
      h.values[i] = m;
    }
    c.require(h.exp_residual(fam) < 1e-8, "lift_phase exp " + num(h.exp_residual(fam)));
    c.require(h.periodicity_residual() < 1e-8, "lift_phase periodic");
    c.require(h.cs_residual() < 1e-8, "lift_phase even");
  }
  auto run = [&](const char* name, const UnitaryFamily& fam, const HermitianFamily& h) {
    c.require(h.exp_residual(fam) < 1e-8, std::string(name) + " exp " + num(h.exp_residual(fam)));
    c.require(h.periodicity_residual() < 1e-8, std::string(name) + " periodic");
    c.require(h.cs_residual() < 1e-8, std::string(name) + " cs");
  };
  {
    auto fam = UnitaryFamily::sample(
        n,
        [](double k) {
          Mat hh(2, 2);
          const double a = 0.4 + 0.1 * std::cos(2 * kPi * k);
          const double d = 0.2 * std::cos(2 * kPi * k);
          hh << d, a, a, d;
          return expi(hh);
        },
        true);
    run("log_noncrossing", fam, log_noncrossing(fam));
    run("log_cayley", fam, log_cayley(fam, kPi));
    run("log_analytic_endpoints", fam, log_analytic_endpoints(fam));
  }
  {
    auto reg = regularize(rotation_family(n), 0.1, 0.01);
    run("log_analytic_endpoints(reg)", reg.family, log_analytic_endpoints(reg.family));
  }
  return c;
}

Check criterion8() {
  Check c;
  auto beta = rotation_family(256);
  auto r1 = regularize(beta, 0.1, 0.01);
  c.require(r1.endpoint_gap >= 0.05, "gap " + num(r1.endpoint_gap) + " >= s/2 = 0.05");
  c.require(r1.sup_distance <= 0.2, "sup " + num(r1.sup_distance) + " <= 0.2");
  auto r2 = regularize(beta, 0.05, 0.005);
  c.require(r2.endpoint_gap >= 0.025, "gap(half) " + num(r2.endpoint_gap) + " >= 0.025");
  c.require(r1.sup_distance / r2.sup_distance >= 1.8,
            "sup shrink factor " + num(r1.sup_distance / r2.sup_distance) + " >= 1.8");
  return c;
}

Check criterion9() {
  Check c;
  const auto& fx = magnetic_fixture();
  MagneticConfig cfg;
  std::vector<double> bs{1e-3, 2e-3, 4e-3, 8e-3};
  std::vector<double> pip, xid;
  // deep-interior evaluation cells; magnetic translation covariance
  // (criterion 10) makes the interior sup equal to these within its residual
  std::vector<std::array<int, 2>> cells{{0, 0}, {1, 0}, {0, 1}, {-1, -1}};
  for (double b : bs) {
    auto res = magnetic_transfer(fx.basis, cfg, b, fx.win_lo, fx.win_hi, cells, {}, 1.2);
    pip.push_back(res.pi_p_distance);
    double worst = 0;
    for (int k = 0; k < res.xi.cols(); ++k)
      worst = std::max(worst, (res.xi.col(k) - res.dressed.col(k)).norm());
    xid.push_back(worst);
    c.require(res.gram_min_eig_bound >= 0.5,
              "b=" + num(b) + ": gram min eig bound " + num(res.gram_min_eig_bound));
  }
  auto slope = [&](const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < bs.size(); ++i) {
      const double X = std::log(bs[i]), Y = std::log(y[i]);
      sx += X;
      sy += Y;
      sxx += X * X;
      sxy += X * Y;
    }
    const double m = double(bs.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  const double s1 = slope(pip), s2 = slope(xid);
  c.require(std::abs(s1 - 1.0) <= 0.15, "||Pi_b - P_b|| slope " + num(s1) + " = 1 +- 0.15");
  c.require(std::abs(s2 - 1.0) <= 0.15, "xi-defect slope " + num(s2) + " = 1 +- 0.15");
  return c;
}

Check criterion10() {
  Check c;
  const auto& fx = magnetic_fixture();
  MagneticConfig cfg;
  auto rep = covariance_checks(fx.basis, cfg, 5e-3, fx.win_lo, fx.win_hi, 10, {}, 1.2);
  c.require(rep.covariance_residual < 1e-6,
            "covariance residual " + num(rep.covariance_residual) + " < 1e-6");
  c.require(rep.conjugation_residual < 1e-6,
            "conjugation residual " + num(rep.conjugation_residual) + " < 1e-6");
  return c;
}

Check criterion11() {
  Check c;
  // (a) transport cross-validation: the projector-composition chain
  // intertwines exactly by construction, so it serves as the oracle; the
  // magnus-mode intertwining residual must agree with the cross-method
  // propagator distance within a factor of 10.
  auto p = ssh_sampler(256);
  auto slice = p.slice1();
  auto me = propagate(slice, 0.0, 1.0, 256, TransportMode::magnus);
  auto pc = propagate(slice, 0.0, 1.0, 256, TransportMode::projector_composition);
  const double r_me = opnorm(slice(1.0) * me.u - me.u * slice(0.0));
  const double r_pc = opnorm(slice(1.0) * pc.u - pc.u * slice(0.0));
  const double cross = opnorm(me.u - pc.u);
  c.require(r_pc < 1e-10, "oracle-mode intertwining " + num(r_pc) + " at machine floor");
  c.require(r_me <= 10 * cross && cross <= 10 * std::max(r_me, 1e-12),
            "magnus intertwining " + num(r_me) + " vs cross-method distance " + num(cross) +
                " within 10x");
  // (b) M_b^{-1/2}: power series vs dense eigendecomposition
  auto htb = build_bloch(preset_trs2d(8.0, 1.0, 1.0));
  auto grid = KGrid::square(64, 64);
  check_cs(htb, grid);
  auto psamp = spectral_projection(htb, SpectralWindow::bands({0, 1}), grid);
  auto bulk = wannier_transform(frame_2d(psamp), 6);
  auto patch = build_patch(preset_trs2d(8.0, 1.0, 1.0), 12);
  auto basis = zero_field_basis(patch, bulk, -20.0, 0.0);
  MagneticConfig cfg;
  auto gram = gram_matrix(basis, cfg, 0.01);
  Mat series = Mat(gram_inv_sqrt(gram));
  Mat eig = inv_sqrt_psd(Mat(gram));
  const double d = opnorm(series - eig);
  c.require(d < 1e-10, "inv-sqrt series vs eig " + num(d) + " < 1e-10");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[i + 1]);

  std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"d=1 frame suite (ssh, grid 256)", criterion1},
      {"wannier center vs berry-phase oracle", criterion2},
      {"exponential localization of the d=1 wannier set", criterion3},
      {"rotation-family counterexample: log rejected, straighten succeeds", criterion4},
      {"d=2 frame suite (coupled stack, D=4, N=2)", criterion5},
      {"obstruction negative test (haldane)", criterion6},
      {"logarithm contracts", criterion7},
      {"regularization gaps and approximation", criterion8},
      {"magnetic scalings (40x40 patch)", criterion9},
      {"magnetic symmetries (constant B, interior)", criterion10},
      {"cross-method oracles", criterion11},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    if (only && int(i + 1) != only) continue;
    Check res;
    try {
      res = criteria[i].second();
    } catch (const std::exception& e) {
      res.ok = false;
      res.detail += std::string("; unexpected exception: ") + e.what();
    }
    std::printf("%s criterion %zu: %s (%s)\n", res.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].first, res.detail.c_str());
    std::fflush(stdout);
    if (!res.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
