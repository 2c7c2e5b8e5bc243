#include <doctest.h>

#include <random>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"

using namespace wannierlab;

namespace {

ProjectionSampler ssh_lower_sampler(int n, double v = 1.0, double w = 2.0) {
  auto h = build_bloch(preset_ssh(v, w));
  auto grid = KGrid::line(n);
  check_cs(h, grid);
  return spectral_projection(h, SpectralWindow::bands({0}), grid);
}

}  // namespace

TEST_CASE("real_seed") {
  SUBCASE("diagonal projection picks the basis vector") {
    Mat p = Mat::Zero(2, 2);
    p(0, 0) = 1;
    RMat s = real_seed(p);
    CHECK(std::abs(std::abs(s(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(s(1, 0)) < 1e-14);
  }
  SUBCASE("symmetric rank-1 projection, up to sign") {
    Mat p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    RMat s = real_seed(p);
    CHECK(std::abs(std::abs(s(0, 0)) - 1 / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(s(0, 0) - s(1, 0)) < 1e-14);
  }
  SUBCASE("complex projection is rejected") {
    Vec v(2);
    v << 1.0 / std::sqrt(2.0), cxd(0, 1.0 / std::sqrt(2.0));
    Mat p = v * v.adjoint();
    CHECK_THROWS_WITH_AS(real_seed(p), doctest::Contains("not real"), Error);
  }
}

TEST_CASE("frame_1d on full-rank projection is the constant seed") {
  auto h = build_bloch(preset_ssh(1.0, 2.0));
  auto grid = KGrid::line(32);
  check_cs(h, grid);
  auto p = spectral_projection(h, SpectralWindow::bands({0, 1}), grid);
  auto f = frame_1d(p);
  for (int i = 0; i <= 32; ++i) CHECK((f.at(i) - f.at(16)).norm() < 1e-12);
}

TEST_CASE("frame_1d on the SSH lower band") {
  auto p = ssh_lower_sampler(256);
  auto f = frame_1d(p);
  auto r = f.residuals(p);
  CHECK(r.orthonormality < 1e-6);
  CHECK(r.range < 1e-6);
  CHECK(r.periodicity < 1e-6);
  CHECK(r.cs < 1e-6);

  SUBCASE("residuals shrink under grid doubling") {
    auto p2 = ssh_lower_sampler(512);
    auto r2 = frame_1d(p2).residuals(p2);
    const double floor_tol = 1e-12;
    CHECK((r2.range <= r.range / 3 || r2.range < floor_tol));
    CHECK((r2.periodicity <= r.periodicity / 3 || r2.periodicity < floor_tol));
  }

  SUBCASE("wannier center matches the berry-phase oracle") {
    double phase = berry_phase(p.slice1(), 1, 4096);
    CHECK(std::abs(std::abs(phase) - kPi) < 1e-6);  // v < w: center at 1/2
  }
}

TEST_CASE("frame_1d matches the matrix-exponential change-of-basis form") {
  // the same frame written as Xi_m(k) = sum_n [e^{-ik MM}]_{nm} Psi_n(k)
  auto p = ssh_lower_sampler(128, 1.0, 2.0);
  auto f = frame_1d(p);
  // recompute the pieces: transported basis and holonomy in the seed basis
  auto slice = p.slice1();
  RMat seed = real_seed(p.at1(0.0));
  const int n = 128;
  auto right = propagate(slice, 0.0, 0.5, n / 2);
  auto left = propagate(slice, 0.0, -0.5, n / 2);
  Mat loop = left.u.adjoint() * right.u;
  Mat m = holonomy_log(loop, p.at1(0.0), 1e-2);
  Mat mm = seed.cast<cxd>().adjoint() * m * seed.cast<cxd>();  // N x N
  // at k = 1/4: Psi(k) = A(k,0) seed
  auto quarter = propagate(slice, 0.0, 0.25, n / 4);
  Mat psi = quarter.u * seed.cast<cxd>();
  Mat xi_via_mm = psi * expi(mm, -0.25);
  Mat xi = f.at(n / 2 + n / 4);
  CHECK((xi - xi_via_mm).norm() < 1e-6);
}

TEST_CASE("gauge covariance: rotating the seed rotates the frame") {
  // two-band column slice of the coupled 2d model, rotated by a real W
  auto h2 = build_bloch(preset_trs2d(1.0, 2.0, 0.4));
  auto grid2 = KGrid::square(32, 32);
  check_cs(h2, grid2);
  auto p2full = spectral_projection(h2, SpectralWindow::bands({0, 1}), grid2);
  ProjectionSampler pslice(1, 4, 2, KGrid::line(64),
                           [p2full](KVec k) { return p2full({0.0, k[0]}); });
  pslice.set_cs(CsState::holds);
  RMat seed = real_seed(pslice.at1(0.0));
  RMat wrot(2, 2);
  const double th = 0.7;
  wrot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  auto fa = frame_1d(pslice, seed);
  auto fb = frame_1d(pslice, RMat(seed * wrot));
  double d = 0;
  for (int i = 0; i <= 64; ++i) d = std::max(d, (fb.at(i) - fa.at(i) * wrot.cast<cxd>()).norm());
  CHECK(d < 1e-12);
}

TEST_CASE("periodic projection with non-periodic eigenvector gauge") {
  // P(k) = v(k) v(k)^T with v(k) = (cos pi k, sin pi k): v(k+1) = -v(k) but P
  // is periodic; the frame must come out periodic anyway
  auto grid = KGrid::line(256);
  ProjectionSampler p(1, 2, 1, grid, [](KVec k) {
    Vec v(2);
    v << std::cos(kPi * k[0]), std::sin(kPi * k[0]);
    return Mat(v * v.adjoint());
  });
  p.set_cs(CsState::holds);
  auto f = frame_1d(p);
  CHECK((f.at(0) - f.at(256)).norm() < 1e-6);
  auto r = f.residuals(p);
  CHECK(r.orthonormality < 1e-10);
  CHECK(r.range < 1e-6);
}

TEST_CASE("seed outside the range is rejected") {
  auto p = ssh_lower_sampler(64);
  RMat bad(2, 1);
  bad << 1.0, 0.0;  // not in Ran P(0) for SSH
  CHECK_THROWS_WITH_AS(frame_1d(p, bad), doctest::Contains("range"), Error);
}
