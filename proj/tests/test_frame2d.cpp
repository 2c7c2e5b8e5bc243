#include <doctest.h>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"

using namespace wannierlab;

namespace {

ProjectionSampler sampler2d(const TightBindingModel& m, int n, int nbands) {
  auto h = build_bloch(m);
  auto grid = KGrid::square(n, n);
  check_cs(h, grid);
  std::vector<int> idx;
  for (int i = 0; i < nbands; ++i) idx.push_back(i);
  return spectral_projection(h, SpectralWindow::bands(idx), grid);
}

BlochFrame column_frame(const ProjectionSampler& p) {
  ProjectionSampler col(1, p.size(), p.rank(), KGrid::line(p.grid().n2),
                        [p](KVec k) { return p({0.0, k[0]}); });
  col.set_cs(p.cs_flag());
  return frame_1d(col);
}

}  // namespace

TEST_CASE("matching_matrix") {
  SUBCASE("constant projection gives the identity") {
    auto grid = KGrid::square(16, 16);
    Mat p0 = Mat::Zero(3, 3);
    p0(0, 0) = 1;
    p0(1, 1) = 1;
    ProjectionSampler p(2, 3, 2, grid, [p0](KVec) { return p0; });
    p.set_cs(CsState::holds);
    auto beta = matching_matrix(p, column_frame(p));
    for (const auto& b : beta.values) CHECK((b - Mat::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("product model: diagonal with the scalar holonomy phases") {
    // h = h_ssh(k1) + h_ssh(k2) on disjoint orbitals: the k1-loop holonomy
    // acts on the x factor only, so beta is diagonal; its phases are the
    // scalar SSH Berry phases read through the column frame
    auto p = sampler2d(preset_ssh2d(1.0, 2.0), 64, 2);
    REQUIRE(p.cs_flag() == CsState::holds);
    auto beta = matching_matrix(p, column_frame(p));
    CHECK(beta.unitarity_residual() < 1e-8);
    double offdiag = 0;
    for (const auto& b : beta.values)
      offdiag = std::max({offdiag, std::abs(b(0, 1)), std::abs(b(1, 0))});
    CHECK(offdiag < 1e-6);
    // scalar x-band phase: berry phase pi for v<w (diagonal entry -1), and
    // the y-band column is transported trivially in k1 (entry +1)
    double worst0 = 0, worst1 = 0;
    for (const auto& b : beta.values) {
      worst0 = std::max(worst0, std::min(std::abs(b(0, 0) + 1.0), std::abs(b(0, 0) - 1.0)));
      worst1 = std::max(worst1, std::min(std::abs(b(1, 1) + 1.0), std::abs(b(1, 1) - 1.0)));
    }
    CHECK(worst0 < 1e-6);
    CHECK(worst1 < 1e-6);
  }
  SUBCASE("CS' symmetry and zero det winding on the coupled model") {
    auto p = sampler2d(preset_trs2d(1.0, 2.0, 0.4), 64, 2);
    auto beta = matching_matrix(p, column_frame(p));
    CHECK(beta.cs_residual() < 1e-6);
    std::vector<cxd> dets(beta.n + 1);
    for (int i = 0; i <= beta.n; ++i) dets[i] = beta.values[i].determinant();
    CHECK(winding(dets) == 0);
  }
}

TEST_CASE("frame_2d") {
  SUBCASE("constant projection gives a constant frame") {
    auto grid = KGrid::square(16, 16);
    Mat p0 = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    ProjectionSampler p(2, 2, 1, grid, [p0](KVec) { return p0; });
    p.set_cs(CsState::holds);
    auto f = frame_2d(p);
    for (int i = 0; i <= 16; ++i)
      for (int j = 0; j <= 16; ++j) CHECK((f.at(i, j) - f.at(8, 8)).norm() < 1e-10);
  }
  SUBCASE("coupled TRS model passes all frame invariants at 1e-5") {
    auto p = sampler2d(preset_trs2d(1.0, 2.0, 0.4), 128, 2);
    REQUIRE(p.cs_flag() == CsState::holds);
    auto f = frame_2d(p);
    auto r = f.residuals(p);
    CHECK(r.orthonormality < 1e-5);
    CHECK(r.range < 1e-5);
    CHECK(r.periodicity < 1e-5);
    CHECK(r.cs < 1e-5);
    // consistency: a successful frame_2d forces chern = 0
    CHECK(chern_number(p).chern == 0);
  }
  SUBCASE("haldane topological preset fails the CS gate with a chern report") {
    auto h = build_bloch(preset_haldane(1.0, 0.15, kPi / 2, 0.0));
    auto grid = KGrid::square(24, 24);
    check_cs(h, grid);
    auto p = spectral_projection(h, SpectralWindow::bands({0}), grid);
    try {
      frame_2d(p);
      FAIL("expected the CS gate to throw");
    } catch (const Error& e) {
      CHECK(e.stage() == "frame_2d");
      REQUIRE(e.chern.has_value());
      CHECK(std::abs(*e.chern) == 1);
      CHECK(*e.chern_residual < 0.1);
    }
  }
}
