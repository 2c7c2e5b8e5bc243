#include <doctest.h>

#include "wannierlab/linalg.hpp"
#include "wannierlab/unilog.hpp"

using namespace wannierlab;

namespace {

// Eq.-style rotation family: the paper's no-single-logarithm example
Mat rotation_family(double k) {
  Mat b(2, 2);
  const double c = std::cos(2 * kPi * k), s = std::sin(2 * kPi * k);
  b << c, s, -s, c;
  return b;
}

UnitaryFamily sample_rotation(int n = 256) {
  return UnitaryFamily::sample(n, rotation_family, /*cs_prime=*/true);
}

}  // namespace

TEST_CASE("winding") {
  const int n = 64;
  std::vector<cxd> up(n + 1), flat(n + 1), down(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double k = -0.5 + double(i) / n;
    up[i] = std::exp(cxd(0, 2 * kPi * k));
    flat[i] = cxd(0.7, -0.2);
    down[i] = std::exp(cxd(0, -4 * kPi * k));
  }
  CHECK(winding(up) == 1);
  CHECK(winding(flat) == 0);
  CHECK(winding(down) == -2);
  std::vector<cxd> zero(n + 1, cxd(0, 0));
  CHECK_THROWS_AS(winding(zero), Error);
}

TEST_CASE("lift_phase") {
  const int n = 128;
  SUBCASE("constant family lifts to zero") {
    std::vector<cxd> ones(n + 1, cxd(1, 0));
    auto phi = lift_phase(ones);
    for (double p : phi) CHECK(std::abs(p) < 1e-14);
  }
  SUBCASE("even periodic phase is recovered exactly") {
    std::vector<cxd> b(n + 1);
    auto f = [](double k) { return std::pow(std::sin(2 * kPi * k), 2); };
    for (int i = 0; i <= n; ++i) b[i] = std::exp(cxd(0, f(-0.5 + double(i) / n)));
    auto phi = lift_phase(b);
    for (int i = 0; i <= n; ++i) CHECK(std::abs(phi[i] - f(-0.5 + double(i) / n)) < 1e-12);
    CHECK(std::abs(phi[n / 2]) < 1e-13);           // phi(0) = 0
    CHECK(std::abs(phi[0] - phi[n]) == 0.0);       // periodic after symmetrization
  }
  SUBCASE("odd (winding) family is rejected") {
    std::vector<cxd> b(n + 1);
    for (int i = 0; i <= n; ++i) b[i] = std::exp(cxd(0, 2 * kPi * (-0.5 + double(i) / n)));
    CHECK_THROWS_WITH_AS(lift_phase(b), doctest::Contains("not even"), Error);
  }
}

TEST_CASE("log_noncrossing") {
  const int n = 128;
  SUBCASE("constant diagonal") {
    Mat b0 = Mat::Zero(2, 2);
    b0(0, 0) = std::exp(cxd(0, 0.5));
    b0(1, 1) = std::exp(cxd(0, -1.1));
    auto fam = UnitaryFamily::sample(n, [b0](double) { return b0; }, true);
    auto h = log_noncrossing(fam);
    CHECK(h.exp_residual(fam) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(h.values[0]);
    CHECK(std::abs(es.eigenvalues()(0) + 1.1) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(1) - 0.5) < 1e-12);
  }
  SUBCASE("rotation family errors at the degeneracy") {
    CHECK_THROWS_WITH_AS(log_noncrossing(sample_rotation()),
                         doctest::Contains("degenerate"), Error);
  }
  SUBCASE("derived fixture: two cosine branches") {
    auto f = [](double k) {
      Mat b = Mat::Zero(2, 2);
      b(0, 0) = std::exp(cxd(0, 0.3 + 0.1 * std::cos(2 * kPi * k)));
      b(1, 1) = std::exp(cxd(0, 2.0 + 0.1 * std::cos(2 * kPi * k)));
      return b;
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto h = log_noncrossing(fam);
    CHECK(h.exp_residual(fam) < 1e-10);
    for (int i = 0; i <= n; ++i) {
      const double k = fam.node(i);
      CHECK(std::abs(h.values[i](0, 0).real() - (0.3 + 0.1 * std::cos(2 * kPi * k))) < 1e-10);
      CHECK(std::abs(h.values[i](1, 1).real() - (2.0 + 0.1 * std::cos(2 * kPi * k))) < 1e-10);
    }
    CHECK(h.cs_residual() < 1e-12);
    CHECK(h.periodicity_residual() == 0.0);
  }
  SUBCASE("non-diagonal CS' fixture keeps all contracts") {
    // e^{i h(k)} with h(k) = a(k) sigma_x + c(k) Id, a even: CS' and smooth,
    // eigenvalues c +- a stay separated for the chosen amplitudes
    auto f = [](double k) {
      Mat h(2, 2);
      const double a = 0.4 + 0.1 * std::cos(2 * kPi * k);
      const double c = 0.2 * std::cos(2 * kPi * k);
      h << c, a, a, c;
      return expi(h);
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto h = log_noncrossing(fam);
    CHECK(h.exp_residual(fam) < 1e-8);
    CHECK(h.cs_residual() < 1e-8);
    CHECK(h.periodicity_residual() < 1e-12);
  }
}

TEST_CASE("circle_gap") {
  const int n = 64;
  SUBCASE("identity family: the gap sits at pi") {
    auto fam = UnitaryFamily::sample(n, [](double) { return Mat::Identity(2, 2); }, true);
    auto g = circle_gap(fam);
    REQUIRE(g.has_value());
    CHECK(std::abs(*g - kPi) < 1e-12);
  }
  SUBCASE("rotation family covers the whole circle") {
    CHECK(!circle_gap(sample_rotation(256)).has_value());
  }
  SUBCASE("diag(1,-1): tie broken toward +pi/2") {
    Mat b = Mat::Zero(2, 2);
    b(0, 0) = 1;
    b(1, 1) = -1;
    auto fam = UnitaryFamily::sample(n, [b](double) { return b; }, true);
    auto g = circle_gap(fam);
    REQUIRE(g.has_value());
    CHECK(std::abs(*g - kPi / 2) < 1e-12);
  }
}

TEST_CASE("log_cayley") {
  const int n = 128;
  SUBCASE("identity with phi0 = pi gives zero") {
    auto fam = UnitaryFamily::sample(n, [](double) { return Mat::Identity(2, 2); }, true);
    auto h = log_cayley(fam, kPi);
    for (const auto& m : h.values) CHECK(m.norm() < 1e-13);
  }
  SUBCASE("scalar family matches lift_phase up to the beta(0) convention") {
    auto f = [](double k) {
      Mat b(1, 1);
      b(0, 0) = std::exp(cxd(0, 0.5 * std::cos(2 * kPi * k)));
      return b;
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto h = log_cayley(fam, kPi);
    std::vector<cxd> scalars(n + 1);
    for (int i = 0; i <= n; ++i) scalars[i] = fam.values[i](0, 0);
    auto phi = lift_phase(scalars);
    const double base = principal_arg(fam.values[n / 2](0, 0));
    for (int i = 0; i <= n; ++i)
      CHECK(std::abs(h.values[i](0, 0).real() - (base + phi[i])) < 1e-10);
    CHECK(h.exp_residual(fam) < 1e-12);
  }
  SUBCASE("eigenvalue at e^{i phi0} is rejected") {
    Mat b = Mat::Zero(2, 2);
    b(0, 0) = std::exp(cxd(0, 1.0));
    b(1, 1) = std::exp(cxd(0, -0.4));
    auto fam = UnitaryFamily::sample(n, [b](double) { return b; }, true);
    CHECK_THROWS_WITH_AS(log_cayley(fam, 1.0), doctest::Contains("not a spectral gap"), Error);
  }
}

TEST_CASE("regularize") {
  const int n = 256;
  SUBCASE("analytic nondegenerate family: s=0 path stays within 1e-3 at nu=1e-3") {
    auto f = [](double k) {
      Mat b = Mat::Zero(2, 2);
      b(0, 0) = std::exp(cxd(0, 0.3 + 0.2 * std::cos(2 * kPi * k)));
      b(1, 1) = std::exp(cxd(0, 2.0 - 0.1 * std::cos(2 * kPi * k)));
      return b;
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto reg = regularize(fam, 0.0, 1e-3);
    CHECK(reg.sup_distance <= 1e-3);
    CHECK(reg.family.cs_residual() < 1e-12);
  }
  SUBCASE("rotation family: endpoint gaps >= s/2, CS' kept") {
    auto reg = regularize(sample_rotation(n), 0.1, 0.01);
    CHECK(reg.endpoint_gap >= 0.05);
    CHECK(reg.family.cs_residual() < 1e-12);
    CHECK(reg.family.unitarity_residual() < 1e-10);
    CHECK(reg.sup_distance < 0.2);
  }
  SUBCASE("identity family: endpoint eigenvalues split to e^{i s l}") {
    const double s = 0.07;
    auto fam = UnitaryFamily::sample(n, [](double) { return Mat::Identity(2, 2); }, true);
    auto reg = regularize(fam, s, 0.002);
    auto args = principal_args(eig_unitary(reg.family.values[n / 2]).vals);
    std::sort(args.begin(), args.end());
    // smoothing shrinks the tent a little; the two eigenvalues stay distinct
    // with spacing of order s
    CHECK(args[1] - args[0] > s / 2);
    CHECK(args[1] - args[0] < 1.5 * s);
  }
  SUBCASE("approximation improves monotonically under halving") {
    auto fam = sample_rotation(n);
    auto r1 = regularize(fam, 0.1, 0.01);
    auto r2 = regularize(fam, 0.05, 0.005);
    auto r3 = regularize(fam, 0.025, 0.0025);
    CHECK(r2.sup_distance < r1.sup_distance);
    CHECK(r3.sup_distance < r2.sup_distance);
    CHECK(r1.sup_distance / r2.sup_distance >= 1.8);
  }
}

TEST_CASE("log_analytic_endpoints") {
  const int n = 256;
  SUBCASE("agrees with log_noncrossing on a non-crossing fixture") {
    auto f = [](double k) {
      Mat h(2, 2);
      const double a = 0.4 + 0.1 * std::cos(2 * kPi * k);
      const double c = 0.2 * std::cos(2 * kPi * k);
      h << c, a, a, c;
      return expi(h);
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto h1 = log_noncrossing(fam);
    auto h2 = log_analytic_endpoints(fam);
    double d = 0;
    for (int i = 0; i <= n; ++i) d = std::max(d, (h1.values[i] - h2.values[i]).norm());
    CHECK(d < 1e-10);
  }
  SUBCASE("regularized rotation family succeeds through interior structure") {
    auto reg = regularize(sample_rotation(n), 0.1, 0.01);
    auto h = log_analytic_endpoints(reg.family);
    CHECK(h.exp_residual(reg.family) < 1e-8);
    CHECK(h.cs_residual() < 1e-8);
    CHECK(h.periodicity_residual() == 0.0);
  }
  SUBCASE("exact endpoint degeneracy errors") {
    CHECK_THROWS_WITH_AS(log_analytic_endpoints(sample_rotation(n)),
                         doctest::Contains("degenerate endpoint"), Error);
  }
}

TEST_CASE("straighten") {
  const int n = 256;
  SUBCASE("identity input gives the identity field") {
    auto fam = UnitaryFamily::sample(n, [](double) { return Mat::Identity(2, 2); }, true);
    auto u = straighten(fam);
    CHECK(u.boundary_residual < 1e-10);
    // h1 may carry the endpoint splitting; the contract is the boundary
    // identity and the symmetry, not h = 0
    CHECK(u.symmetry_residual < 1e-10);
  }
  SUBCASE("paper rotation family: the no-single-logarithm case") {
    auto u = straighten(sample_rotation(n));
    CHECK(u.boundary_residual < 1e-8);
    CHECK(u.symmetry_residual < 1e-8);
    CHECK(u.s_used == 0.1);  // first auto-shrink iteration suffices
  }
  SUBCASE("known-good logarithm fixture satisfies the contract") {
    auto f = [](double k) {
      Mat h(2, 2);
      const double a = 0.4 + 0.1 * std::cos(2 * kPi * k);
      h << 0.0, a, a, 0.0;
      return expi(h);
    };
    auto fam = UnitaryFamily::sample(n, f, true);
    auto u = straighten(fam);
    CHECK(u.boundary_residual < 1e-8);
    CHECK(u.symmetry_residual < 1e-8);
  }
  SUBCASE("non-CS' input is rejected") {
    auto f = [](double k) {
      Mat b = Mat::Zero(2, 2);
      b(0, 0) = std::exp(cxd(0, 2 * kPi * k));  // odd scalar: not CS'
      b(1, 1) = 1;
      return b;
    };
    auto fam = UnitaryFamily::sample(n, f, false);
    CHECK_THROWS_WITH_AS(straighten(fam), doctest::Contains("not CS'"), Error);
  }
}
