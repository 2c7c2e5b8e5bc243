#include "wannierlab/unilog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wannierlab/linalg.hpp"
#include "wannierlab/spectral.hpp"

namespace wannierlab {

UnitaryFamily UnitaryFamily::sample(int n, const std::function<Mat(double)>& f, bool cs_prime) {
  UnitaryFamily fam;
  fam.n = n;
  fam.cs_prime = cs_prime;
  fam.values.reserve(n + 1);
  for (int i = 0; i <= n; ++i) fam.values.push_back(f(-0.5 + double(i) / n));
  return fam;
}

double UnitaryFamily::unitarity_residual() const {
  double r = 0;
  for (const auto& u : values)
    r = std::max(r, (u * u.adjoint() - Mat::Identity(u.rows(), u.cols())).norm());
  return r;
}

double UnitaryFamily::periodicity_residual() const { return (values[0] - values[n]).norm(); }

double UnitaryFamily::cs_residual() const {
  double r = 0;
  for (int i = 0; i <= n; ++i)
    r = std::max(r, (values[i].transpose() - values[n - i]).norm());
  return r;
}

double HermitianFamily::cs_residual() const {
  double r = 0;
  for (int i = 0; i <= n; ++i)
    r = std::max(r, (values[i].transpose() - values[n - i]).norm());
  return r;
}

double HermitianFamily::periodicity_residual() const { return (values[0] - values[n]).norm(); }

double HermitianFamily::exp_residual(const UnitaryFamily& beta) const {
  double r = 0;
  for (int i = 0; i <= n; ++i) r = std::max(r, (expi(values[i]) - beta.values[i]).norm());
  return r;
}

int winding(const std::vector<cxd>& f, const Tolerances& tol) {
  for (const auto& z : f)
    if (std::abs(z) <= tol.pd) throw Error("winding", "family crosses zero");
  double total = 0;
  for (size_t i = 0; i + 1 < f.size(); ++i) total += std::arg(f[i + 1] / f[i]);
  double w = total / (2 * kPi);
  if (std::abs(w - std::round(w)) > 0.1)
    throw Error("winding", "winding residual " + std::to_string(std::abs(w - std::round(w))) +
                               "; grid too coarse");
  return int(std::lround(w));
}

std::vector<double> lift_phase(const std::vector<cxd>& beta, const Tolerances& tol) {
  const int n = int(beta.size()) - 1;
  for (const auto& z : beta)
    if (std::abs(std::abs(z) - 1.0) > 1e-8)
      throw Error("lift_phase", "family is not unimodular");
  double ev = 0;
  for (int i = 0; i <= n; ++i) ev = std::max(ev, std::abs(beta[i] - beta[n - i]));
  if (ev > tol.cs) throw Error("lift_phase", "family is not even");
  (void)winding(beta, tol);  // zero is implied by evenness; still checked

  const int i0 = n / 2;
  std::vector<double> phi(n + 1, 0.0);
  for (int i = i0; i < n; ++i) phi[i + 1] = phi[i] + std::arg(beta[i + 1] / beta[i]);
  for (int i = i0; i > 0; --i) phi[i - 1] = phi[i] + std::arg(beta[i - 1] / beta[i]);
  for (int i = 0; i <= n / 2; ++i) {
    double s = 0.5 * (phi[i] + phi[n - i]);
    phi[i] = s;
    phi[n - i] = s;
  }
  return phi;
}

namespace {

// ---- shared branch-tracking machinery ----

struct Branches {
  // per node: N eigenvalues and rank-1 eigenprojections, continuously labeled
  std::vector<std::vector<cxd>> vals;
  std::vector<std::vector<Mat>> projs;
};

// best and second-best assignment score over permutations (N <= 8)
std::pair<double, std::vector<int>> best_assignment(const RMat& score, double* second) {
  const int n = int(score.rows());
  std::vector<int> perm(n), best_perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1;
  *second = -1;
  do {
    double s = 0;
    for (int i = 0; i < n; ++i) s += score(i, perm[i]);
    if (s > best) {
      *second = best;
      best = s;
      best_perm = perm;
    } else if (s > *second) {
      *second = s;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_perm};
}

// Track eigenvalue branches from the center node (k=0) to the right edge by
// overlap-maximal matching, then mirror to the left half: lambda_j(-k) =
// lambda_j(k) and P_j(-k) = P_j(k)^T (branch evenness under CS').
// require_gap: per-node circle gap >= tol.degen (log_noncrossing), otherwise
// only ambiguity is policed (log_analytic_endpoints).
Branches track_branches(const UnitaryFamily& beta, const Tolerances& tol, bool require_gap,
                        const char* stage) {
  const int n = beta.n, N = beta.size(), i0 = beta.center();
  Branches br;
  br.vals.assign(n + 1, {});
  br.projs.assign(n + 1, {});

  auto e0 = eig_unitary(beta.values[i0]);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  auto args0 = principal_args(e0.vals);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return args0[a] < args0[b]; });

  Mat prev_vecs(N, N);
  for (int j = 0; j < N; ++j) {
    prev_vecs.col(j) = e0.vecs.col(order[j]);
    br.vals[i0].push_back(e0.vals(order[j]));
    br.projs[i0].push_back(e0.vecs.col(order[j]) * e0.vecs.col(order[j]).adjoint());
  }

  for (int i = i0; i <= n; ++i) {
    if (require_gap) {
      double g = min_circle_gap(eig_unitary(beta.values[i]).vals);
      if (N > 1 && g < tol.degen)
        throw Error(stage, "degenerate spectrum (circle gap " + std::to_string(g) + ")",
                    {beta.node(i), 0.0}, 1);
      double gm = min_circle_gap(eig_unitary(beta.values[beta.mirror(i)]).vals);
      if (N > 1 && gm < tol.degen)
        throw Error(stage, "degenerate spectrum (circle gap " + std::to_string(gm) + ")",
                    {beta.node(beta.mirror(i)), 0.0}, 1);
    }
    if (i == i0) continue;
    auto ek = eig_unitary(beta.values[i]);
    RMat overlap = (prev_vecs.adjoint() * ek.vecs).cwiseAbs2().real();
    double second = -1;
    auto [best, perm] = best_assignment(overlap, &second);
    if (N > 1 && second >= 0 && best - second < tol.match)
      throw Error(stage,
                  "branch matching ambiguous (score separation " +
                      std::to_string(best - second) + " < tau_match); refine the grid",
                  {beta.node(i), 0.0}, 1);
    Mat vecs(N, N);
    for (int j = 0; j < N; ++j) {
      vecs.col(j) = ek.vecs.col(perm[j]);
      br.vals[i].push_back(ek.vals(perm[j]));
      br.projs[i].push_back(ek.vecs.col(perm[j]) * ek.vecs.col(perm[j]).adjoint());
    }
    prev_vecs = vecs;
  }
  for (int i = 0; i < i0; ++i) {
    const int m = n - i;
    for (int j = 0; j < N; ++j) {
      br.vals[i].push_back(br.vals[m][j]);
      br.projs[i].push_back(br.projs[m][j].transpose());
    }
  }
  return br;
}

// Hermitize per node, pin the endpoint identification, and (for CS' inputs)
// enforce h(k)^T = h(-k) exactly by pair averaging.
void finalize_hermitian(HermitianFamily& h, bool cs) {
  const int n = h.n;
  for (auto& m : h.values) m = hermitize(m);
  Mat avg = 0.5 * (h.values[0] + h.values[n]);
  h.values[0] = avg;
  h.values[n] = avg;
  if (cs) {
    for (int i = 0; i <= n / 2; ++i) {
      Mat s = 0.5 * (h.values[i] + h.values[n - i].transpose());
      h.values[i] = s;
      h.values[n - i] = s.transpose();
    }
  }
}

HermitianFamily assemble_log(const UnitaryFamily& beta, const Branches& br,
                             const Tolerances& tol) {
  const int n = beta.n, N = beta.size(), i0 = beta.center();
  HermitianFamily h;
  h.n = n;
  h.values.assign(n + 1, Mat::Zero(N, N));
  for (int j = 0; j < N; ++j) {
    std::vector<cxd> lam(n + 1);
    for (int i = 0; i <= n; ++i) lam[i] = br.vals[i][j];
    auto phi = lift_phase(lam, tol);
    const double base = principal_arg(lam[i0]);
    for (int i = 0; i <= n; ++i) h.values[i] += (base + phi[i]) * br.projs[i][j];
  }
  finalize_hermitian(h, beta.cs_prime);
  return h;
}

}  // namespace

HermitianFamily log_noncrossing(const UnitaryFamily& beta, const Tolerances& tol) {
  auto br = track_branches(beta, tol, /*require_gap=*/true, "log_noncrossing");
  return assemble_log(beta, br, tol);
}

std::optional<double> circle_gap(const UnitaryFamily& beta, int bins, const Tolerances& tol) {
  std::vector<double> args;
  for (const auto& u : beta.values)
    for (double a : principal_args(eig_unitary(u).vals)) args.push_back(a);
  std::sort(args.begin(), args.end());
  const double w = 2 * kPi / bins;
  std::vector<bool> occupied(bins, false);
  for (double a : args) {
    int b = int(std::floor((a + kPi) / w));
    occupied[std::clamp(b, 0, bins - 1)] = true;
  }
  if (args.empty()) return kPi;
  bool any_empty = false, any_occupied = false;
  for (bool b : occupied) (b ? any_occupied : any_empty) = true;
  if (!any_empty) return std::nullopt;
  if (!any_occupied) return kPi;
  // every maximal circular run of empty bins is a candidate window; its edges
  // are refined to the actual extreme arguments in the bounding occupied
  // bins; width ties break toward the positive center
  auto edge_arg = [&](int bin, bool want_max) {
    double best = want_max ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
    for (double a : args) {
      int b = std::clamp(int(std::floor((a + kPi) / w)), 0, bins - 1);
      if (b != bin) continue;
      best = want_max ? std::max(best, a) : std::min(best, a);
    }
    return best;
  };
  std::optional<double> result;
  double result_width = -1;
  for (int start = 0; start < bins; ++start) {
    if (occupied[start] || !occupied[(start + bins - 1) % bins]) continue;
    int len = 0;
    while (len < bins && !occupied[(start + len) % bins]) ++len;
    const double lo_angle = edge_arg((start + bins - 1) % bins, true);
    double hi_angle = edge_arg((start + len) % bins, false);
    while (hi_angle <= lo_angle) hi_angle += 2 * kPi;
    const double width = (hi_angle - lo_angle) - 2 * tol.degen;
    if (width < w) continue;
    const double center = principal_arg(std::exp(cxd(0, 0.5 * (lo_angle + hi_angle))));
    if (width > result_width + 1e-12 ||
        (std::abs(width - result_width) <= 1e-12 && result && center > *result)) {
      result_width = width;
      result = center;
    }
  }
  return result;
}

HermitianFamily log_cayley(const UnitaryFamily& beta, double phi0, const Tolerances& tol) {
  const int n = beta.n, N = beta.size();
  HermitianFamily h;
  h.n = n;
  h.values.assign(n + 1, Mat());
  const cxd rot = std::exp(cxd(0, kPi - phi0));
  const Mat id = Mat::Identity(N, N);
  for (int i = 0; i <= n; ++i) {
    Mat gamma = rot * beta.values[i];
    for (double a : principal_args(eig_unitary(gamma).vals))
      if (std::abs(arc_diff(a, kPi)) < tol.degen)
        throw Error("log_cayley", "phi0 is not a spectral gap", {beta.node(i), 0.0}, 1);
    Mat s = hermitize(cxd(0, 1) * (id - gamma) * (id + gamma).inverse());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    RVec ang = 2.0 * es.eigenvalues().array().atan();
    h.values[i] = (phi0 - kPi) * id +
                  es.eigenvectors() * ang.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
  }
  finalize_hermitian(h, beta.cs_prime);
  return h;
}

namespace {

// ---- regularization ----

// clusters of eigenvalues on the unit circle: member indices plus the
// circular mean of the member args (one representative arg per cluster; a
// per-member principal arg would mix +pi and -pi across the branch cut)
std::vector<std::pair<std::vector<int>, double>> clusters_on_circle(const Vec& vals,
                                                                    double tol_arc) {
  const int N = int(vals.size());
  auto th = principal_args(vals);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return th[a] < th[b]; });
  std::vector<std::vector<int>> cl{{order[0]}};
  for (int oi = 1; oi < N; ++oi) {
    int idx = order[oi];
    if (th[idx] - th[cl.back().back()] < tol_arc)
      cl.back().push_back(idx);
    else
      cl.push_back({idx});
  }
  if (cl.size() > 1 && th[cl.front().front()] + 2 * kPi - th[cl.back().back()] < tol_arc) {
    auto tail = cl.back();
    cl.pop_back();
    tail.insert(tail.end(), cl.front().begin(), cl.front().end());
    cl.front() = tail;
  }
  std::vector<std::pair<std::vector<int>, double>> out;
  for (const auto& c : cl) {
    const double a0 = th[c[0]];
    double mean = 0;
    for (int i : c) mean += a0 + arc_diff(th[i], a0);
    mean /= double(c.size());
    out.emplace_back(c, principal_arg(std::exp(cxd(0, mean))));
  }
  return out;
}

struct EndpointSplitData {
  std::vector<double> rep_args;
  Mat a_total;  // sum over clusters of sum_l (l-1) P_{j,l}, real symmetric
};

// cluster_arc: eigenvalues closer than this count as one degenerate cluster.
// Scaled with the splitting size s: a natural gap below s/2 must be treated
// as a cluster, otherwise the smoothing step can push it under the s/2
// postcondition.
EndpointSplitData endpoint_split_data(const Mat& u, double cluster_arc) {
  const int N = int(u.rows());
  auto eig = eig_unitary(u);
  EndpointSplitData out;
  out.a_total = Mat::Zero(N, N);
  for (const auto& [members, rep] : clusters_on_circle(eig.vals, cluster_arc)) {
    out.rep_args.push_back(rep);
    if (members.size() < 2) continue;
    Mat pi = Mat::Zero(N, N);
    for (int i : members) pi += eig.vecs.col(i) * eig.vecs.col(i).adjoint();
    if ((pi - pi.conjugate()).norm() > 1e-8)
      throw Error("regularize", "endpoint cluster projection is not real (CS' violated)");
    const int r = int(members.size());
    Eigen::SelfAdjointEigenSolver<RMat> es(pi.real());
    for (int l = 0; l < r; ++l) {
      RVec b = es.eigenvectors().col(N - r + l);
      out.a_total += double(l) * (b * b.transpose()).cast<cxd>();
    }
  }
  return out;
}

// local logarithm of u near an endpoint: h = sum_j rep_j Pi_j(k) + cayley
// remainder; valid while eigenvalues stay close to their endpoint cluster
Mat local_log(const Mat& u, const EndpointSplitData& data) {
  const int N = int(u.rows());
  auto eig = eig_unitary(u);
  auto th = principal_args(eig.vals);
  Mat btilde = Mat::Zero(N, N), harg = Mat::Zero(N, N);
  for (int m = 0; m < N; ++m) {
    double best = std::numeric_limits<double>::infinity(), rep = 0;
    for (double r : data.rep_args) {
      const double d = std::abs(arc_diff(th[m], r));
      if (d < best) {
        best = d;
        rep = r;
      }
    }
    Mat p = eig.vecs.col(m) * eig.vecs.col(m).adjoint();
    btilde += std::exp(cxd(0, rep)) * p;
    harg += rep * p;
  }
  Mat gamma = btilde.adjoint() * u;  // unitary, near Id
  const Mat id = Mat::Identity(N, N);
  Mat s = hermitize(cxd(0, 1) * (id - gamma) * (id + gamma).inverse());
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  RVec ang = 2.0 * es.eigenvalues().array().atan();
  Mat hloc = es.eigenvectors() * ang.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
  return hermitize(harg) + hloc;
}

double tent(double t, double s) {
  return s > 0 ? std::max(0.0, 1.0 - std::abs(t) / (s / 2)) : 0.0;
}

// periodized Poisson kernel of width nu, unit mass over one period
double poisson_kernel(double x, double nu) {
  return std::sinh(2 * kPi * nu) / (std::cosh(2 * kPi * nu) - std::cos(2 * kPi * x));
}

}  // namespace

RegularizeResult regularize(const UnitaryFamily& beta, double s, double nu,
                            const Tolerances& tol) {
  const int n = beta.n, N = beta.size();
  std::vector<Mat> split = beta.values;

  if (s > 0) {
    // one dataset per circle point: k=0 at the center node, k=+-1/2 shared by
    // both boundary nodes (a single splitting direction for the wrapped tent)
    struct Window {
      std::vector<int> anchors;
      std::vector<double> kc;
      int ref;
    };
    const std::vector<Window> windows{{{n / 2}, {0.0}, n / 2}, {{0, n}, {-0.5, 0.5}, 0}};
    const int half = int(std::floor(s / 2 * n));
    const double cluster_arc = std::max(tol.degen, s / 2);
    for (const auto& wdw : windows) {
      auto data = endpoint_split_data(beta.values[wdw.ref], cluster_arc);
      for (size_t a = 0; a < wdw.anchors.size(); ++a) {
        for (int j = -half; j <= half; ++j) {
          const int i = wdw.anchors[a] + j;
          if (i < 0 || i > n) continue;
          const double g = tent(beta.node(i) - wdw.kc[a], s);
          if (g <= 0) continue;
          Mat h = local_log(beta.values[i], data) + (s * g) * data.a_total;
          split[i] = expi(hermitize(h));
        }
      }
    }
  }

  // circular convolution against the periodized Poisson kernel (closed form),
  // then polar re-unitarization
  std::vector<Mat> out(n + 1);
  for (int i = 0; i <= n; ++i) {
    Mat acc = Mat::Zero(N, N);
    for (int j = 0; j < n; ++j)
      acc += poisson_kernel(beta.node(i) - beta.node(j), nu) * split[j];
    out[i] = polar_unitary(acc / double(n));
  }
  Mat avg = 0.5 * (out[0] + out[n]);
  out[0] = avg;
  out[n] = avg;
  for (int i = 0; i <= n / 2; ++i) {
    Mat sym = 0.5 * (out[i] + out[n - i].transpose());
    out[i] = sym;
    out[n - i] = sym.transpose();
  }

  RegularizeResult res;
  res.family.n = n;
  res.family.cs_prime = true;
  res.family.values = std::move(out);
  for (int i = 0; i <= n; ++i)
    res.sup_distance = std::max(res.sup_distance, (res.family.values[i] - beta.values[i]).norm());
  res.endpoint_gap = std::numeric_limits<double>::infinity();
  for (int i : {0, n / 2, n})
    res.endpoint_gap =
        std::min(res.endpoint_gap, min_circle_gap(eig_unitary(res.family.values[i]).vals));
  if (s > 0 && N > 1 && res.endpoint_gap < s / 2)
    throw Error("regularize", "endpoint gap " + std::to_string(res.endpoint_gap) +
                                  " fell below s/2; clusters too close for this s");
  return res;
}

HermitianFamily log_analytic_endpoints(const UnitaryFamily& beta, const Tolerances& tol) {
  const int n = beta.n, N = beta.size();
  for (int i : {0, n / 2, n}) {
    double g = min_circle_gap(eig_unitary(beta.values[i]).vals);
    if (N > 1 && g < tol.degen)
      throw Error("log_analytic_endpoints",
                  "degenerate endpoint spectrum (gap " + std::to_string(g) + ")",
                  {beta.node(i), 0.0}, 1);
  }
  auto br = track_branches(beta, tol, /*require_gap=*/false, "log_analytic_endpoints");
  return assemble_log(beta, br, tol);
}

Mat StraighteningField::u(double x, int node) const {
  return expi(h1.values[node], -x) * expi(h2.values[node], -x);
}

StraighteningField straighten(const UnitaryFamily& beta, const Tolerances& tol) {
  const int n = beta.n, N = beta.size();
  const double cs_defect = beta.cs_residual();
  if (cs_defect > std::max(tol.cs, 1e-4))
    throw Error("straighten", "input family is not CS' (residual " +
                                  std::to_string(cs_defect) + ")");
  UnitaryFamily b = beta;
  b.cs_prime = true;

  // auto-shrink (s, nu) until the first rotation contracts beta to within 1/2
  double s = 0.1, nu = 0.01;
  HermitianFamily h1;
  bool ok = false;
  std::string last_failure;
  for (int iter = 0; iter < 8; ++iter) {
    try {
      auto reg = regularize(b, s, nu, tol);
      h1 = log_analytic_endpoints(reg.family, tol);
      double r = 0;
      for (int i = 0; i <= n; ++i) {
        Mat half = expi(h1.values[i], -0.5);
        r = std::max(r, (half * b.values[i] * half - Mat::Identity(N, N)).norm());
      }
      if (r <= 0.5) {
        ok = true;
        break;
      }
      last_failure = "contraction " + std::to_string(r) + " above 1/2";
    } catch (const Error& e) {
      // endpoint clusters or branch tracking rejected this (s, nu); shrink
      last_failure = e.what();
    }
    s /= 2;
    nu /= 2;
  }
  if (!ok)
    throw Error("straighten", "auto-shrink failed after 8 halvings (last: " + last_failure + ")");

  UnitaryFamily btilde;
  btilde.n = n;
  btilde.cs_prime = true;
  btilde.values.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    Mat half = expi(h1.values[i], -0.5);
    btilde.values[i] = half * b.values[i] * half;
  }
  // -1 is always in the resolvent set of btilde
  HermitianFamily h2 = log_cayley(btilde, kPi, tol);

  StraighteningField out;
  out.h1 = std::move(h1);
  out.h2 = std::move(h2);
  out.s_used = s;
  out.nu_used = nu;
  for (int i = 0; i <= n; ++i) {
    Mat lhs = out.u(-0.5, i).adjoint() * b.values[i] * out.u(0.5, i);
    out.boundary_residual = std::max(out.boundary_residual,
                                     (lhs - Mat::Identity(N, N)).norm());
  }
  for (int i = 0; i <= n; ++i) {
    for (double x : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
      Mat lhs = out.u(x, i).conjugate();
      Mat rhs = out.u(-x, n - i);
      out.symmetry_residual = std::max(out.symmetry_residual, (lhs - rhs).norm());
    }
  }
  return out;
}

}  // namespace wannierlab
