// wannierlab: batch front end for the frame / wannier / magnetic pipelines.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/io.hpp"
#include "wannierlab/linalg.hpp"
#include "wannierlab/magnetic.hpp"
#include "wannierlab/wannier.hpp"

namespace wl = wannierlab;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string model_path;
  std::string preset;
  std::vector<double> preset_params;  // filled via named flags below
  double v = 1.0, w = 2.0, u = 0.5, coupling = 0.4, t1 = 1.0, t2 = 0.15;
  std::string grid = "256";
  std::string bands = "lower";
  std::vector<std::string> tol_overrides;
  std::string out = ".";
  int box = -1;  // -1: per-command default
};

bool power_of_two(int n) { return n >= 16 && (n & (n - 1)) == 0; }

std::pair<int, int> parse_grid(const std::string& s, int dim) {
  int n1 = 0, n2 = 0;
  if (std::sscanf(s.c_str(), "%d,%d", &n1, &n2) < 1)
    throw wl::Error("cli", "cannot parse --grid '" + s + "'");
  if (n2 == 0) n2 = n1;
  if (!power_of_two(n1) || (dim == 2 && !power_of_two(n2)))
    throw wl::Error("cli", "grid sizes must be powers of two >= 16");
  return {n1, n2};
}

wl::Tolerances parse_tols(const std::vector<std::string>& overrides) {
  wl::Tolerances tol;
  for (const auto& s : overrides) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw wl::Error("cli", "bad --tol '" + s + "', want name=value");
    const std::string name = s.substr(0, eq);
    const double value = std::stod(s.substr(eq + 1));
    if (value <= 0) throw wl::Error("cli", "tolerance '" + name + "' must be positive");
    if (name == "herm") tol.herm = value;
    else if (name == "cs") tol.cs = value;
    else if (name == "proj") tol.proj = value;
    else if (name == "gap") tol.gap = value;
    else if (name == "pd") tol.pd = value;
    else if (name == "degen") tol.degen = value;
    else if (name == "log") tol.log = value;
    else if (name == "match") tol.match = value;
    else if (name == "straight") tol.straight = value;
    else if (name == "frame") tol.frame = value;
    else if (name == "frame2") tol.frame2 = value;
    else if (name == "w") tol.w = value;
    else if (name == "mag_alg") tol.mag_alg = value;
    else if (name == "mag_trunc") tol.mag_trunc = value;
    else if (name == "b_max") tol.b_max = value;
    else throw wl::Error("cli", "unknown tolerance '" + name + "'");
  }
  return tol;
}

wl::TightBindingModel load_model(const CommonOpts& opt) {
  if (!opt.model_path.empty()) {
    std::ifstream f(opt.model_path);
    if (!f) throw wl::Error("cli", "cannot read model file '" + opt.model_path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return wl::model_from_json(text);
  }
  if (opt.preset.empty()) throw wl::Error("cli", "need --model or --preset");
  return wl::preset_by_name(opt.preset, {{"v", opt.v},
                                         {"w", opt.w},
                                         {"u", opt.u},
                                         {"coupling", opt.coupling},
                                         {"t1", opt.t1},
                                         {"t2", opt.t2}});
}

wl::SpectralWindow parse_bands(const std::string& spec, int d) {
  if (spec == "lower") return wl::SpectralWindow::lower_half();
  if (spec == "all") {
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i;
    return wl::SpectralWindow::bands(idx);
  }
  if (spec.rfind("e:", 0) == 0) {
    double lo, hi;
    if (std::sscanf(spec.c_str(), "e:%lf:%lf", &lo, &hi) != 2)
      throw wl::Error("cli", "bad energy window '" + spec + "', want e:lo:hi");
    return wl::SpectralWindow::interval(lo, hi);
  }
  // 1-based index list "1,2" or range "1-2"
  std::vector<int> idx;
  int a = 0, b = 0;
  if (std::sscanf(spec.c_str(), "%d-%d", &a, &b) == 2) {
    for (int i = a; i <= b; ++i) idx.push_back(i - 1);
  } else {
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) idx.push_back(std::stoi(tok) - 1);
  }
  if (idx.empty()) throw wl::Error("cli", "empty band spec");
  return wl::SpectralWindow::bands(idx);
}

void apply_thread_cap() {
  if (const char* env = std::getenv("WANNIERLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) Eigen::setNbThreads(cap);
  }
}

fs::path prep_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

int run_wannier1d(CommonOpts opt) {
  if (opt.box < 0) opt.box = 20;
  auto tol = parse_tols(opt.tol_overrides);
  auto model = load_model(opt);
  if (model.dim != 1) throw wl::Error("cli", "wannier1d needs a 1d model");
  auto [n1, n2] = parse_grid(opt.grid, 1);
  (void)n2;
  auto h = wl::build_bloch(model, tol);
  auto grid = wl::KGrid::line(n1);
  wl::check_cs(h, grid, tol);
  auto p = wl::spectral_projection(h, parse_bands(opt.bands, h.size()), grid, tol);
  auto frame = wl::frame_1d(p, std::nullopt, wl::TransportMode::magnus, tol);
  auto wann = wl::wannier_transform(frame, opt.box);
  auto decay = wl::decay_fit(wann);
  auto dir = prep_out(opt.out);
  wl::write_frame(frame, (dir / "frame.csv").string());
  wl::write_wannier_csv(wann, (dir / "wannier.csv").string());
  wl::write_decay_report(decay, tol.w, (dir / "decay.json").string());
  std::cout << "wannier1d: wrote frame.csv, wannier.csv, decay.json to " << dir.string() << "\n";
  return 0;
}

int run_wannier2d(CommonOpts opt) {
  if (opt.box < 0) opt.box = 10;
  auto tol = parse_tols(opt.tol_overrides);
  auto model = load_model(opt);
  if (model.dim != 2) throw wl::Error("cli", "wannier2d needs a 2d model");
  auto [n1, n2] = parse_grid(opt.grid, 2);
  auto h = wl::build_bloch(model, tol);
  auto grid = wl::KGrid::square(n1, n2);
  wl::check_cs(h, grid, tol);
  auto p = wl::spectral_projection(h, parse_bands(opt.bands, h.size()), grid, tol);
  auto frame = wl::frame_2d(p, wl::TransportMode::magnus, tol);
  auto wann = wl::wannier_transform(frame, opt.box);
  auto decay = wl::decay_fit(wann);
  auto dir = prep_out(opt.out);
  wl::write_frame(frame, (dir / "frame.csv").string());
  wl::write_wannier_csv(wann, (dir / "wannier.csv").string());
  wl::write_decay_report(decay, tol.w, (dir / "decay.json").string());
  std::cout << "wannier2d: wrote frame.csv, wannier.csv, decay.json to " << dir.string() << "\n";
  return 0;
}

int run_diagnose(CommonOpts opt) {
  auto tol = parse_tols(opt.tol_overrides);
  auto model = load_model(opt);
  wl::TopologyReport rep;
  auto dir = prep_out(opt.out);
  auto h = wl::build_bloch(model, tol);
  if (model.dim == 2) {
    auto [n1, n2] = parse_grid(opt.grid, 2);
    auto grid = wl::KGrid::square(n1, n2);
    wl::check_cs(h, grid, tol);
    auto p = wl::spectral_projection(h, parse_bands(opt.bands, h.size()), grid, tol);
    rep.chern = wl::chern_number(p, tol);
    rep.berry_phases.push_back(wl::berry_phase(p.slice1(0.0), p.rank()));
    rep.berry_phases.push_back(wl::berry_phase(p.slice2(0.0), p.rank()));
  } else {
    auto [n1, n2] = parse_grid(opt.grid, 1);
    (void)n2;
    auto grid = wl::KGrid::line(n1);
    wl::check_cs(h, grid, tol);
    auto p = wl::spectral_projection(h, parse_bands(opt.bands, h.size()), grid, tol);
    rep.berry_phases.push_back(wl::berry_phase(p.slice1(0.0), p.rank()));
  }
  wl::write_topology_report(rep, (dir / "topology.json").string());
  std::cout << "diagnose: wrote topology.json to " << dir.string() << "\n";
  return 0;
}

int run_magnetic(CommonOpts opt, const std::string& blist, int patch_cells, int margin,
                 int bulk_box) {
  auto tol = parse_tols(opt.tol_overrides);
  auto model = load_model(opt);
  if (model.dim != 2) throw wl::Error("cli", "magnetic needs a 2d model");
  auto [n1, n2] = parse_grid(opt.grid, 2);
  auto h = wl::build_bloch(model, tol);
  auto grid = wl::KGrid::square(n1, n2);
  wl::check_cs(h, grid, tol);
  auto window = parse_bands(opt.bands, h.size());
  auto p = wl::spectral_projection(h, window, grid, tol);

  // energy window for the patch projector: everything below the middle of
  // the bulk gap above the selected bands
  double sel_max = -1e300, other_min = 1e300, spec_min = 1e300;
  for (int i = 0; i <= grid.n1; ++i)
    for (int j = 0; j <= grid.n2; ++j) {
      Eigen::SelfAdjointEigenSolver<wl::Mat> es(h(grid.node(i, j)));
      auto idx = window.resolve(es.eigenvalues());
      std::vector<bool> in(h.size(), false);
      for (int b : idx) in[b] = true;
      for (int b = 0; b < h.size(); ++b) {
        spec_min = std::min(spec_min, es.eigenvalues()(b));
        (in[b] ? sel_max : other_min) =
            in[b] ? std::max(sel_max, es.eigenvalues()(b)) : std::min(other_min, es.eigenvalues()(b));
      }
    }
  // erf smoothing sized from the clearance between the upper window edge and
  // the bulk spectrum; the lower edge is pushed far enough below the spectrum
  // that its own tail cannot bite
  const double win_hi = 0.5 * (sel_max + other_min);
  const double smoothing = std::max(1e-3, (win_hi - sel_max) / 6.0);
  const double win_lo = spec_min - std::max(1.0, 8.0 * smoothing);

  auto frame = wl::frame_2d(p, wl::TransportMode::magnus, tol);
  auto bulk = wl::wannier_transform(frame, bulk_box);
  auto patch = wl::build_patch(model, patch_cells);
  auto w0 = wl::zero_field_basis(patch, bulk, win_lo, win_hi, tol);

  wl::MagneticConfig cfg;
  std::vector<double> bs;
  {
    std::stringstream ss(blist);
    std::string tok;
    while (std::getline(ss, tok, ',')) bs.push_back(std::stod(tok));
  }
  if (bs.empty()) throw wl::Error("cli", "empty --b list");
  auto dir = prep_out(opt.out);

  std::vector<wl::SweepPoint> pts;
  std::vector<std::array<int, 2>> eval_cells{{0, 0}, {1, 0}, {0, 1}, {-1, -1}};
  int fileidx = 0;
  for (double b : bs) {
    if (std::abs(b) > tol.b_max)
      throw wl::Error("cli", "b exceeds the configured b_max " + std::to_string(tol.b_max));
    auto res = wl::magnetic_transfer(w0, cfg, b, win_lo, win_hi, eval_cells, tol, smoothing);
    wl::SweepPoint pt;
    pt.b = b;
    pt.pi_p_distance = res.pi_p_distance;
    double worst = 0;
    for (int c = 0; c < res.xi.cols(); ++c)
      worst = std::max(worst, (res.xi.col(c) - res.dressed.col(c)).norm());
    pt.xi_defect = worst;
    pt.gram_min_eig_bound = res.gram_min_eig_bound;
    pts.push_back(pt);
    wl::write_basis_csv(res, patch, (dir / ("basis_b" + std::to_string(fileidx++) + ".csv")).string());
  }
  auto fit_slope = [&](auto get) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& pt : pts) {
      const double x = std::log(std::abs(pt.b)), y = std::log(std::max(get(pt), 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = double(pts.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  double slope_pi = pts.size() > 1 ? fit_slope([](const wl::SweepPoint& p2) { return p2.pi_p_distance; }) : 0;
  double slope_xi = pts.size() > 1 ? fit_slope([](const wl::SweepPoint& p2) { return p2.xi_defect; }) : 0;
  wl::write_sweep_report(pts, slope_pi, slope_xi, (dir / "sweep.json").string());

  auto cov = wl::covariance_checks(w0, cfg, bs.back(), win_lo, win_hi, margin, tol, smoothing);
  std::ofstream covf((dir / "covariance.json").string());
  covf << "{\n  \"b\": " << wl::format_g17(bs.back())
       << ",\n  \"covariance_residual\": " << wl::format_g17(cov.covariance_residual)
       << ",\n  \"conjugation_residual\": " << wl::format_g17(cov.conjugation_residual)
       << ",\n  \"tolerance\": " << wl::format_g17(tol.mag_trunc) << "\n}\n";
  std::cout << "magnetic: wrote basis_b*.csv, sweep.json, covariance.json to " << dir.string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"composite Wannier frames, logarithms, and magnetic dressing"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string blist = "0.001,0.002,0.004,0.008";
  int patch_cells = 40, margin = 10, bulk_box = 6;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model_path, "model JSON file");
    sub->add_option("--preset", opt.preset,
                    "chain|ssh|rice-mele|ssh2d|trs2d|haldane-topological|haldane-trivial");
    sub->add_option("--v", opt.v, "preset parameter v");
    sub->add_option("--w", opt.w, "preset parameter w");
    sub->add_option("--u", opt.u, "preset parameter u (rice-mele)");
    sub->add_option("--coupling", opt.coupling, "preset parameter coupling (trs2d)");
    sub->add_option("--t1", opt.t1, "preset parameter t1 (haldane)");
    sub->add_option("--t2", opt.t2, "preset parameter t2 (haldane)");
    sub->add_option("--grid", opt.grid, "k-grid nodes per direction, power of two >= 16");
    sub->add_option("--bands,--band", opt.bands, "lower|all|1|1-2|1,2|e:lo:hi");
    sub->add_option("--tol", opt.tol_overrides, "tolerance override name=value")
        ->take_all();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--box", opt.box, "wannier box radius in cells (default 20 in 1d, 10 in 2d)");
  };

  auto* c1 = app.add_subcommand("wannier1d", "1d frame + wannier set");
  add_common(c1);
  auto* c2 = app.add_subcommand("wannier2d", "2d CS frame + wannier set");
  add_common(c2);
  auto* cd = app.add_subcommand("diagnose", "topological oracles only");
  add_common(cd);
  auto* cm = app.add_subcommand("magnetic", "magnetic dressing pipeline");
  add_common(cm);
  cm->add_option("--b", blist, "comma list of magnetic couplings");
  cm->add_option("--patch", patch_cells, "patch cells per side");
  cm->add_option("--margin", margin, "interior margin in cells for the symmetry checks");
  cm->add_option("--bulk-box", bulk_box, "bulk wannier box radius feeding the patch basis");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c1->parsed()) return run_wannier1d(opt);
    if (c2->parsed()) return run_wannier2d(opt);
    if (cd->parsed()) return run_diagnose(opt);
    if (cm->parsed()) return run_magnetic(opt, blist, patch_cells, margin, bulk_box);
  } catch (const wl::Error& e) {
    std::cout << wl::error_json(e) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << "{\n  \"error\": {\n    \"stage\": \"cli\",\n    \"message\": \""
              << e.what() << "\"\n  }\n}\n";
    return 1;
  }
  return 2;
}
