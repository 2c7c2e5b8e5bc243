// python bindings: numpy-friendly wrappers over the core pipelines

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/linalg.hpp"
#include "wannierlab/magnetic.hpp"
#include "wannierlab/wannier.hpp"

namespace py = pybind11;
using namespace wannierlab;

namespace {

using CArr = py::array_t<cxd, py::array::c_style | py::array::forcecast>;

Mat mat_from(const CArr& a, ssize_t i) {
  auto buf = a.unchecked<3>();
  Mat m(buf.shape(1), buf.shape(2));
  for (ssize_t r = 0; r < buf.shape(1); ++r)
    for (ssize_t c = 0; c < buf.shape(2); ++c) m(r, c) = buf(i, r, c);
  return m;
}

py::array family_to_numpy(const std::vector<Mat>& v) {
  const ssize_t n = ssize_t(v.size()), r = v[0].rows(), c = v[0].cols();
  py::array_t<cxd> out({n, r, c});
  auto buf = out.mutable_unchecked<3>();
  for (ssize_t i = 0; i < n; ++i)
    for (ssize_t a = 0; a < r; ++a)
      for (ssize_t b = 0; b < c; ++b) buf(i, a, b) = v[size_t(i)](a, b);
  return out;
}

UnitaryFamily family_from_numpy(const CArr& a, bool cs_prime) {
  auto buf = a.unchecked<3>();
  UnitaryFamily fam;
  fam.n = int(buf.shape(0)) - 1;
  fam.cs_prime = cs_prime;
  fam.values.reserve(buf.shape(0));
  for (ssize_t i = 0; i < buf.shape(0); ++i) fam.values.push_back(mat_from(a, i));
  return fam;
}

TightBindingModel model_from_kwargs(const std::string& preset, py::dict params) {
  std::vector<std::pair<std::string, double>> kv;
  for (auto item : params)
    kv.emplace_back(py::cast<std::string>(item.first), py::cast<double>(item.second));
  return preset_by_name(preset, kv);
}

ProjectionSampler make_sampler(const TightBindingModel& model, int grid_n,
                               const std::vector<int>& bands) {
  auto h = build_bloch(model);
  std::vector<int> idx = bands;
  if (idx.empty())
    for (int i = 0; i < h.size() / 2; ++i) idx.push_back(i);
  if (model.dim == 1) {
    auto grid = KGrid::line(grid_n);
    check_cs(h, grid);
    return spectral_projection(h, SpectralWindow::bands(idx), grid);
  }
  auto grid = KGrid::square(grid_n, grid_n);
  check_cs(h, grid);
  return spectral_projection(h, SpectralWindow::bands(idx), grid);
}

py::dict frame_result(const BlochFrame& f, const ProjectionSampler& p) {
  auto r = f.residuals(p);
  py::dict out;
  out["frame"] = family_to_numpy(f.values);
  out["dim"] = f.grid.dim;
  out["grid"] = f.grid.dim == 1 ? py::object(py::make_tuple(f.grid.n1))
                                : py::object(py::make_tuple(f.grid.n1, f.grid.n2));
  out["cs"] = f.cs == CsState::holds;
  py::dict res;
  res["orthonormality"] = r.orthonormality;
  res["range"] = r.range;
  res["periodicity"] = r.periodicity;
  res["cs"] = r.cs;
  out["residuals"] = res;
  return out;
}

py::dict wannier_result(const WannierSet& w) {
  py::dict out;
  out["dim"] = w.dim;
  out["radius"] = w.radius;
  out["amplitudes"] = family_to_numpy(w.amps);  // box-major (gamma1 [, gamma2])
  out["parseval_defect"] = w.parseval_defect();
  out["max_imag"] = w.max_imag();
  out["center_of_mass"] = w.dim == 1
                              ? py::object(py::float_(w.center_of_mass()))
                              : py::object(py::make_tuple(w.center_of_mass(0), w.center_of_mass(1)));
  auto rep = decay_fit(w);
  py::dict fit;
  fit["alpha"] = rep.per_band[0].alpha;
  fit["log_c"] = rep.per_band[0].log_c;
  fit["residual"] = rep.per_band[0].residual;
  fit["exponential"] = rep.per_band[0].exponential;
  out["decay"] = fit;
  return out;
}

}  // namespace

PYBIND11_MODULE(_wannierlab, m) {
  m.doc() = "smooth periodic conjugation-symmetric Bloch frames, composite "
            "Wannier functions, and their magnetic dressing";

  py::register_exception<Error>(m, "WannierlabError");

  m.def(
      "presets", [] {
        return std::vector<std::string>{"chain", "ssh", "rice-mele", "ssh2d",
                                        "trs2d", "haldane-topological", "haldane-trivial"};
      },
      "names accepted by the preset-based entry points");

  m.def(
      "bloch_matrix",
      [](const std::string& preset, py::dict params, std::vector<double> k) {
        auto h = build_bloch(model_from_kwargs(preset, params));
        KVec kk{k.at(0), k.size() > 1 ? k[1] : 0.0};
        return Mat(h(kk));
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("k"),
      "Bloch fiber h(k) of a named preset");

  m.def(
      "frame1d",
      [](const std::string& preset, py::dict params, int grid, std::vector<int> bands) {
        auto model = model_from_kwargs(preset, params);
        auto p = make_sampler(model, grid, bands);
        return frame_result(frame_1d(p), p);
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("grid") = 256,
      py::arg("bands") = std::vector<int>{},
      "periodic CS frame of the selected bands on [-1/2,1/2]");

  m.def(
      "frame2d",
      [](const std::string& preset, py::dict params, int grid, std::vector<int> bands) {
        auto model = model_from_kwargs(preset, params);
        auto p = make_sampler(model, grid, bands);
        return frame_result(frame_2d(p), p);
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("grid") = 128,
      py::arg("bands") = std::vector<int>{},
      "doubly periodic CS frame (errors with the Chern number when CS fails)");

  m.def(
      "wannier1d",
      [](const std::string& preset, py::dict params, int grid, std::vector<int> bands, int box) {
        auto model = model_from_kwargs(preset, params);
        auto p = make_sampler(model, grid, bands);
        return wannier_result(wannier_transform(frame_1d(p), box));
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("grid") = 256,
      py::arg("bands") = std::vector<int>{}, py::arg("box") = 20);

  m.def(
      "wannier2d",
      [](const std::string& preset, py::dict params, int grid, std::vector<int> bands, int box) {
        auto model = model_from_kwargs(preset, params);
        auto p = make_sampler(model, grid, bands);
        return wannier_result(wannier_transform(frame_2d(p), box));
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("grid") = 128,
      py::arg("bands") = std::vector<int>{}, py::arg("box") = 10);

  m.def(
      "chern_number",
      [](const std::string& preset, py::dict params, int grid, std::vector<int> bands) {
        auto p = make_sampler(model_from_kwargs(preset, params), grid, bands);
        auto c = chern_number(p);
        return py::make_tuple(c.chern, c.residual);
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("grid") = 24,
      py::arg("bands") = std::vector<int>{}, "(chern, residual) by plaquette link variables");

  m.def(
      "berry_phase",
      [](const std::string& preset, py::dict params, std::vector<int> bands, int nodes) {
        auto model = model_from_kwargs(preset, params);
        auto p = make_sampler(model, 16 * ((model.dim == 1) ? 4 : 1), bands);
        return berry_phase(p.slice1(0.0), p.rank(), nodes);
      },
      py::arg("preset"), py::arg("params") = py::dict(), py::arg("bands") = std::vector<int>{},
      py::arg("nodes") = 2048, "total Berry phase of the k1 slice in (-pi, pi]");

  // ---- unitary-family logarithms on raw arrays ----
  m.def(
      "log_noncrossing",
      [](const CArr& beta) {
        return family_to_numpy(log_noncrossing(family_from_numpy(beta, true)).values);
      },
      py::arg("beta"), "h with e^{ih} = beta for per-node nondegenerate families");

  m.def(
      "log_cayley",
      [](const CArr& beta, double phi0) {
        return family_to_numpy(log_cayley(family_from_numpy(beta, true), phi0).values);
      },
      py::arg("beta"), py::arg("phi0"),
      "Cayley-transform logarithm when e^{i phi0} avoids the spectrum");

  m.def(
      "log_analytic_endpoints",
      [](const CArr& beta) {
        return family_to_numpy(log_analytic_endpoints(family_from_numpy(beta, true)).values);
      },
      py::arg("beta"));

  m.def(
      "regularize",
      [](const CArr& beta, double s, double nu) {
        auto res = regularize(family_from_numpy(beta, true), s, nu);
        py::dict out;
        out["family"] = family_to_numpy(res.family.values);
        out["sup_distance"] = res.sup_distance;
        out["endpoint_gap"] = res.endpoint_gap;
        return out;
      },
      py::arg("beta"), py::arg("s") = 0.1, py::arg("nu") = 0.01,
      "analytic surrogate with split endpoint clusters");

  m.def(
      "straighten",
      [](const CArr& beta) {
        auto u = straighten(family_from_numpy(beta, true));
        py::dict out;
        out["h1"] = family_to_numpy(u.h1.values);
        out["h2"] = family_to_numpy(u.h2.values);
        out["s"] = u.s_used;
        out["nu"] = u.nu_used;
        out["boundary_residual"] = u.boundary_residual;
        out["symmetry_residual"] = u.symmetry_residual;
        return out;
      },
      py::arg("beta"),
      "two-step straightening field u(x,k2) = e^{-ix h1} e^{-ix h2} with "
      "u(-1/2)^{-1} beta u(1/2) = Id");

  m.def(
      "peierls_phase",
      [](std::vector<double> x, std::vector<double> xp) {
        MagneticConfig cfg;
        return peierls_phase({x.at(0), x.at(1)}, {xp.at(0), xp.at(1)}, cfg);
      },
      py::arg("x"), py::arg("xp"), "constant-field transverse-gauge line integral");

  m.attr("__version__") = "0.1.0";
}
