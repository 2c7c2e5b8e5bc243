#include "wannierlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wannierlab/linalg.hpp"

namespace wannierlab {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("io", "cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

void write_frame(const BlochFrame& frame, const std::string& path) {
  auto f = open_out(path);
  f << "# wannierlab frame v1\n";
  f << frame.grid.dim << "," << frame.d << "," << frame.nbands << "," << frame.grid.n1 << ","
    << (frame.grid.dim == 2 ? frame.grid.n2 : 0) << ","
    << (frame.cs == CsState::holds ? 1 : 0) << "\n";
  auto emit = [&](const Mat& m) {
    bool first = true;
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) {
        if (!first) f << ",";
        first = false;
        f << format_g17(m(r, c).real()) << "," << format_g17(m(r, c).imag());
      }
    f << "\n";
  };
  if (frame.grid.dim == 1) {
    for (int i = 0; i <= frame.grid.n1; ++i) emit(frame.at(i));
  } else {
    for (int i = 0; i <= frame.grid.n1; ++i)
      for (int j = 0; j <= frame.grid.n2; ++j) emit(frame.at(i, j));
  }
}

BlochFrame read_frame(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io", "cannot open '" + path + "'");
  std::string line;
  std::getline(f, line);  // banner
  std::getline(f, line);
  int dim, d, nb, n1, n2, cs;
  if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%d,%d", &dim, &d, &nb, &n1, &n2, &cs) != 6)
    throw Error("io", "bad frame header in '" + path + "'");
  BlochFrame frame;
  frame.grid = dim == 1 ? KGrid::line(n1) : KGrid::square(n1, n2);
  frame.d = d;
  frame.nbands = nb;
  frame.cs = cs ? CsState::holds : CsState::unknown;
  frame.provenance = "file:" + path;
  const size_t nodes = dim == 1 ? size_t(n1 + 1) : size_t(n1 + 1) * (n2 + 1);
  frame.values.reserve(nodes);
  for (size_t i = 0; i < nodes; ++i) {
    if (!std::getline(f, line)) throw Error("io", "truncated frame file '" + path + "'");
    std::istringstream ss(line);
    Mat m(d, nb);
    std::string tok;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < nb; ++c) {
        double re, im;
        if (!std::getline(ss, tok, ',')) throw Error("io", "short row in frame file");
        re = std::stod(tok);
        if (!std::getline(ss, tok, ',')) throw Error("io", "short row in frame file");
        im = std::stod(tok);
        m(r, c) = cxd(re, im);
      }
    frame.values.push_back(std::move(m));
  }
  return frame;
}

void write_wannier_csv(const WannierSet& w, const std::string& path) {
  auto f = open_out(path);
  f << (w.dim == 1 ? "j,gamma1,site,re,im\n" : "j,gamma1,gamma2,site,re,im\n");
  for (int j = 0; j < w.nbands; ++j)
    for (int g1 = -w.radius; g1 <= w.radius; ++g1) {
      if (w.dim == 1) {
        for (int s = 0; s < w.d; ++s) {
          cxd v = w.at(g1)(s, j);
          f << j << "," << g1 << "," << s << "," << format_g17(v.real()) << ","
            << format_g17(v.imag()) << "\n";
        }
      } else {
        for (int g2 = -w.radius; g2 <= w.radius; ++g2)
          for (int s = 0; s < w.d; ++s) {
            cxd v = w.at(g1, g2)(s, j);
            f << j << "," << g1 << "," << g2 << "," << s << "," << format_g17(v.real()) << ","
              << format_g17(v.imag()) << "\n";
          }
      }
    }
}

void write_decay_report(const DecayReport& rep, double tau_w, const std::string& path) {
  nlohmann::json j;
  j["tolerance"] = {{"tau_w", tau_w}};
  auto pack = [](const DecayFit& fit) {
    return nlohmann::json{{"alpha", fit.alpha},
                          {"log_c", fit.log_c},
                          {"fit_residual", fit.residual},
                          {"exponential", fit.exponential}};
  };
  j["joint"] = pack(rep.per_band.at(0));
  j["bands"] = nlohmann::json::array();
  for (size_t b = 1; b < rep.per_band.size(); ++b) j["bands"].push_back(pack(rep.per_band[b]));
  open_out(path) << j.dump(2) << "\n";
}

void write_topology_report(const TopologyReport& rep, const std::string& path) {
  nlohmann::json j;
  if (rep.chern) {
    j["chern"] = rep.chern->chern;
    j["chern_residual"] = rep.chern->residual;
    j["reliable"] = rep.chern->residual <= 0.1;
  }
  if (!rep.berry_phases.empty()) j["berry_phases"] = rep.berry_phases;
  if (rep.det_winding) j["det_winding"] = *rep.det_winding;
  open_out(path) << j.dump(2) << "\n";
}

void write_basis_csv(const TransferResult& res, const LatticePatch& patch,
                     const std::string& path) {
  auto f = open_out(path);
  f << "j,gamma1,gamma2,site_x,site_y,re,im\n";
  for (size_t c = 0; c < res.cells.size(); ++c)
    for (int r = 0; r < res.xi.rows(); ++r) {
      cxd v = res.xi(r, int(c));
      if (std::abs(v) < 1e-12) continue;
      auto pos = patch.position(r);
      f << res.bands[c] << "," << res.cells[c][0] << "," << res.cells[c][1] << ","
        << format_g17(pos[0]) << "," << format_g17(pos[1]) << "," << format_g17(v.real()) << ","
        << format_g17(v.imag()) << "\n";
    }
}

void write_sweep_report(const std::vector<SweepPoint>& pts, double slope_pi, double slope_xi,
                        const std::string& path) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : pts)
    j["points"].push_back({{"b", p.b},
                           {"pi_p_distance", p.pi_p_distance},
                           {"xi_defect", p.xi_defect},
                           {"gram_min_eig_bound", p.gram_min_eig_bound}});
  j["fitted_slope_pi_p"] = slope_pi;
  j["fitted_slope_xi"] = slope_xi;
  open_out(path) << j.dump(2) << "\n";
}

std::string error_json(const Error& err) {
  nlohmann::json j;
  j["error"]["stage"] = err.stage();
  j["error"]["message"] = err.what();
  if (err.knode()) {
    if (err.kdim() == 1)
      j["error"]["k"] = {(*err.knode())[0]};
    else
      j["error"]["k"] = {(*err.knode())[0], (*err.knode())[1]};
  }
  if (err.chern) {
    j["error"]["chern"] = *err.chern;
    j["error"]["chern_residual"] = *err.chern_residual;
  }
  return j.dump(2);
}

void write_branches_csv(const UnitaryFamily& beta, const std::string& path) {
  auto f = open_out(path);
  f << "k,j,arg\n";
  for (int i = 0; i <= beta.n; ++i) {
    auto args = principal_args(eig_unitary(beta.values[i]).vals);
    std::sort(args.begin(), args.end());
    for (size_t j = 0; j < args.size(); ++j)
      f << format_g17(beta.node(i)) << "," << j << "," << format_g17(args[j]) << "\n";
  }
}

}  // namespace wannierlab
