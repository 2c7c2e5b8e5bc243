#pragma once

#include <string>

#include "wannierlab/diagnostics.hpp"
#include "wannierlab/frame.hpp"
#include "wannierlab/magnetic.hpp"
#include "wannierlab/wannier.hpp"

namespace wannierlab {

// All emitters use fixed 17-significant-digit scientific formatting so that
// repeated runs with the same config produce byte-identical files.

std::string format_g17(double x);

/// Frame file: text CSV with a header (d, D, N, grid dims) followed by
/// row-major (re, im) pairs, one grid node per line.
void write_frame(const BlochFrame& frame, const std::string& path);
BlochFrame read_frame(const std::string& path);

/// WannierSet CSV: columns j, gamma1[, gamma2], site, re, im.
void write_wannier_csv(const WannierSet& w, const std::string& path);

/// DecayReport JSON, tolerances included.
void write_decay_report(const DecayReport& rep, double tau_w, const std::string& path);

/// TopologyReport JSON.
void write_topology_report(const TopologyReport& rep, const std::string& path);

/// magnetic basis CSV: columns j, gamma1, gamma2, site-x, site-y, re, im
void write_basis_csv(const TransferResult& res, const LatticePatch& patch,
                     const std::string& path);

struct SweepPoint {
  double b = 0;
  double pi_p_distance = 0;
  double xi_defect = 0;
  double gram_min_eig_bound = 0;
};

/// magnetic sweep JSON with fitted log-log slopes
void write_sweep_report(const std::vector<SweepPoint>& pts, double slope_pi, double slope_xi,
                        const std::string& path);

/// machine-readable error JSON for the CLI
std::string error_json(const Error& err);

/// unilog branch diagnostic CSV: columns k, j, arg lambda_j(k)
void write_branches_csv(const UnitaryFamily& beta, const std::string& path);

}  // namespace wannierlab
