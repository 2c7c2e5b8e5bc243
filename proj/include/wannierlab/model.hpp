#pragma once

#include <functional>

#include "wannierlab/common.hpp"
#include "wannierlab/grid.hpp"

namespace wannierlab {

/// One hopping amplitude: <delta_{to,cell} | H | delta_{from,0}>.
/// Hermitian closure (to,from,-cell,conj t) is implied and auto-completed.
struct Hopping {
  int from = 0;
  int to = 0;
  std::array<int, 2> cell{0, 0};
  cxd t{0, 0};
};

struct TightBindingModel {
  int dim = 1;
  std::vector<std::array<double, 2>> sites;  // fractional positions in [0,1)^d
  std::vector<Hopping> hoppings;
  std::string name = "model";

  int num_sites() const { return int(sites.size()); }
  int decay_radius() const;
  void validate() const;
};

/// k -> h(k), the Bloch fiber of the model: exactly Z^d-periodic, Hermitian.
class BlochSampler {
 public:
  BlochSampler() = default;
  BlochSampler(int dim, int d, std::function<Mat(KVec)> eval)
      : dim_(dim), d_(d), eval_(std::move(eval)) {}

  Mat operator()(KVec k) const { return eval_(k); }
  Mat at1(double k) const { return eval_({k, 0.0}); }
  int dim() const { return dim_; }
  int size() const { return d_; }
  CsState cs_flag() const { return cs_; }
  void set_cs(CsState s) { cs_ = s; }

 private:
  int dim_ = 1;
  int d_ = 0;
  std::function<Mat(KVec)> eval_;
  CsState cs_ = CsState::unknown;
};

/// h(k) = sum_gamma e^{2 pi i k.gamma} H0(.,gamma;.,0) with the Hermitian
/// closure applied; throws on an explicitly conflicting conjugate entry.
BlochSampler build_bloch(const TightBindingModel& model, const Tolerances& tol = {});

/// Canonical matrix elements H0(to,gamma;from,0) with the Hermitian closure
/// applied, one entry per (to,from,gamma); throws on conflicting conjugates.
std::vector<Hopping> hermitian_closure(const TightBindingModel& model, double tol = 1e-10);

/// max_k ||h(k)^T - h(-k)|| over the symmetric grid vs tol.cs; sets the flag.
CsState check_cs(BlochSampler& h, const KGrid& grid, const Tolerances& tol = {});

// ---- named presets (fixtures for the acceptance suite) ----
TightBindingModel preset_chain(double t = 1.0);
TightBindingModel preset_ssh(double v, double w);
TightBindingModel preset_rice_mele(double v, double w, double u);
// two decoupled SSH chains, one along each axis (D=4, N=2 composite)
TightBindingModel preset_ssh2d(double v, double w);
// same with a real inter-chain coupling (still CS)
TightBindingModel preset_trs2d(double v, double w, double coupling);
TightBindingModel preset_haldane(double t1, double t2, double phi, double m);
// named lookup used by the CLI: "chain", "ssh", "rice-mele", "ssh2d",
// "trs2d", "haldane-topological", "haldane-trivial"
TightBindingModel preset_by_name(const std::string& name,
                                 const std::vector<std::pair<std::string, double>>& params = {});

TightBindingModel model_from_json(const std::string& text);
std::string model_to_json(const TightBindingModel& model);

}  // namespace wannierlab
