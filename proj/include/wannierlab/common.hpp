#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wannierlab {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// k-point; kv[1] is ignored when dim == 1
using KVec = std::array<double, 2>;

enum class CsState { unknown, holds, fails };

/// Error with enough context for the CLI to emit a machine-readable report:
/// pipeline stage plus, when applicable, the offending k-node.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& msg)
      : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {}
  Error(std::string stage, const std::string& msg, KVec k, int dim)
      : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {
    knode_ = k;
    kdim_ = dim;
  }
  const std::string& stage() const { return stage_; }
  const std::optional<KVec>& knode() const { return knode_; }
  int kdim() const { return kdim_; }

  // attached by the CS gate of frame_2d
  std::optional<int> chern;
  std::optional<double> chern_residual;

 private:
  std::string stage_;
  std::optional<KVec> knode_;
  int kdim_ = 0;
};

struct Tolerances {
  double herm = 1e-10;       // Hermiticity of sampled h(k)
  double cs = 1e-10;         // conjugation-symmetry checks
  double proj = 1e-10;       // P^2=P, P=P\dagger, trace
  double gap = 1e-6;         // minimal admissible spectral gap
  double pd = 1e-12;         // positive-definiteness floor
  double comm = 1e-10;       // commutator checks
  double degen = 1e-6;       // eigenvalue cluster threshold on the circle
  double log = 1e-8;         // ||e^{ih} - beta||
  double match = 0.2;        // branch-assignment ambiguity margin
  double straight = 1e-8;    // straightening boundary contract
  double frame = 1e-6;       // single-stage frame residuals
  double frame2 = 1e-5;      // two-stage (d=2) frame residuals
  double w = 1e-6;           // Wannier-set checks
  double mag_alg = 1e-8;     // magnetic, algebraic identities
  double mag_trunc = 1e-6;   // magnetic, truncation-affected identities
  double b_max = 0.05;
};

inline const double kPi = 3.14159265358979323846;

/// principal argument in (-pi, pi]; the boundary value -pi maps to +pi
inline double principal_arg(cxd z) {
  double a = std::arg(z);
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

/// signed arc distance a-b folded into (-pi, pi]
inline double arc_diff(double a, double b) {
  return principal_arg(std::exp(cxd(0, a - b)));
}

}  // namespace wannierlab
