// heom.hpp: hierarchy state over a rectangular lattice of auxiliary 2x2
// operators and the coupled equations of motion for the two-exponential
// decomposition of the Lorentzian correlation function.
#pragma once

#include <vector>

#include "heomgp/algebra.hpp"
#include "heomgp/model.hpp"

namespace heomgp {

struct DivergenceError : Error {
  double tau = 0.0;
  double norm = 0.0;
  DivergenceError(const std::string& msg, double tau_, double norm_)
      : Error(msg), tau(tau_), norm(norm_) {}
};

struct NotConverged : Error {
  using Error::Error;
};

namespace heom {

struct AdoIndex {
  int n1 = 0;
  int n2 = 0;
};

// Damping exponents of the two conjugate exponentials; the real part is the
// unit spectral width, the imaginary parts carry the center frequency with
// opposite signs.
struct NuVector {
  cplx nu1;
  cplx nu2;
};

inline NuVector nu_vector(const ModelParams& p) {
  return {cplx(1.0, -p.Omega), cplx(1.0, p.Omega)};
}

// Flat storage: (depth1+1)*(depth2+1) matrices of 4 complex entries each,
// physical state at lattice site (0,0). tau rides along so a state is a
// self-contained snapshot.
struct HierarchyState {
  int depth1 = 0;
  int depth2 = 0;
  double tau = 0.0;
  Eigen::VectorXcd data;

  int sites() const { return (depth1 + 1) * (depth2 + 1); }
  int flat(int n1, int n2) const { return n1 * (depth2 + 1) + n2; }

  Eigen::Map<Mat2> ado(int n1, int n2) {
    return Eigen::Map<Mat2>(data.data() + 4 * flat(n1, n2));
  }
  Eigen::Map<const Mat2> ado(int n1, int n2) const {
    return Eigen::Map<const Mat2>(data.data() + 4 * flat(n1, n2));
  }
  Eigen::Map<Mat2> physical() { return ado(0, 0); }
  Eigen::Map<const Mat2> physical() const { return ado(0, 0); }
};

// |psi(0)> = cos(theta0/2)|0> + sin(theta0/2)|1> at site (0,0), every
// auxiliary site zero (factorized start against the environment vacuum).
HierarchyState initial_state(const ModelParams& p);

// Time derivative of the full lattice. Up-couplings towards deeper sites are
// dropped at the truncation boundary; down-couplings carry the lattice index
// and half the zero-time correlation amplitude per exponential.
void rhs(const Eigen::VectorXcd& y, double tau, const ModelParams& p, int depth1,
         int depth2, Eigen::VectorXcd& dydt);

// Convenience wrapper matching the state type.
HierarchyState rhs(const HierarchyState& s, const ModelParams& p);

inline double trace_drift(const HierarchyState& s) {
  return std::abs(s.physical().trace().real() - 1.0) +
         std::abs(s.physical().trace().imag());
}

inline constexpr double kDivergenceNorm = 1e6;

// Largest entry magnitude across the lattice; used by the divergence sentinel.
inline double max_abs(const HierarchyState& s) {
  return s.data.cwiseAbs().maxCoeff();
}

struct ConvergenceEntry {
  int depth1 = 0;
  int depth2 = 0;
  double max_dist_prev = 0.0;  // max-over-samples Frobenius distance to previous depth
  double min_eig = 0.0;        // most negative physical-state eigenvalue seen
};

struct ConvergenceReport {
  std::vector<ConvergenceEntry> entries;
  bool converged = false;
  int converged_at1 = -1;
  int converged_at2 = -1;
  double threshold = 1e-6;
};

// Evolves the same run at each requested depth and compares physical-state
// snapshots between consecutive depths on the shared sample grid.
ConvergenceReport convergence_scan(const ModelParams& p,
                                   const std::vector<AdoIndex>& depths,
                                   double threshold = 1e-6);

}  // namespace heom
}  // namespace heomgp
