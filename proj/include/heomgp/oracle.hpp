// oracle.hpp: independent cross-check: the Lorentzian vacuum environment is
// traded for one damped bosonic mode, and the joint qubit+mode density matrix
// is integrated with the same fixed-step scheme.
#pragma once

#include <vector>

#include "heomgp/algebra.hpp"
#include "heomgp/integrate.hpp"
#include "heomgp/model.hpp"

namespace heomgp {

struct TruncationInsufficient : Error {
  using Error::Error;
};

namespace oracle {

struct PseudomodeParams {
  ModelParams model;
  int n_max = 8;        // Fock levels kept; >= 2
  int n_max_cap = 64;   // escalation ceiling
  double top_pop_tol = 1e-8;  // required headroom at the highest Fock level
};

struct PseudomodeResult {
  integrate::Trajectory traj;   // reduced qubit state per sample
  int n_max_used = 0;
  double max_top_pop = 0.0;     // highest top-Fock population seen
  double max_joint_trace_drift = 0.0;  // |tr rho_joint - 1| over samples
  double min_joint_eig = 1.0;          // most negative joint eigenvalue seen
};

// Joint evolution under H = omega0(tau)|0><0| + Omega a^dag a
//                          + sqrt(gamma0/2) sigma_x (a + a^dag)
// with a mode dissipator whose amplitude decay rate is the unit spectral
// width. Doubles n_max until the top Fock level stays unpopulated; throws
// TruncationInsufficient past the cap.
PseudomodeResult pseudomode_evolve(const PseudomodeParams& pp);

// Mode-only regression check: <a(tau) a^dag(0)> from the dissipative
// evolution of a^dag|vac><vac|; must match exp(-i Omega tau - tau).
// Returns the max deviation over the sampled interval.
double mode_correlation_selftest(double Omega, double tau_max, int steps);

// Half the trace norm of the difference of two qubit states.
double trace_distance(const Mat2& rho, const Mat2& sigma);

// Max over shared samples; trajectories must be on the same sample grid.
double max_trace_distance(const integrate::Trajectory& a, const integrate::Trajectory& b);

}  // namespace oracle
}  // namespace heomgp
