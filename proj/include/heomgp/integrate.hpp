// integrate.hpp: fixed-step classical fourth-order Runge-Kutta on flat
// complex vectors, plus the sampled trajectory of the physical state.
#pragma once

#include <functional>
#include <vector>

#include "heomgp/algebra.hpp"
#include "heomgp/heom.hpp"
#include "heomgp/model.hpp"

namespace heomgp {
namespace integrate {

// One RK4 step of y' = f(y, tau). Workspace is caller-owned so the evolve
// loop never allocates; all reductions are fixed-order for determinism.
template <typename F>
void rk4_step_inplace(const F& f, Eigen::VectorXcd& y, double tau, double dt,
                      Eigen::VectorXcd& k1, Eigen::VectorXcd& k2,
                      Eigen::VectorXcd& k3, Eigen::VectorXcd& k4,
                      Eigen::VectorXcd& scratch) {
  f(y, tau, k1);
  scratch = y + (0.5 * dt) * k1;
  f(scratch, tau + 0.5 * dt, k2);
  scratch = y + (0.5 * dt) * k2;
  f(scratch, tau + 0.5 * dt, k3);
  scratch = y + dt * k3;
  f(scratch, tau + dt, k4);
  y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Single-step API over the hierarchy state; allocates its own workspace.
heom::HierarchyState rk4_step(const heom::HierarchyState& s, double tau, double dt,
                              const ModelParams& p);

struct Sample {
  double tau = 0.0;
  Mat2 rho;         // physical-state snapshot
  double x = 0.0;   // Bloch components
  double y = 0.0;
  double z = 0.0;
  double R = 0.0;   // Bloch norm
  double rho11 = 0.0;  // excited population (top-left entry)
  cplx rho12;          // coherence (top-right entry)
  double trace_drift = 0.0;
  double herm_defect = 0.0;
};

// Derives every Sample field from the snapshot; all trajectory producers
// share it so rows are comparable bit for bit.
Sample make_sample(double tau, const Mat2& rho);

struct Trajectory {
  std::vector<Sample> samples;  // strictly increasing, uniformly spaced tau
  double sample_dt = 0.0;
  int samples_per_cycle = 0;
  double cycle_period = 0.0;
};

struct EvolveResult {
  Trajectory traj;
  heom::HierarchyState final_state;
};

// Integrates the hierarchy over [0, cycles * period], recording the physical
// state at samples_per_cycle points per cycle. Sample times are exact step
// multiples; nothing is interpolated. Throws DivergenceError if the lattice
// norm passes the sentinel.
EvolveResult evolve(const ModelParams& p);

}  // namespace integrate
}  // namespace heomgp
