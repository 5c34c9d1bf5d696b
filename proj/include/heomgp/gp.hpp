// gp.hpp: accumulated geometric phase of the dominant spectral branch of
// the evolving density matrix, with two independent discretizations and the
// closed-form unitary reference.
#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "heomgp/algebra.hpp"
#include "heomgp/integrate.hpp"

namespace heomgp {

struct DegeneracyEncountered : Error {
  double tau = 0.0;
  DegeneracyEncountered(const std::string& msg, double tau_) : Error(msg), tau(tau_) {}
};

struct OverlapTooSmall : Error {
  double tau = 0.0;
  OverlapTooSmall(const std::string& msg, double tau_) : Error(msg), tau(tau_) {}
};

namespace gp {

inline constexpr double kDegeneracyGap = 1e-8;
inline constexpr double kMinOverlap = 0.9;

// Per-sample spectral data of the trajectory; the raw eigenvector phases are
// whatever the closed-form solver produced. Phase choices cancel in every
// reported quantity, which the seeded re-gauging self-test exercises.
struct EigenSeries {
  std::vector<double> taus;
  std::vector<double> eps1;
  std::vector<double> eps2;
  std::vector<Vec2> v1;
  double cycle_period = 0.0;
  int samples_per_cycle = 0;
};

EigenSeries eigendecompose(const integrate::Trajectory& traj);

// phi_raw is the gauge-invariant kinematic phase (closure overlap against the
// start, minus the discrete connection), unwrapped by continuity; it loses
// 2 pi per cycle of trivial precession winding. phi adds that winding back
// (+2 pi t / cycle_period) so a closed unitary cycle at polar angle theta
// accumulates pi (1 + cos theta), the convention all ratios use.
struct GpSeries {
  std::vector<double> taus;
  double cycle_period = 0.0;
  int samples_per_cycle = 0;
  std::vector<double> phi;         // positive accumulated convention
  std::vector<double> phi_raw;     // invariant series before the winding shear
  std::vector<double> phi_direct_raw;  // explicit-connection route, same convention as phi_raw
  double max_route_gap = 0.0;      // max |phi_raw - phi_direct_raw| over even samples
  double min_gap = 1.0;            // smallest eps1 - eps2 seen
  double min_step_overlap = 1.0;   // smallest adjacent-eigenvector overlap magnitude
  double min_closure_overlap = 1.0;  // smallest |<v(0)|v(t)>| magnitude
  double max_connection_residue = 0.0;  // |Re <v|dv/dt>|, should vanish
  bool direct_route_valid = true;  // false when the closure overlap fell below 1e-2

  bool complete = false;           // false when stopped early
  size_t valid_samples = 0;        // phi defined on [0, valid_samples)
  std::string stop_reason;         // "degeneracy" | "overlap" when incomplete
  double stop_tau = 0.0;
};

// Never throws; stops at the first degeneracy or overlap failure and reports
// how far it got.
GpSeries gp_accumulate_partial(const EigenSeries& es);

// Contract form: throws DegeneracyEncountered / OverlapTooSmall instead of
// returning a truncated series.
GpSeries gp_accumulate(const EigenSeries& es);

inline GpSeries gp_accumulate(const integrate::Trajectory& traj) {
  return gp_accumulate(eigendecompose(traj));
}

// Closed-form reference for pure precession at the undriven gap: each cycle
// contributes pi*(1 + cos(theta0)). The interval ends give trivial paths;
// the formula is still returned there.
inline double unitary_gp(double theta0, int cycles) {
  return cycles * std::numbers::pi * (1.0 + std::cos(theta0));
}

// phi at the last sample of cycle `cycles` over the unitary reference.
double gp_ratio(const GpSeries& series, double theta0, int cycles);

}  // namespace gp
}  // namespace heomgp
