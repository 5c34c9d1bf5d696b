// observables.hpp: Bloch projections, purity-loss revivals, and the
// single-function structural check for undriven dissipative evolution.
#pragma once

#include <cmath>
#include <vector>

#include "heomgp/algebra.hpp"
#include "heomgp/integrate.hpp"

namespace heomgp {

struct PreconditionViolated : Error {
  using Error::Error;
};

namespace observables {

struct Bloch {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Bloch bloch(const Mat2& rho) {
  Bloch b;
  b.x = 2.0 * rho(0, 1).real();
  b.y = -2.0 * rho(0, 1).imag();
  b.z = rho(0, 0).real() - rho(1, 1).real();
  return b;
}

inline double bloch_norm(const Mat2& rho) {
  const Bloch b = bloch(rho);
  return std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z);
}

// Interior local maxima of a series counted by topographic prominence: a
// peak's base is the higher of the two valley minima separating it from the
// nearest higher ground (or the series edge) on each side.
int count_peaks(const std::vector<double>& r, double prominence);

inline constexpr double kDefaultProminence = 1e-3;

inline int revival_count(const integrate::Trajectory& traj,
                         double prominence = kDefaultProminence) {
  std::vector<double> r;
  r.reserve(traj.samples.size());
  for (const auto& s : traj.samples) r.push_back(s.R);
  return count_peaks(r, prominence);
}

// Max over samples of | |rho12/rho12(0)|^2 - rho11/rho11(0) |. Zero exactly
// when populations and coherences decay through one common envelope; a
// diagnostic away from weak coupling.
double g_form_check(const integrate::Trajectory& traj);

}  // namespace observables
}  // namespace heomgp
