// model.hpp: physical parameter set, driven qubit Hamiltonian, and the
// Lorentzian environment in dimensionless units (time in units of the
// inverse spectral width; every frequency divided by the width).
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "heomgp/algebra.hpp"

namespace heomgp {

struct InvalidParams : Error {
  using Error::Error;
};

enum class PeriodPolicy { Omega, OmegaPlusDelta };

struct ModelParams {
  double Omega = 20.0;    // qubit gap = center of the Lorentzian
  double Delta = 0.0;     // drive amplitude, >= 0
  double omegaD = 0.0;    // drive frequency, >= 0
  double gamma0 = 0.01;   // coupling-to-width ratio; > 0 except for the decoupled limit
  double theta0 = std::numbers::pi / 4;  // initial Bloch polar angle in [0, pi]
  int cycles = 15;
  int depth1 = 25;        // hierarchy truncation, first exponential
  int depth2 = 25;        // hierarchy truncation, second exponential
  double dt = 0.0;        // integrator step; 0 selects the automatic rule
  int samples_per_cycle = 256;  // must be even so stride-2 refinement lands on samples
  PeriodPolicy period_policy = PeriodPolicy::Omega;
};

namespace model {

inline void validate(const ModelParams& p) {
  auto fail = [](const std::string& msg) { throw InvalidParams("ModelParams: " + msg); };
  if (!(p.Delta >= 0.0)) fail("Delta must be >= 0");
  if (!(p.omegaD >= 0.0)) fail("omegaD must be >= 0");
  if (!(p.gamma0 >= 0.0)) fail("gamma0 must be >= 0");
  if (!(p.theta0 >= 0.0 && p.theta0 <= std::numbers::pi)) fail("theta0 must lie in [0, pi]");
  if (p.cycles < 1) fail("cycles must be >= 1");
  if (p.depth1 < 1 || p.depth2 < 1) fail("depth must be >= 1 in each index");
  if (!(p.dt >= 0.0)) fail("dt must be >= 0 (0 = automatic)");
  if (p.samples_per_cycle < 8 || p.samples_per_cycle % 2 != 0)
    fail("samples_per_cycle must be even and >= 8");
  const double base =
      p.period_policy == PeriodPolicy::Omega ? p.Omega : p.Omega + p.Delta;
  if (!(base > 0.0)) fail("cycle frequency must be positive under the chosen period policy");
}

// Instantaneous qubit frequency: constant gap plus cosine drive.
inline double omega0(double tau, const ModelParams& p) {
  return p.Omega + p.Delta * std::cos(p.omegaD * tau);
}

// H(tau) = omega0(tau) |0><0|. Diagonal in the energy basis at all times;
// the drive modulates the gap, not the axis.
inline Mat2 hamiltonian(double tau, const ModelParams& p) {
  Mat2 h = Mat2::Zero();
  h(0, 0) = omega0(tau, p);
  return h;
}

// Lorentzian spectral density centered on the qubit gap, unit half-width.
inline double spectral_density(double omega, const ModelParams& p) {
  const double d = omega - p.Omega;
  return (p.gamma0 / (2.0 * std::numbers::pi)) / (d * d + 1.0);
}

// Zero-temperature environment correlation: single decaying exponential.
// The phase runs with signed tau so that C(-tau) is the conjugate of C(tau).
inline cplx correlation(double tau, const ModelParams& p) {
  return 0.5 * p.gamma0 * std::exp(-std::abs(tau)) *
         std::exp(cplx(0.0, -p.Omega * tau));
}

// Bath memory is ~1 in these units; relaxation takes ~1/gamma0.
inline bool markovian(const ModelParams& p) { return p.gamma0 < 1.0; }

inline double cycle_period(const ModelParams& p) {
  const double base =
      p.period_policy == PeriodPolicy::Omega ? p.Omega : p.Omega + p.Delta;
  return 2.0 * std::numbers::pi / base;
}

// Step-size rule: resolve the fastest coherent scale and the dissipative
// scale, then clamp by the hierarchy stiffness which grows with both depth
// and detuning of the auxiliary damping exponents.
inline double auto_dt(const ModelParams& p) {
  double dt = 0.1 / (std::abs(p.Omega) + p.Delta + p.omegaD);
  if (p.gamma0 > 0.0) dt = std::min(dt, 0.02 / p.gamma0);
  const double levels = static_cast<double>(p.depth1 + p.depth2);
  dt = std::min(dt, 0.5 / (levels * (1.0 + std::abs(p.Omega))));
  return dt;
}

// Actual step: largest value <= the target that divides the sample spacing,
// so every sample time is hit exactly by an integer number of steps.
struct StepPlan {
  double dt = 0.0;
  int substeps = 1;       // integrator steps per sample
  double sample_dt = 0.0; // cycle_period / samples_per_cycle
};

inline StepPlan step_plan(const ModelParams& p) {
  StepPlan plan;
  plan.sample_dt = cycle_period(p) / p.samples_per_cycle;
  const double target = p.dt > 0.0 ? p.dt : auto_dt(p);
  plan.substeps = std::max(1, static_cast<int>(std::ceil(plan.sample_dt / target - 1e-12)));
  plan.dt = plan.sample_dt / plan.substeps;
  return plan;
}

}  // namespace model
}  // namespace heomgp
