// integrate.cpp: hierarchy evolution loop with sample recording.
#include "heomgp/integrate.hpp"

#include <cmath>

#include "heomgp/observables.hpp"

namespace heomgp {
namespace integrate {

Sample make_sample(double tau, const Mat2& rho) {
  Sample s;
  s.tau = tau;
  s.rho = rho;
  const auto b = observables::bloch(rho);
  s.x = b.x;
  s.y = b.y;
  s.z = b.z;
  s.R = std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z);
  s.rho11 = rho(0, 0).real();
  s.rho12 = rho(0, 1);
  s.trace_drift = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  s.herm_defect = algebra::hermiticity_defect(rho);
  return s;
}

heom::HierarchyState rk4_step(const heom::HierarchyState& s, double tau, double dt,
                              const ModelParams& p) {
  heom::HierarchyState out = s;
  const auto n = s.data.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), scratch(n);
  auto f = [&](const Eigen::VectorXcd& y, double t, Eigen::VectorXcd& dydt) {
    heom::rhs(y, t, p, s.depth1, s.depth2, dydt);
  };
  rk4_step_inplace(f, out.data, tau, dt, k1, k2, k3, k4, scratch);
  out.tau = tau + dt;
  return out;
}

EvolveResult evolve(const ModelParams& p) {
  model::validate(p);
  const auto plan = model::step_plan(p);

  heom::HierarchyState s = heom::initial_state(p);
  const int total_samples = p.cycles * p.samples_per_cycle;

  EvolveResult res;
  res.traj.sample_dt = plan.sample_dt;
  res.traj.samples_per_cycle = p.samples_per_cycle;
  res.traj.cycle_period = model::cycle_period(p);
  res.traj.samples.reserve(total_samples + 1);
  res.traj.samples.push_back(make_sample(0.0, s.physical()));

  const auto n = s.data.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), scratch(n);
  auto f = [&](const Eigen::VectorXcd& y, double t, Eigen::VectorXcd& dydt) {
    heom::rhs(y, t, p, s.depth1, s.depth2, dydt);
  };

  long step = 0;
  for (int sample = 1; sample <= total_samples; ++sample) {
    for (int sub = 0; sub < plan.substeps; ++sub) {
      rk4_step_inplace(f, s.data, step * plan.dt, plan.dt, k1, k2, k3, k4, scratch);
      ++step;
      const double m = heom::max_abs(s);
      if (!(m <= heom::kDivergenceNorm)) {
        throw DivergenceError(
            "hierarchy diverged: reduce dt or raise depth", step * plan.dt, m);
      }
    }
    s.tau = sample * plan.sample_dt;
    res.traj.samples.push_back(make_sample(s.tau, s.physical()));
  }

  res.final_state = std::move(s);
  return res;
}

}  // namespace integrate
}  // namespace heomgp
