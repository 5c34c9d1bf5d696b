// oracle.cpp: damped-mode cross-check. The qubit is wired to a single
// lossy oscillator whose free correlation exp(-i Omega tau - tau) matches the
// environment kernel, so the reduced qubit dynamics must agree with the
// hierarchy to the accuracy of both integrations.
#include "heomgp/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace heomgp {
namespace oracle {

namespace {

// Joint qubit+mode generator acting on the flattened density matrix,
// row index i = q * n + k (qubit level q, Fock level k), column-major.
struct Joint {
  int n = 0;
  int dim = 0;
  ModelParams p;
  Eigen::MatrixXcd Hs;     // mode energy + coupling (drive-independent part)
  Eigen::VectorXcd pexc;   // diagonal of the excited-qubit projector
  Eigen::MatrixXcd A, Ad;  // mode lowering / raising on the joint space
  Eigen::VectorXcd nocc;   // diagonal of Ad * A

  Joint(const ModelParams& mp, int levels) : n(levels), dim(2 * levels), p(mp) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));

    A = Eigen::MatrixXcd::Zero(dim, dim);
    A.topLeftCorner(n, n) = a;
    A.bottomRightCorner(n, n) = a;
    Ad = A.adjoint();
    nocc = (Ad * A).diagonal();

    const double g = std::sqrt(0.5 * p.gamma0);
    const Eigen::MatrixXcd x = a + a.adjoint();
    Hs = Eigen::MatrixXcd::Zero(dim, dim);
    for (int q = 0; q < 2; ++q)
      for (int k = 0; k < n; ++k) Hs(q * n + k, q * n + k) = p.Omega * k;
    Hs.block(0, n, n, n) = g * x;
    Hs.block(n, 0, n, n) = g * x;

    pexc = Eigen::VectorXcd::Zero(dim);
    for (int k = 0; k < n; ++k) pexc(k) = 1.0;
  }

  // d rho = -i [Hs + omega0(tau) P, rho] + 2 A rho Ad - {Ad A, rho}
  void operator()(const Eigen::VectorXcd& y, double tau, Eigen::VectorXcd& dy) const {
    Eigen::Map<const Eigen::MatrixXcd> r(y.data(), dim, dim);
    Eigen::Map<Eigen::MatrixXcd> d(dy.data(), dim, dim);
    const double w0 = model::omega0(tau, p);
    Eigen::MatrixXcd H = Hs;
    H.diagonal() += w0 * pexc;
    d.noalias() = H * r;
    d.noalias() -= r * H;
    d *= -I_UNIT;
    d.noalias() += 2.0 * (A * (r * Ad));
    d -= nocc.asDiagonal() * r;
    d -= r * nocc.asDiagonal();
  }

  Mat2 reduced(const Eigen::VectorXcd& y) const {
    Eigen::Map<const Eigen::MatrixXcd> r(y.data(), dim, dim);
    Mat2 rho = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < n; ++k) rho(i, j) += r(i * n + k, j * n + k);
    return rho;
  }

  double top_pop(const Eigen::VectorXcd& y) const {
    Eigen::Map<const Eigen::MatrixXcd> r(y.data(), dim, dim);
    return r(n - 1, n - 1).real() + r(2 * n - 1, 2 * n - 1).real();
  }
};

struct JointRun {
  integrate::Trajectory traj;
  double max_top_pop = 0.0;
  double max_trace_drift = 0.0;
  double min_eig = 1.0;
  bool ok = true;
};

JointRun run_joint(const ModelParams& p, int n, double top_tol) {
  Joint sys(p, n);
  const auto plan = model::step_plan(p);

  // internal step: resolve the drive and the fastest retained mode level
  double target = 0.1 / (std::abs(p.Omega) + p.Delta + p.omegaD + 1.0);
  target = std::min(target, 1.0 / (n * (std::abs(p.Omega) + 1.0)));
  const int sub =
      std::max(1, static_cast<int>(std::ceil(plan.sample_dt / target - 1e-12)));
  const double dt = plan.sample_dt / sub;

  JointRun run;
  run.traj.sample_dt = plan.sample_dt;
  run.traj.samples_per_cycle = p.samples_per_cycle;
  run.traj.cycle_period = model::cycle_period(p);

  const int total = p.cycles * p.samples_per_cycle;
  run.traj.samples.reserve(total + 1);

  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(sys.dim * sys.dim);
  {
    Eigen::Map<Eigen::MatrixXcd> r(y.data(), sys.dim, sys.dim);
    const Vec2 psi(std::cos(0.5 * p.theta0), std::sin(0.5 * p.theta0));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i * n, j * n) = psi(i) * std::conj(psi(j));
  }
  auto audit = [&](const Eigen::VectorXcd& v) {
    Eigen::Map<const Eigen::MatrixXcd> r(v.data(), sys.dim, sys.dim);
    run.max_trace_drift = std::max(run.max_trace_drift, std::abs(r.trace() - cplx(1.0, 0.0)));
    const Eigen::MatrixXcd h = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    run.min_eig = std::min(run.min_eig, es.eigenvalues().minCoeff());
  };
  run.traj.samples.push_back(integrate::make_sample(0.0, sys.reduced(y)));
  run.max_top_pop = sys.top_pop(y);
  audit(y);

  const auto len = y.size();
  Eigen::VectorXcd k1(len), k2(len), k3(len), k4(len), scratch(len);
  for (int sample = 1; sample <= total; ++sample) {
    for (int step = 0; step < sub; ++step) {
      const double tau = (sample - 1 + static_cast<double>(step) / sub) * plan.sample_dt;
      integrate::rk4_step_inplace(sys, y, tau, dt, k1, k2, k3, k4, scratch);
      const double m = y.cwiseAbs().maxCoeff();
      if (!(m <= heom::kDivergenceNorm)) {
        throw DivergenceError("mode-resolved evolution diverged", tau + dt, m);
      }
    }
    const double tau = sample * plan.sample_dt;
    run.traj.samples.push_back(integrate::make_sample(tau, sys.reduced(y)));
    run.max_top_pop = std::max(run.max_top_pop, sys.top_pop(y));
    audit(y);
    if (run.max_top_pop >= top_tol) {
      run.ok = false;  // ladder too short; no point finishing this rung
      return run;
    }
  }
  return run;
}

}  // namespace

PseudomodeResult pseudomode_evolve(const PseudomodeParams& pp) {
  model::validate(pp.model);
  if (pp.n_max < 2) throw InvalidParams("pseudomode: need at least two Fock levels");
  int n = pp.n_max;
  for (;;) {
    JointRun run = run_joint(pp.model, n, pp.top_pop_tol);
    if (run.ok)
      return {std::move(run.traj), n, run.max_top_pop, run.max_trace_drift, run.min_eig};
    if (2 * n > pp.n_max_cap) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "pseudomode ladder saturated at %d levels (top population %.3e)", n,
                    run.max_top_pop);
      throw TruncationInsufficient(buf);
    }
    n *= 2;
  }
}

double mode_correlation_selftest(double Omega, double tau_max, int steps) {
  if (!(tau_max > 0.0) || steps < 1)
    throw InvalidParams("mode self-test: need tau_max > 0 and steps >= 1");
  // Regression operator X(0) = a^dag |vac><vac|; its evolution under the bare
  // damped mode stays in the first two levels, the spare rows check leakage.
  const int n = 4;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::MatrixXcd ad = a.adjoint();
  const Eigen::VectorXcd nd = (ad * a).diagonal();

  auto rhs = [&](const Eigen::VectorXcd& y, double, Eigen::VectorXcd& dy) {
    Eigen::Map<const Eigen::MatrixXcd> X(y.data(), n, n);
    Eigen::Map<Eigen::MatrixXcd> d(dy.data(), n, n);
    d.noalias() = nd.asDiagonal() * X;
    d.noalias() -= X * nd.asDiagonal();  // [a^dag a, X], times -i Omega below
    d *= -I_UNIT * Omega;
    d.noalias() += 2.0 * (a * (X * ad));
    d -= nd.asDiagonal() * X;
    d -= X * nd.asDiagonal();
  };

  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n * n);
  y(1) = 1.0;  // column-major (1,0) entry: |1><0|
  Eigen::VectorXcd k1(n * n), k2(n * n), k3(n * n), k4(n * n), scratch(n * n);
  const double dt = tau_max / steps;
  double worst = 0.0;
  for (int m = 1; m <= steps; ++m) {
    integrate::rk4_step_inplace(rhs, y, (m - 1) * dt, dt, k1, k2, k3, k4, scratch);
    Eigen::Map<const Eigen::MatrixXcd> X(y.data(), n, n);
    cplx corr(0.0, 0.0);
    for (int k = 0; k + 1 < n; ++k) corr += std::sqrt(static_cast<double>(k + 1)) * X(k + 1, k);
    const double tau = m * dt;
    const cplx ref = std::exp(cplx(-tau, -Omega * tau));
    worst = std::max(worst, std::abs(corr - ref));
  }
  return worst;
}

double trace_distance(const Mat2& rho, const Mat2& sigma) {
  const Mat2 d = algebra::hermitize(rho - sigma);
  const double mean = 0.5 * d.trace().real();
  const double r =
      std::hypot(0.5 * (d(0, 0).real() - d(1, 1).real()), std::abs(d(0, 1)));
  return 0.5 * (std::abs(mean + r) + std::abs(mean - r));
}

double max_trace_distance(const integrate::Trajectory& a, const integrate::Trajectory& b) {
  if (a.sample_dt != b.sample_dt)
    throw InvalidParams("trace-distance comparison requires a shared sample grid");
  const size_t shared = std::min(a.samples.size(), b.samples.size());
  double worst = 0.0;
  for (size_t i = 0; i < shared; ++i)
    worst = std::max(worst, trace_distance(a.samples[i].rho, b.samples[i].rho));
  return worst;
}

}  // namespace oracle
}  // namespace heomgp
