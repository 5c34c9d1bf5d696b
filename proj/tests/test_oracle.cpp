#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "heomgp/heom.hpp"
#include "heomgp/integrate.hpp"
#include "heomgp/observables.hpp"
#include "heomgp/oracle.hpp"

using namespace heomgp;

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 density(double r00, cplx r01) {
  Mat2 m;
  m << cplx(r00, 0.0), r01, std::conj(r01), cplx(1.0 - r00, 0.0);
  return m;
}

}  // namespace

TEST_CASE("bare damped mode reproduces its closed-form correlation") {
  CHECK(oracle::mode_correlation_selftest(20.0, 3.0, 30000) < 1e-8);
  CHECK(oracle::mode_correlation_selftest(5.0, 2.0, 20000) < 1e-8);
  CHECK_THROWS_AS(oracle::mode_correlation_selftest(20.0, 0.0, 100), InvalidParams);
  CHECK_THROWS_AS(oracle::mode_correlation_selftest(20.0, 1.0, 0), InvalidParams);
}

TEST_CASE("trace distance matches hand values and is symmetric") {
  const Mat2 exc = density(1.0, cplx(0.0, 0.0));
  const Mat2 gnd = density(0.0, cplx(0.0, 0.0));
  const Mat2 plus = density(0.5, cplx(0.5, 0.0));
  const Mat2 mixed = 0.5 * Mat2::Identity();

  CHECK(oracle::trace_distance(exc, exc) == 0.0);
  CHECK(oracle::trace_distance(exc, gnd) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle::trace_distance(plus, mixed) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(oracle::trace_distance(plus, gnd) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  CHECK(oracle::trace_distance(plus, exc) == oracle::trace_distance(exc, plus));

  // against the closed form: half the Euclidean gap between the two spin
  // expectation vectors
  auto from_vec = [](double x, double y, double z) {
    Mat2 m;
    m << cplx(0.5 * (1.0 + z), 0.0), cplx(0.5 * x, -0.5 * y), cplx(0.5 * x, 0.5 * y),
        cplx(0.5 * (1.0 - z), 0.0);
    return m;
  };
  for (int i = 0; i < 50; ++i) {
    const double s = i / 49.0;
    const double ax = 0.9 * std::sin(2.1 * s) * std::cos(0.8 * s);
    const double ay = 0.9 * std::sin(2.1 * s) * std::sin(0.8 * s);
    const double az = 0.9 * std::cos(2.1 * s);
    const double bx = 0.7 * std::sin(1.4 * s + 0.3);
    const double by = 0.0;
    const double bz = 0.7 * std::cos(1.4 * s + 0.3);
    const double want =
        0.5 * std::sqrt((ax - bx) * (ax - bx) + (ay - by) * (ay - by) +
                        (az - bz) * (az - bz));
    const double got = oracle::trace_distance(from_vec(ax, ay, az), from_vec(bx, by, bz));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0 + 1e-12);
  }
}

TEST_CASE("trajectory comparison requires a shared grid and scans the prefix") {
  integrate::Trajectory a, b;
  a.sample_dt = 0.1;
  b.sample_dt = 0.2;
  a.samples.push_back(integrate::make_sample(0.0, density(1.0, cplx())));
  b.samples.push_back(integrate::make_sample(0.0, density(1.0, cplx())));
  CHECK_THROWS_AS(oracle::max_trace_distance(a, b), InvalidParams);

  b.sample_dt = 0.1;
  b.samples.push_back(integrate::make_sample(0.1, density(0.0, cplx())));
  a.samples.push_back(integrate::make_sample(0.1, density(1.0, cplx())));
  a.samples.push_back(integrate::make_sample(0.2, density(0.5, cplx())));
  // only the two shared samples count; the second differs by distance 1
  CHECK(oracle::max_trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle::max_trace_distance(a, a) == 0.0);
}

TEST_CASE("joint-space audit stays trace-true and positive under strong driving") {
  ModelParams p;
  p.gamma0 = 1.0;
  p.Delta = 7.0;
  p.omegaD = 4.0;
  p.cycles = 2;
  oracle::PseudomodeParams pp;
  pp.model = p;
  const auto res = oracle::pseudomode_evolve(pp);
  CHECK(res.n_max_used == 8);
  CHECK(res.max_top_pop < 1e-8);
  CHECK(res.max_joint_trace_drift < 1e-9);
  CHECK(res.min_joint_eig >= -1e-6);
  CHECK(res.traj.samples.size() == size_t(2 * p.samples_per_cycle + 1));
}

TEST_CASE("decoupled runs agree between lattice and mode routes to solver accuracy") {
  ModelParams p;
  p.gamma0 = 0.0;
  p.Delta = 7.0;
  p.omegaD = 4.0;
  p.cycles = 1;
  p.depth1 = 2;
  p.depth2 = 2;
  p.samples_per_cycle = 128;
  const auto lattice = integrate::evolve(p).traj;
  oracle::PseudomodeParams pp;
  pp.model = p;
  pp.n_max = 2;
  const auto mode = oracle::pseudomode_evolve(pp);
  CHECK(oracle::max_trace_distance(lattice, mode.traj) < 1e-9);
}

TEST_CASE("overdamped ripple revivals survive the independent route") {
  // four shallow purity revivals ride on the monotone envelope here; both
  // integrations must agree on the count at the shipping prominence
  ModelParams p;
  p.gamma0 = 0.3;
  const auto lattice = integrate::evolve(p).traj;
  oracle::PseudomodeParams pp;
  pp.model = p;
  const auto mode = oracle::pseudomode_evolve(pp);
  CHECK(oracle::max_trace_distance(lattice, mode.traj) < 1e-3);
  const int n_lattice = observables::revival_count(lattice, 1e-3);
  const int n_mode = observables::revival_count(mode.traj, 1e-3);
  CHECK(n_lattice == n_mode);
  CHECK(n_lattice == 4);
}

TEST_CASE("too short a ladder is reported, a free cap escalates past it") {
  ModelParams p;
  p.gamma0 = 1.0;
  p.Delta = 7.0;
  p.omegaD = 4.0;
  p.cycles = 1;
  p.samples_per_cycle = 64;

  oracle::PseudomodeParams capped;
  capped.model = p;
  capped.n_max = 2;
  capped.n_max_cap = 2;
  CHECK_THROWS_AS(oracle::pseudomode_evolve(capped), TruncationInsufficient);

  oracle::PseudomodeParams free_cap;
  free_cap.model = p;
  free_cap.n_max = 2;
  const auto res = oracle::pseudomode_evolve(free_cap);
  CHECK(res.n_max_used > 2);
  CHECK(res.n_max_used <= 64);
  CHECK(res.max_top_pop < free_cap.top_pop_tol);
}

TEST_CASE("mode route validates its inputs") {
  oracle::PseudomodeParams pp;
  pp.model.gamma0 = -0.5;
  CHECK_THROWS_AS(oracle::pseudomode_evolve(pp), InvalidParams);
  pp.model.gamma0 = 0.1;
  pp.n_max = 1;
  CHECK_THROWS_AS(oracle::pseudomode_evolve(pp), InvalidParams);
}
