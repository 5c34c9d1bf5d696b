// acceptance.cpp: end-to-end gate. Each criterion prints one PASS/FAIL line
// with the measured numbers next to the pinned band, and the process exit
// code is the number of failed criteria, so `ctest` stays honest about what
// this build actually reproduces.
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heomgp/gp.hpp"
#include "heomgp/model.hpp"
#include "heomgp/observables.hpp"
#include "heomgp/oracle.hpp"
#include "heomgp/run.hpp"

using namespace heomgp;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void line(int id, bool ok, const std::string& text) {
  std::printf("[%s] %d. %s\n", ok ? "PASS" : "FAIL", id, text.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double ratio_at(const run::RunRecord& rec, int n) {
  return rec.cycle_summaries.at(n - 1).ratio;
}

double phi_at(const run::RunRecord& rec, int n) {
  return rec.cycle_summaries.at(n - 1).phi_unwrapped;
}

}  // namespace

int main() {
  // Shared 15-cycle production runs, one per regime; several criteria read
  // off the same records.
  run::RunRecord rec_weak, rec_strong, rec_frozen, rec_unitary;
  try {
    rec_weak = run::run_single(run::preset_config("fig4"));          // gamma0 = 0.01
    rec_strong = run::run_single(run::preset_config("fig8"));        // gamma0 = 1
    rec_frozen = run::run_single(run::preset_config("fig8-frozen"));  // + drive
    rec_unitary = run::run_single(run::preset_config("fig1-unitary"));
  } catch (const std::exception& e) {
    std::printf("[FAIL] 0. shared regime runs threw: %s\n", e.what());
    return 8;
  }

  // 1. Weak coupling drifts the accumulated phase off the closed-form value
  //    by 2.5 +- 1.0 percent after 5 cycles and 10 +- 2 percent after 15.
  try {
    auto dev = [&](int n) {
      return std::abs(phi_at(rec_weak, n) - rec_weak.cycle_summaries.at(n - 1).phi_unitary) /
             rec_weak.cycle_summaries.at(n - 1).phi_unitary;
    };
    const double d5 = dev(5);
    const double d15 = dev(15);
    const bool ok = d5 >= 0.015 && d5 <= 0.035 && d15 >= 0.08 && d15 <= 0.12;
    line(1, ok,
         fmt("weak-coupling phase deviation: N=5 %.4g%% (band [1.5, 3.5]), "
             "N=15 %.4g%% (band [8, 12])",
             100.0 * d5, 100.0 * d15));
  } catch (const std::exception& e) {
    line(1, false, std::string("threw: ") + e.what());
  }

  // 2. Purity revivals appear only past the overdamped/underdamped boundary:
  //    none for gamma0 <= 0.3, at least one for gamma0 >= 0.7, over 15 cycles.
  try {
    const double gammas[5] = {0.01, 0.1, 0.3, 0.7, 1.0};
    int counts[5] = {0, 0, 0, 0, 0};
    counts[0] = observables::revival_count(rec_weak.traj, 1e-3);
    counts[4] = observables::revival_count(rec_strong.traj, 1e-3);
    for (int i = 1; i <= 3; ++i) {
      run::RunConfig cfg;
      cfg.model.gamma0 = gammas[i];
      counts[i] = observables::revival_count(run::run_single(cfg).traj, 1e-3);
    }
    const bool ok =
        counts[0] == 0 && counts[1] == 0 && counts[2] == 0 && counts[3] >= 1 && counts[4] >= 1;
    line(2, ok,
         fmt("revival counts at prominence 1e-3 for gamma0 {0.01, 0.1, 0.3, 0.7, 1}: "
             "%d %d %d %d %d (want 0 0 0 >=1 >=1)",
             counts[0], counts[1], counts[2], counts[3], counts[4]));
  } catch (const std::exception& e) {
    line(2, false, std::string("threw: ") + e.what());
  }

  // 3. The detuned drive must suppress revivals outright and hold the phase
  //    ratio within 10 percent of the weak-coupling reference through N = 10.
  try {
    const int rev_driven = observables::revival_count(rec_frozen.traj, 1e-3);
    const int rev_plain = observables::revival_count(rec_strong.traj, 1e-3);
    double worst_gap = 0.0;
    int first_break = 0;
    for (int n = 1; n <= 10; ++n) {
      const double rw = ratio_at(rec_weak, n);
      const double gap = std::abs(ratio_at(rec_frozen, n) - rw) / rw;
      worst_gap = std::max(worst_gap, gap);
      if (gap > 0.10 && first_break == 0) first_break = n;
    }
    const bool ok = rev_driven < rev_plain && first_break == 0;
    line(3, ok,
         fmt("drive suppression: revivals driven=%d undriven=%d (want strict <); "
             "ratio gap to weak reference max %.4g%% through N=10 (want <=10%%, first "
             "break N=%d)",
             rev_driven, rev_plain, 100.0 * worst_gap, first_break));
  } catch (const std::exception& e) {
    line(3, false, std::string("threw: ") + e.what());
  }

  // 4. Independent damped-mode integration stays within 1e-3 trace distance
  //    of the hierarchy on the full 3 x 3 regime grid over 5 cycles.
  try {
    const double gammas[3] = {0.01, 0.1, 1.0};
    const double drives[3][2] = {{0.0, 0.0}, {5.0, 5.0}, {7.0, 4.0}};
    double worst = 0.0;
    bool ok = true;
    for (double g : gammas) {
      for (const auto& d : drives) {
        run::RunConfig cfg;
        cfg.mode = run::Mode::OracleCompare;
        cfg.model.gamma0 = g;
        cfg.model.Delta = d[0];
        cfg.model.omegaD = d[1];
        cfg.model.cycles = 5;
        const auto oc = run::run_oracle_compare(cfg);
        ok = ok && oc.status == run::kOk && oc.max_trace_distance < 1e-3;
        worst = std::max(worst, oc.max_trace_distance);
      }
    }
    line(4, ok,
         fmt("hierarchy vs damped-mode trace distance over the 3x3 grid: worst %.3e "
             "(want < 1e-3)",
             worst));
  } catch (const std::exception& e) {
    line(4, false, std::string("threw: ") + e.what());
  }

  // 5. Decoupled limit: every cycle adds pi(1 + cos theta0) within 1e-4 rad
  //    and the purity radius never leaves 1 by more than 1e-9.
  try {
    double worst_phase = 0.0;
    double worst_r = 0.0;
    for (double theta : {kPi / 6.0, kPi / 4.0, kPi / 3.0, kPi / 2.0}) {
      run::RunRecord local;
      const run::RunRecord* rec = &rec_unitary;
      if (theta != rec_unitary.cfg.model.theta0) {
        run::RunConfig cfg = run::preset_config("fig1-unitary");
        cfg.model.theta0 = theta;
        local = run::run_single(cfg);
        rec = &local;
      }
      const double per = kPi * (1.0 + std::cos(theta));
      for (int n = 1; n <= 15; ++n) {
        const double inc = phi_at(*rec, n) - (n > 1 ? phi_at(*rec, n - 1) : 0.0);
        worst_phase = std::max(worst_phase, std::abs(inc - per));
      }
      for (const auto& s : rec->traj.samples)
        worst_r = std::max(worst_r, std::abs(s.R - 1.0));
    }
    const bool ok = worst_phase < 1e-4 && worst_r <= 1e-9;
    line(5, ok,
         fmt("decoupled limit over four tilt angles: per-cycle phase error max %.3e "
             "(want < 1e-4), |R-1| max %.3e (want <= 1e-9)",
             worst_phase, worst_r));
  } catch (const std::exception& e) {
    line(5, false, std::string("threw: ") + e.what());
  }

  // 6. Invariant suite across all four regimes: trace, Hermiticity,
  //    positivity, gauge leakage, route agreement, integrator order, and the
  //    depth-convergence Cauchy gap.
  try {
    const run::RunRecord* recs[4] = {&rec_unitary, &rec_weak, &rec_strong, &rec_frozen};
    double drift = 0.0, herm = 0.0, eig = 0.0, gauge = 0.0, route = 0.0;
    bool route_valid = true;
    for (const auto* r : recs) {
      drift = std::max(drift, r->diag.max_trace_drift);
      herm = std::max(herm, r->diag.max_herm_defect);
      eig = std::min(eig, r->diag.min_eig);
      gauge = std::max(gauge, r->diag.gauge_delta);
      route = std::max(route, r->diag.max_route_gap);
      route_valid = route_valid && r->diag.direct_route_valid;
    }

    // integrator order probe: halving the step twice must shrink the error
    // by close to 2^4 each time
    ModelParams q;
    q.gamma0 = 1.0;
    q.Delta = 7.0;
    q.omegaD = 4.0;
    q.depth1 = q.depth2 = 6;
    q.cycles = 1;
    q.samples_per_cycle = 8;
    const double sample_dt = model::cycle_period(q) / q.samples_per_cycle;
    auto run_at = [&](double dt) {
      ModelParams m = q;
      m.dt = dt;
      return integrate::evolve(m).traj;
    };
    const auto t1 = run_at(sample_dt / 32.0);
    const auto t2 = run_at(sample_dt / 64.0);
    const auto t4 = run_at(sample_dt / 128.0);
    const double order_ratio = oracle::max_trace_distance(t1, t2) /
                               oracle::max_trace_distance(t2, t4);

    // depth Cauchy gap between the two deepest shipped lattices per regime
    double cauchy = 0.0;
    for (const auto* r : recs) {
      ModelParams m = r->cfg.model;
      m.depth1 = m.depth2 = 20;
      cauchy = std::max(cauchy,
                        oracle::max_trace_distance(integrate::evolve(m).traj, r->traj));
    }

    const bool ok = drift < 1e-9 && herm < 1e-9 && eig >= -1e-6 && gauge < 1e-9 &&
                    route_valid && route < 1e-6 && order_ratio >= 12.0 &&
                    order_ratio <= 20.0 && cauchy < 1e-6;
    line(6, ok,
         fmt("invariants: drift %.2e, herm %.2e, min eig %.2e, gauge %.2e, route %.2e "
             "(valid %d), order ratio %.3g (band [12, 20]), depth Cauchy %.2e "
             "(want < 1e-6)",
             drift, herm, eig, gauge, route, route_valid ? 1 : 0, order_ratio, cauchy));
  } catch (const std::exception& e) {
    line(6, false, std::string("threw: ") + e.what());
  }

  // 7. Under the detuned drive the 45 degree tilt should hold its phase ratio
  //    within 5 percent of unity for more consecutive cycles than either
  //    neighbor angle.
  try {
    const double degs[3] = {23.5, 45.0, 73.0};
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      run::RunConfig cfg = run::preset_config("fig8-frozen");
      cfg.model.theta0 = degs[i] * kPi / 180.0;
      const auto rec = run::run_single(cfg);
      for (int n = 1; n <= 15; ++n) {
        const size_t idx = static_cast<size_t>(n - 1);
        if (idx >= rec.cycle_summaries.size()) break;
        if (std::abs(rec.cycle_summaries[idx].ratio - 1.0) > 0.05) break;
        counts[i] = n;
      }
    }
    const bool ok = counts[1] > counts[0] && counts[1] > counts[2];
    line(7, ok,
         fmt("consecutive cycles with ratio within 5%% of 1 at {23.5, 45, 73} deg: "
             "%d %d %d (want middle strictly largest)",
             counts[0], counts[1], counts[2]));
  } catch (const std::exception& e) {
    line(7, false, std::string("threw: ") + e.what());
  }

  // 8. Regenerate both 17 x 17 ratio maps for N in {2, 3, 4, 5, 8}; on the
  //    weak-coupling map the near-unity region at N=8 must be a strict subset
  //    of the region at N=4.
  try {
    const auto sw7 = run::run_sweep(run::preset_config("fig7"));
    const auto sw10 = run::run_sweep(run::preset_config("fig10"));
    const size_t want_rows = 17u * 17u * 5u;
    const bool grids_ok = sw7.rows.size() == want_rows && sw10.rows.size() == want_rows;

    constexpr double kNearUnityBand = 0.05;
    std::set<std::pair<double, double>> s4, s8;
    for (const auto& r : sw7.rows) {
      if (r.status != "ok" || std::isnan(r.ratio)) continue;
      if (std::abs(r.ratio - 1.0) > kNearUnityBand) continue;
      if (r.cycles == 4) s4.insert({r.axis1, r.axis2});
      if (r.cycles == 8) s8.insert({r.axis1, r.axis2});
    }
    std::vector<std::pair<double, double>> escaped;
    for (const auto& p : s8)
      if (!s4.count(p)) escaped.push_back(p);
    const bool contained = escaped.empty();
    const bool strictly_smaller = s8.size() < s4.size();
    std::string examples;
    for (size_t i = 0; i < escaped.size() && i < 2; ++i)
      examples += fmt(" (Delta=%g, omegaD=%g)", escaped[i].first, escaped[i].second);
    const bool ok = grids_ok && contained && strictly_smaller;
    line(8, ok,
         fmt("near-unity regions on the weak map at band 5%%: |N=4| = %zu, |N=8| = %zu, "
             "N=8 escapes N=4 at %zu points%s; grids %zu/%zu rows (want %zu each)",
             s4.size(), s8.size(), escaped.size(), examples.c_str(), sw7.rows.size(),
             sw10.rows.size(), want_rows));
  } catch (const std::exception& e) {
    line(8, false, std::string("threw: ") + e.what());
  }

  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures;
}
