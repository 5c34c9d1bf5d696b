// gp.cpp: discrete kinematic phase accumulation over eigenvector series.
//
// Two routes are computed. The product route sums per-step overlap arguments
// with a stride-2 refinement and subtracts them from the closure argument
// against the start vector; every term is assembled from overlap arguments,
// so eigenvector phase choices telescope away exactly. The direct route
// first fixes a smooth gauge (largest component held real positive, with
// hysteresis and a glue phase at pivot switches), then integrates the
// connection with fourth-order stencils and panels confined to the smooth
// chart segments between switches. Both land on the same invariant series;
// their gap is a discretization diagnostic.
#include "heomgp/gp.hpp"

#include <cmath>
#include <numbers>

namespace heomgp {
namespace gp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClosureFloor = 1e-2;
constexpr double kPivotDrop = 0.3;

double princ(double x) { return std::remainder(x, kTwoPi); }

}  // namespace

EigenSeries eigendecompose(const integrate::Trajectory& traj) {
  EigenSeries es;
  es.cycle_period = traj.cycle_period;
  es.samples_per_cycle = traj.samples_per_cycle;
  es.taus.reserve(traj.samples.size());
  es.eps1.reserve(traj.samples.size());
  es.eps2.reserve(traj.samples.size());
  es.v1.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const auto eig = algebra::eig_hermitian(algebra::hermitize(s.rho));
    es.taus.push_back(s.tau);
    es.eps1.push_back(eig.eps1);
    es.eps2.push_back(eig.eps2);
    es.v1.push_back(eig.v1);
  }
  return es;
}

GpSeries gp_accumulate_partial(const EigenSeries& es) {
  GpSeries g;
  g.taus = es.taus;
  g.cycle_period = es.cycle_period;
  g.samples_per_cycle = es.samples_per_cycle;
  const size_t n = es.taus.size();
  if (n == 0) return g;

  // clip at the first spectral collapse: the branch is ill-defined there
  size_t nvalid = n;
  for (size_t m = 0; m < n; ++m) {
    const double gap = es.eps1[m] - es.eps2[m];
    g.min_gap = std::min(g.min_gap, gap);
    if (gap < kDegeneracyGap) {
      nvalid = m;
      g.stop_reason = "degeneracy";
      g.stop_tau = es.taus[m];
      break;
    }
  }

  // per-step overlap arguments
  std::vector<double> a;
  a.reserve(nvalid > 0 ? nvalid - 1 : 0);
  for (size_t m = 0; m + 1 < nvalid; ++m) {
    const cplx o = es.v1[m].dot(es.v1[m + 1]);
    const double mag = std::abs(o);
    g.min_step_overlap = std::min(g.min_step_overlap, mag);
    if (mag <= kMinOverlap) {
      nvalid = m + 1;
      g.stop_reason = "overlap";
      g.stop_tau = es.taus[m + 1];
      break;
    }
    a.push_back(std::arg(o));
  }
  g.valid_samples = nvalid;
  g.complete = nvalid == n && n > 0;
  if (nvalid == 0) return g;

  // stride-2 refined running connection sum: over each sample pair the
  // coarse double-step argument cancels the leading discretization error.
  // The correction enters as princ(coarse - fine), which is invariant under
  // per-sample re-phasing; raw branch choices would leak 2 pi / 3 fractions.
  std::vector<double> conn(nvalid, 0.0);
  for (size_t m = 1; m < nvalid; ++m) {
    if (m % 2 == 0) {
      const double fine = a[m - 2] + a[m - 1];
      const double delta = princ(std::arg(es.v1[m - 2].dot(es.v1[m])) - fine);
      conn[m] = conn[m - 2] + fine - delta / 3.0;
    } else {
      conn[m] = conn[m - 1] + a[m - 1];
    }
  }

  // closure argument against the start, minus the connection, unwrapped.
  // Samples whose closure overlap sits below the floor are bridged: arg(z)
  // is ill-conditioned there. A step of +pi across a bridged window means
  // the closure passed through zero, where the branch is a perfect tie;
  // take -pi so the series stays continuous with nearby paths that skirt
  // the zero instead of picking up a spurious winding.
  g.phi_raw.assign(nvalid, 0.0);
  g.phi.assign(nvalid, 0.0);
  double prev_q = 0.0;
  size_t prev_good = 0;
  for (size_t m = 1; m < nvalid; ++m) {
    const cplx z = es.v1[0].dot(es.v1[m]);
    const double mag = std::abs(z);
    g.min_closure_overlap = std::min(g.min_closure_overlap, mag);
    if (mag < kClosureFloor) continue;
    const double q = std::arg(z) - conn[m];
    double step = princ(q - prev_q);
    if (m - prev_good > 1) {
      if (step > std::numbers::pi - 1e-6) step -= kTwoPi;
      const double runl = static_cast<double>(m - prev_good);
      for (size_t k = prev_good + 1; k < m; ++k)
        g.phi_raw[k] =
            g.phi_raw[prev_good] + step * static_cast<double>(k - prev_good) / runl;
    }
    g.phi_raw[m] = g.phi_raw[prev_good] + step;
    prev_q = q;
    prev_good = m;
  }
  for (size_t k = prev_good + 1; k < nvalid; ++k) g.phi_raw[k] = g.phi_raw[prev_good];
  const double shear = kTwoPi / es.cycle_period;
  for (size_t m = 0; m < nvalid; ++m) g.phi[m] = g.phi_raw[m] + shear * es.taus[m];

  if (g.min_closure_overlap < kClosureFloor) g.direct_route_valid = false;

  if (g.complete && nvalid >= 5 && g.direct_route_valid) {
    // smooth gauge: hold the pivot component real positive, switching charts
    // with a glue phase when it decays. The gauge stays continuous across a
    // switch but its derivative kinks there, so every switch sample starts a
    // new smooth segment and stencils must not straddle it.
    const size_t L = nvalid - 1;
    std::vector<Vec2> w(nvalid);
    std::vector<size_t> cuts;
    int pivot = std::abs(es.v1[0](0)) >= std::abs(es.v1[0](1)) ? 0 : 1;
    cplx glue(1.0, 0.0);
    for (size_t m = 0; m < nvalid; ++m) {
      const Vec2& v = es.v1[m];
      if (std::abs(v(pivot)) < kPivotDrop) {
        const int np = 1 - pivot;
        glue *= std::polar(1.0, std::arg(v(np)) - std::arg(v(pivot)));
        pivot = np;
        // the glue makes w at the switch sample equal its old-chart value,
        // so a switch on the final sample leaves no kink ahead of it
        if (m > 0 && m < L) cuts.push_back(m);
      }
      w[m] = v * (std::polar(1.0, -std::arg(v(pivot))) * glue);
    }

    bool segments_ok = true;
    {
      size_t a = 0;
      for (size_t c : cuts) {
        segments_ok = segments_ok && c - a >= 4;
        a = c;
      }
      segments_ok = segments_ok && L - a >= 4;
    }
    if (!segments_ok) {
      // charts flip faster than the stencil width can resolve
      g.direct_route_valid = false;
    } else {
      // connection integrand via 4th-order first-derivative stencils clamped
      // to [a, b]; the integrand is two-valued at a cut, one limit per side
      const double h = es.taus[1] - es.taus[0];
      std::vector<double> f(nvalid, 0.0);
      std::vector<double> f_cut_left(cuts.size(), 0.0);
      auto deriv = [&](size_t m, size_t a, size_t b) -> Vec2 {
        if (m >= a + 2 && m + 2 <= b) {
          return (-w[m + 2] + 8.0 * w[m + 1] - 8.0 * w[m - 1] + w[m - 2]) / (12.0 * h);
        }
        if (m < a + 2) {
          if (m == a)
            return (-25.0 * w[a] + 48.0 * w[a + 1] - 36.0 * w[a + 2] +
                    16.0 * w[a + 3] - 3.0 * w[a + 4]) /
                   (12.0 * h);
          return (-3.0 * w[a] - 10.0 * w[a + 1] + 18.0 * w[a + 2] - 6.0 * w[a + 3] +
                  w[a + 4]) /
                 (12.0 * h);
        }
        if (m == b)
          return (25.0 * w[b] - 48.0 * w[b - 1] + 36.0 * w[b - 2] - 16.0 * w[b - 3] +
                  3.0 * w[b - 4]) /
                 (12.0 * h);
        return (3.0 * w[b] + 10.0 * w[b - 1] - 18.0 * w[b - 2] + 6.0 * w[b - 3] -
                w[b - 4]) /
               (12.0 * h);
      };
      size_t a = 0;
      for (size_t k = 0; k <= cuts.size(); ++k) {
        const size_t b = k < cuts.size() ? cuts[k] : L;
        for (size_t m = a; m <= b; ++m) {
          const cplx c = w[m].dot(deriv(m, a, b));
          g.max_connection_residue =
              std::max(g.max_connection_residue, std::abs(c.real()));
          if (m == b && k < cuts.size()) {
            f_cut_left[k] = c.imag();
          } else {
            f[m] = c.imag();
          }
        }
        a = b;
      }

      // cumulative integral: Simpson pairs at even offsets into the segment,
      // one-sided cubic end panels at odd offsets, all fourth order
      std::vector<double> integral(nvalid, 0.0);
      a = 0;
      for (size_t k = 0; k <= cuts.size(); ++k) {
        const size_t b = k < cuts.size() ? cuts[k] : L;
        auto fat = [&](size_t x) {
          return x == b && k < cuts.size() ? f_cut_left[k] : f[x];
        };
        for (size_t m = a + 1; m <= b; ++m) {
          const size_t r = m - a;
          if (r % 2 == 0) {
            integral[m] =
                integral[m - 2] + h / 3.0 * (fat(m - 2) + 4.0 * fat(m - 1) + fat(m));
          } else if (r == 1) {
            integral[m] = integral[a] +
                          h / 12.0 * (5.0 * fat(a) + 8.0 * fat(a + 1) - fat(a + 2));
          } else {
            integral[m] = integral[m - 1] +
                          h / 12.0 * (-fat(m - 2) + 8.0 * fat(m - 1) + 5.0 * fat(m));
          }
        }
        a = b;
      }

      g.phi_direct_raw.assign(nvalid, 0.0);
      double prev_arg = 0.0;
      double u = 0.0;
      for (size_t m = 1; m < nvalid; ++m) {
        const double cur = std::arg(w[0].dot(w[m]));
        u += princ(cur - prev_arg);
        prev_arg = cur;
        g.phi_direct_raw[m] = u - integral[m];
      }
      for (size_t m = 0; m < nvalid; m += 2) {
        g.max_route_gap =
            std::max(g.max_route_gap, std::abs(g.phi_raw[m] - g.phi_direct_raw[m]));
      }
    }
  }

  return g;
}

GpSeries gp_accumulate(const EigenSeries& es) {
  GpSeries g = gp_accumulate_partial(es);
  if (!g.complete) {
    if (g.stop_reason == "degeneracy") {
      throw DegeneracyEncountered("spectral gap collapsed during phase accumulation",
                                  g.stop_tau);
    }
    throw OverlapTooSmall("adjacent eigenvector overlap too small; sample more densely",
                          g.stop_tau);
  }
  return g;
}

double gp_ratio(const GpSeries& series, double theta0, int cycles) {
  const double ref = unitary_gp(theta0, cycles);
  if (ref == 0.0) throw InvalidParams("gp_ratio: unitary reference vanishes");
  if (cycles < 1 || series.samples_per_cycle <= 0)
    throw InvalidParams("gp_ratio: series carries no cycle grid");
  const size_t idx =
      static_cast<size_t>(cycles) * static_cast<size_t>(series.samples_per_cycle);
  if (idx >= series.phi.size())
    throw InvalidParams("gp_ratio: requested cycle beyond accumulated series");
  return series.phi[idx] / ref;
}

}  // namespace gp
}  // namespace heomgp
