// heom.cpp: lattice equations of motion and the depth-convergence scan.
#include "heomgp/heom.hpp"

#include <cmath>

#include "heomgp/integrate.hpp"

namespace heomgp {
namespace heom {

HierarchyState initial_state(const ModelParams& p) {
  model::validate(p);
  HierarchyState s;
  s.depth1 = p.depth1;
  s.depth2 = p.depth2;
  s.tau = 0.0;
  s.data = Eigen::VectorXcd::Zero(4 * s.sites());
  const double c = std::cos(0.5 * p.theta0);
  const double sn = std::sin(0.5 * p.theta0);
  Mat2 rho;
  rho << c * c, c * sn, c * sn, sn * sn;
  s.physical() = rho;
  return s;
}

void rhs(const Eigen::VectorXcd& y, double tau, const ModelParams& p, int depth1,
         int depth2, Eigen::VectorXcd& dydt) {
  const double w0 = model::omega0(tau, p);
  const NuVector nu = nu_vector(p);
  // Down-couplings carry half the zero-time correlation amplitude
  // (correlation(0) = gamma0/2), the normalization the companion-mode
  // cross-check singles out.
  const double cdown = 0.25 * p.gamma0;
  const int stride1 = depth2 + 1;

  for (int n1 = 0; n1 <= depth1; ++n1) {
    for (int n2 = 0; n2 <= depth2; ++n2) {
      const int idx = n1 * stride1 + n2;
      Eigen::Map<const Mat2> r(y.data() + 4 * idx);

      Mat2 der;
      // -i [H, r] with H = w0 |0><0|, minus the lattice damping.
      const cplx damp = static_cast<double>(n1) * nu.nu1 + static_cast<double>(n2) * nu.nu2;
      der(0, 0) = -damp * r(0, 0);
      der(0, 1) = -I_UNIT * w0 * r(0, 1) - damp * r(0, 1);
      der(1, 0) = I_UNIT * w0 * r(1, 0) - damp * r(1, 0);
      der(1, 1) = -damp * r(1, 1);

      // up-couplings: -i [sigma_x, deeper neighbor], dropped at the boundary
      if (n1 < depth1) {
        Eigen::Map<const Mat2> up(y.data() + 4 * (idx + stride1));
        der(0, 0) -= I_UNIT * (up(1, 0) - up(0, 1));
        der(0, 1) -= I_UNIT * (up(1, 1) - up(0, 0));
        der(1, 0) -= I_UNIT * (up(0, 0) - up(1, 1));
        der(1, 1) -= I_UNIT * (up(0, 1) - up(1, 0));
      }
      if (n2 < depth2) {
        Eigen::Map<const Mat2> up(y.data() + 4 * (idx + 1));
        der(0, 0) -= I_UNIT * (up(1, 0) - up(0, 1));
        der(0, 1) -= I_UNIT * (up(1, 1) - up(0, 0));
        der(1, 0) -= I_UNIT * (up(0, 0) - up(1, 1));
        der(1, 1) -= I_UNIT * (up(0, 1) - up(1, 0));
      }

      // down-couplings: commutator minus/plus anticommutator collapses to a
      // one-sided product, right for the conjugate exponential and left for
      // the direct one
      if (n1 > 0) {
        Eigen::Map<const Mat2> dn(y.data() + 4 * (idx - stride1));
        const cplx f = 2.0 * I_UNIT * cdown * static_cast<double>(n1);
        der(0, 0) += f * dn(0, 1);
        der(0, 1) += f * dn(0, 0);
        der(1, 0) += f * dn(1, 1);
        der(1, 1) += f * dn(1, 0);
      }
      if (n2 > 0) {
        Eigen::Map<const Mat2> dn(y.data() + 4 * (idx - 1));
        const cplx f = -2.0 * I_UNIT * cdown * static_cast<double>(n2);
        der(0, 0) += f * dn(1, 0);
        der(0, 1) += f * dn(1, 1);
        der(1, 0) += f * dn(0, 0);
        der(1, 1) += f * dn(0, 1);
      }

      Eigen::Map<Mat2>(dydt.data() + 4 * idx) = der;
    }
  }
}

HierarchyState rhs(const HierarchyState& s, const ModelParams& p) {
  HierarchyState out = s;
  rhs(s.data, s.tau, p, s.depth1, s.depth2, out.data);
  return out;
}

ConvergenceReport convergence_scan(const ModelParams& p,
                                   const std::vector<AdoIndex>& depths,
                                   double threshold) {
  model::validate(p);
  if (depths.empty()) throw InvalidParams("convergence_scan: depth list is empty");

  ConvergenceReport report;
  report.threshold = threshold;
  std::vector<Mat2> prev;
  for (size_t i = 0; i < depths.size(); ++i) {
    ModelParams q = p;
    q.depth1 = depths[i].n1;
    q.depth2 = depths[i].n2;
    const auto res = integrate::evolve(q);

    ConvergenceEntry entry;
    entry.depth1 = q.depth1;
    entry.depth2 = q.depth2;
    entry.min_eig = 1.0;
    std::vector<Mat2> cur;
    cur.reserve(res.traj.samples.size());
    for (const auto& smp : res.traj.samples) {
      cur.push_back(smp.rho);
      const auto eig = algebra::eig_hermitian(algebra::hermitize(smp.rho));
      entry.min_eig = std::min(entry.min_eig, eig.eps2);
    }
    if (i > 0) {
      double dmax = 0.0;
      for (size_t j = 0; j < cur.size(); ++j) {
        dmax = std::max(dmax, (cur[j] - prev[j]).norm());
      }
      entry.max_dist_prev = dmax;
      if (dmax < threshold && report.converged_at1 < 0) {
        report.converged_at1 = entry.depth1;
        report.converged_at2 = entry.depth2;
      }
      if (i == depths.size() - 1) report.converged = dmax < threshold;
    }
    report.entries.push_back(entry);
    prev = std::move(cur);
  }
  if (depths.size() == 1) report.converged = true;  // nothing to compare against
  return report;
}

}  // namespace heom
}  // namespace heomgp
