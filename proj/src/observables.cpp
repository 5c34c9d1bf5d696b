// observables.cpp: peak counting and the common-envelope residual.
#include "heomgp/observables.hpp"

namespace heomgp {
namespace observables {

int count_peaks(const std::vector<double>& r, double prominence) {
  const int n = static_cast<int>(r.size());
  int count = 0;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(r[i] > r[i - 1] && r[i] > r[i + 1])) continue;
    // walk outward to the nearest strictly higher sample; the valley minimum
    // on each side is the candidate base
    double left_base = r[i];
    for (int j = i - 1; j >= 0; --j) {
      if (r[j] > r[i]) break;
      left_base = std::min(left_base, r[j]);
    }
    double right_base = r[i];
    for (int j = i + 1; j < n; ++j) {
      if (r[j] > r[i]) break;
      right_base = std::min(right_base, r[j]);
    }
    if (r[i] - std::max(left_base, right_base) >= prominence) ++count;
  }
  return count;
}

double g_form_check(const integrate::Trajectory& traj) {
  if (traj.samples.empty()) throw PreconditionViolated("g_form_check: empty trajectory");
  const auto& first = traj.samples.front();
  const double p0 = first.rho11;
  const double c0 = std::abs(first.rho12);
  if (p0 <= 0.0 || c0 <= 0.0) {
    throw PreconditionViolated(
        "g_form_check: initial population and coherence must both be nonzero");
  }
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    const double g2 = std::norm(s.rho12 / first.rho12);
    const double pr = s.rho11 / p0;
    worst = std::max(worst, std::abs(g2 - pr));
  }
  return worst;
}

}  // namespace observables
}  // namespace heomgp
