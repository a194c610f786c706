#pragma once

// Cycle-weight growth rate: Z_n(phi, a) sums e^{phi_n} over length-n loops at
// a, and the pressure is the exponential growth rate of that sequence.  The
// DP rescales each level so very negative potentials do not underflow.
// Markovian potentials only; every model in the zoo is Markovian or constant.

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "tms/green.hpp"
#include "tms/transfer.hpp"

namespace tms {

struct PressureEstimate {
  std::vector<double> log_Zn;  // index n-1 holds log Z_n; NaN when Z_n = 0
  double extrapolated = std::numeric_limits<double>::quiet_NaN();
  int period = 0;   // gcd of loop lengths with Z_n > 0 (mixing iff 1)
  int window = 0;   // number of trailing points used by the affine fit
};

inline PressureEstimate gurevich_pressure(State a, int n_max, const System& sys) {
  if (sys.potential.range() != 2)
    throw RangeTooLargeError("pressure DP needs a Markovian potential");
  sys.graph->require_state(a);
  PressureEstimate est;
  est.log_Zn.assign(static_cast<std::size_t>(n_max),
                    std::numeric_limits<double>::quiet_NaN());
  // v[s] * e^{offset} = weighted count of length-k paths a -> s.
  std::unordered_map<State, double> v{{a, 1.0}};
  double offset = 0.0;
  for (int k = 1; k <= n_max; ++k) {
    std::unordered_map<State, double> next;
    double peak = 0.0;
    for (const auto& [s, val] : v)
      for (State t : sys.graph->out_edges(s)) {
        double& slot = next[t];
        slot += val * std::exp(sys.potential.eval(s, t));
        peak = std::max(peak, slot);
      }
    if (peak <= 0.0) break;  // nothing reachable anymore (cannot happen on cycles)
    for (auto& [s, val] : next) val /= peak;
    offset += std::log(peak);
    v = std::move(next);
    auto it = v.find(a);
    if (it != v.end() && it->second > 0.0)
      est.log_Zn[k - 1] = std::log(it->second) + offset;
  }
  // Period and affine fit over the trailing half of the nonzero entries.
  std::vector<std::pair<int, double>> pts;
  for (int n = 1; n <= n_max; ++n)
    if (std::isfinite(est.log_Zn[n - 1])) {
      est.period = std::gcd(est.period, n);
      pts.emplace_back(n, est.log_Zn[n - 1]);
    }
  if (pts.size() < 2) return est;  // no growth rate from a single loop length
  std::size_t start = pts.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = pts.size() - start;
  for (std::size_t i = start; i < pts.size(); ++i) {
    sx += pts[i].first;
    sy += pts[i].second;
    sxx += static_cast<double>(pts[i].first) * pts[i].first;
    sxy += pts[i].first * pts[i].second;
  }
  double denom = cnt * sxx - sx * sx;
  if (denom > 0) {
    est.extrapolated = (cnt * sxy - sx * sy) / denom;
    est.window = static_cast<int>(cnt);
  }
  return est;
}

enum class Transience { transient, recurrent, inconclusive };

struct TransienceVerdict {
  Transience kind = Transience::inconclusive;
  double partial = 0.0;     // partial Green sum backing the verdict
  double tail_bound = 0.0;  // meaningful for transient only
  int n_terms = 0;
  std::string detail;
};

// lambda-transience of the potential, probed through the Green series of f at
// x.  transient: certified convergent; recurrent: partial sums crossed the
// divergence threshold with sustained ratios >= 1; otherwise inconclusive.
inline TransienceVerdict classify(const SimpleFunction& f, const TailPoint& x,
                                  double lambda, const System& sys,
                                  GreenOptions opt = {}) {
  TransienceVerdict v;
  try {
    GreenValue gv = green(f, x, lambda, sys, opt);
    v.kind = Transience::transient;
    v.partial = gv.partial;
    v.tail_bound = gv.tail_bound;
    v.n_terms = gv.n_terms;
    v.detail = "certified convergent";
  } catch (const DivergingError& e) {
    v.kind = Transience::recurrent;
    v.partial = e.partial;
    v.n_terms = e.n_terms;
    v.detail = e.what();
  } catch (const BudgetExhaustedError& e) {
    v.kind = Transience::inconclusive;
    v.partial = e.partial;
    v.n_terms = e.n_terms;
    v.detail = e.what();
  }
  return v;
}

}  // namespace tms
