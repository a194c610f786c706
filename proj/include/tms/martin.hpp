#pragma once

// Kernel profiles and the approximate Martin boundary.  A profile is the
// vector of Martin kernel values over an ordered finite test set of cylinder
// words (plus the indicator coordinates); the rho metric weights the i-th
// test word by 2^{-i} / (C_i + 1) where C_i bounds the i-th kernel uniformly,
// so truncating the test set costs at most sum_{i > m} 2^{-i+1}.  Clusters of
// converged profiles along escaping orbits are the computable stand-in for
// boundary points.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tms/green.hpp"
#include "tms/point.hpp"
#include "tms/pressure.hpp"

namespace tms {

// Deterministic default test set: all admissible words up to max_len over the
// state ball of the given radius around the origin, ordered by (length, lex),
// with the origin singleton first.
inline std::vector<Word> default_test_set(State origin, int radius, int max_len,
                                          const StateGraph& g) {
  std::vector<State> ball = state_ball(std::vector<State>{origin}, radius, g);
  std::unordered_set<State> inside(ball.begin(), ball.end());
  std::vector<Word> words;
  Word cur;
  auto extend = [&](auto&& self) -> void {
    words.push_back(cur);
    if (static_cast<int>(cur.size()) >= max_len) return;
    for (State t : g.out_edges(cur.back())) {
      if (!inside.count(t)) continue;
      cur.push_back(t);
      self(self);
      cur.pop_back();
    }
  };
  for (State s : ball) {
    cur.assign(1, s);
    extend(extend);
  }
  std::sort(words.begin(), words.end(), [](const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  Word o{origin};
  words.erase(std::remove(words.begin(), words.end(), o), words.end());
  words.insert(words.begin(), o);
  return words;
}

struct KernelProfile {
  std::vector<Word> test_set;
  std::vector<KernelEntry> values;
  std::vector<char> indicators;       // 1_{[w_i]}(x); all zero for centroids
  std::optional<TailPoint> at;        // absent for synthetic centroids
  std::string tag;
};

inline KernelProfile kernel_profile(const TailPoint& x, double lambda,
                                    const std::vector<Word>& test_set, State origin,
                                    const System& sys, const GreenOptions& opt = {}) {
  KernelProfile p;
  p.test_set = test_set;
  p.at = x;
  for (const Word& w : test_set) {
    p.values.push_back(martin_kernel(SimpleFunction::indicator(w), x, lambda, origin, sys, opt));
    p.indicators.push_back(x.starts_with(w) ? 1 : 0);
  }
  return p;
}

// Uniform kernel bounds C_i, one per test word, used as rho weights.
class RhoMetric {
 public:
  // Constructive mode: the chained Harnack bound.  For f = 1_[w] supported in
  // [w_0], K(f, . ) <= C_{w_0, o} with
  //   C_{a,b} = lambda^N exp(-phi_N(path(b -> a) . x_a) + sum_{i=2}^N Var_i)
  // along the lex-smallest shortest path b -> a and the deterministic anchor
  // x_a of a.  var_sum is a bound on sum_{i >= 2} Var_i; for Markovian
  // potentials that is just Var_2 (estimated over a ball, the rule is lazy).
  static RhoMetric constructive(const std::vector<Word>& test_set, State origin,
                                double lambda, const System& sys, double var_sum,
                                int distance_cap = 256) {
    RhoMetric m;
    m.test_set_ = test_set;
    for (const Word& w : test_set)
      m.bounds_.push_back(harnack_bound(w.front(), origin, lambda, sys, var_sum, distance_cap));
    return m;
  }

  // Empirical mode: running sup of the observed kernel values per test word.
  static RhoMetric empirical(const std::vector<Word>& test_set,
                             const std::vector<KernelProfile>& profiles) {
    RhoMetric m;
    m.test_set_ = test_set;
    m.bounds_.assign(test_set.size(), 1.0);
    for (const KernelProfile& p : profiles) {
      if (p.test_set != test_set)
        throw MismatchedTestSetError("profile test set differs from the metric's");
      for (std::size_t i = 0; i < test_set.size(); ++i)
        m.bounds_[i] = std::max(m.bounds_[i], p.values[i].hi);
    }
    return m;
  }

  static double harnack_bound(State a, State b, double lambda, const System& sys,
                              double var_sum, int distance_cap) {
    // C_{a,b} with N = d(b, a); equals 1 when a == b.
    auto path = shortest_path(b, a, *sys.graph, distance_cap);
    if (!path)
      throw NoCycleReachableError("no path " + sys.graph->name(b) + " -> " +
                                  sys.graph->name(a) + " within the distance cap");
    int N = static_cast<int>(path->size()) - 1;
    if (N == 0) return 1.0;
    TailPoint xa = anchor_point(a, *sys.graph);
    double phiN = birkhoff_sum(sys.potential, *path, xa, N);
    return std::pow(lambda, N) * std::exp(-phiN + (N >= 2 ? var_sum : 0.0));
  }

  const std::vector<Word>& test_set() const { return test_set_; }
  const std::vector<double>& bounds() const { return bounds_; }

  // Truncated rho distance; the dropped tail is at most tail_bound().
  double distance(const KernelProfile& a, const KernelProfile& b) const {
    if (a.test_set != test_set_ || b.test_set != test_set_)
      throw MismatchedTestSetError("profiles use a different test set");
    double d = 0.0;
    for (std::size_t i = 0; i < test_set_.size(); ++i) {
      double term = std::abs(a.values[i].value - b.values[i].value) +
                    std::abs(static_cast<double>(a.indicators[i]) - b.indicators[i]);
      d += term / (std::ldexp(1.0, static_cast<int>(i) + 1) * (bounds_[i] + 1.0));
    }
    return d;
  }

  double tail_bound() const {
    return std::ldexp(1.0, -static_cast<int>(test_set_.size()) + 1);
  }

 private:
  std::vector<Word> test_set_;
  std::vector<double> bounds_;
};

struct BoundaryCluster {
  KernelProfile centroid;          // entrywise mean of members, indicators 0
  std::vector<int> members;        // orbit indices
  double diameter = 0.0;           // max pairwise rho among member profiles
};

struct BoundaryAtlas {
  std::vector<Word> test_set;
  double resolution = 0.0;  // the epsilon the clusters were formed at
  double rho_tail = 0.0;    // truncation tail of the metric
  std::vector<BoundaryCluster> clusters;
  std::vector<int> cluster_of;  // per orbit
};

struct AtlasOptions {
  double eps = 1e-3;          // cluster resolution
  double cauchy_tol = 1e-4;   // trailing profile increments must drop below this
  int trailing = 4;           // profiles inspected by the Cauchy/escape checks
  GreenOptions green;
};

namespace detail {
inline KernelProfile mean_profile(const std::vector<const KernelProfile*>& ps) {
  KernelProfile c;
  c.test_set = ps.front()->test_set;
  c.indicators.assign(c.test_set.size(), 0);
  for (std::size_t i = 0; i < c.test_set.size(); ++i) {
    KernelEntry e;
    double lo = 0.0, hi = 0.0, v = 0.0;
    for (const KernelProfile* p : ps) {
      v += p->values[i].value;
      lo += p->values[i].lo;
      hi += p->values[i].hi;
    }
    e.value = v / ps.size();
    e.lo = lo / ps.size();
    e.hi = hi / ps.size();
    c.values.push_back(e);
  }
  return c;
}
}  // namespace detail

// Clusters the limits of kernel profiles along escaping orbits.  Each orbit
// is a model-supplied strictly escaping sequence of points; its trailing
// profiles must be Cauchy in rho (NotCauchyError otherwise), and the trailing
// mean is the orbit's representative.  Representatives within eps of an
// existing cluster centroid join it; per-cluster diameters are reported so
// callers can see whether eps was honest.
inline BoundaryAtlas boundary_atlas(const std::vector<std::vector<TailPoint>>& orbits,
                                    double lambda, const std::vector<Word>& test_set,
                                    State origin, const System& sys, const RhoMetric& rho,
                                    const AtlasOptions& opt = {}) {
  if (orbits.empty()) throw InadmissibleError("boundary atlas needs at least one orbit");
  BoundaryAtlas atlas;
  atlas.test_set = test_set;
  atlas.resolution = opt.eps;
  atlas.rho_tail = rho.tail_bound();
  std::vector<KernelProfile> reps;
  for (std::size_t oi = 0; oi < orbits.size(); ++oi) {
    const auto& orbit = orbits[oi];
    int k = std::min<int>(opt.trailing, static_cast<int>(orbit.size()));
    if (k < 2) throw InadmissibleError("orbit too short for convergence diagnostics");
    // Escape check: trailing base states must be pairwise distinct (a
    // sequence stuck in a finite state set revisits head states).
    for (int i = static_cast<int>(orbit.size()) - k; i < static_cast<int>(orbit.size()); ++i)
      for (int j = i + 1; j < static_cast<int>(orbit.size()); ++j)
        if (orbit[i].head() == orbit[j].head())
          throw NotEscapingError("orbit repeats base state " + sys.graph->name(orbit[i].head()));
    std::vector<KernelProfile> tail_profiles;
    for (int i = static_cast<int>(orbit.size()) - k; i < static_cast<int>(orbit.size()); ++i)
      tail_profiles.push_back(
          kernel_profile(orbit[i], lambda, test_set, origin, sys, opt.green));
    for (std::size_t i = 0; i + 1 < tail_profiles.size(); ++i) {
      double step = rho.distance(tail_profiles[i], tail_profiles[i + 1]);
      if (step > opt.cauchy_tol)
        throw NotCauchyError("orbit " + std::to_string(oi) + " increment " +
                             std::to_string(step) + " exceeds the Cauchy tolerance");
    }
    std::vector<const KernelProfile*> ptrs;
    for (const auto& p : tail_profiles) ptrs.push_back(&p);
    KernelProfile rep = detail::mean_profile(ptrs);
    rep.tag = "orbit " + std::to_string(oi);
    reps.push_back(std::move(rep));
  }
  // Greedy clustering of representatives at resolution eps.
  for (std::size_t oi = 0; oi < reps.size(); ++oi) {
    int assigned = -1;
    for (std::size_t ci = 0; ci < atlas.clusters.size(); ++ci)
      if (rho.distance(reps[oi], atlas.clusters[ci].centroid) <= opt.eps) {
        assigned = static_cast<int>(ci);
        break;
      }
    if (assigned < 0) {
      BoundaryCluster c;
      c.centroid = reps[oi];
      c.centroid.at.reset();
      c.centroid.indicators.assign(test_set.size(), 0);
      c.members.push_back(static_cast<int>(oi));
      atlas.clusters.push_back(std::move(c));
      assigned = static_cast<int>(atlas.clusters.size()) - 1;
    } else {
      atlas.clusters[assigned].members.push_back(static_cast<int>(oi));
      std::vector<const KernelProfile*> ptrs;
      for (int m : atlas.clusters[assigned].members) ptrs.push_back(&reps[m]);
      KernelProfile c = detail::mean_profile(ptrs);
      atlas.clusters[assigned].centroid = std::move(c);
    }
    atlas.cluster_of.push_back(assigned);
  }
  for (auto& c : atlas.clusters)
    for (std::size_t i = 0; i < c.members.size(); ++i)
      for (std::size_t j = i + 1; j < c.members.size(); ++j)
        c.diameter = std::max(c.diameter, rho.distance(reps[c.members[i]], reps[c.members[j]]));
  return atlas;
}

// The cluster's limit measure evaluated on a test cylinder: the centroid
// entry for w, with the certified interval.  Words outside the test set are
// a mismatch; recompute the atlas with a larger test set to refine.
inline KernelEntry mu_omega(const BoundaryCluster& c, const Word& w) {
  for (std::size_t i = 0; i < c.centroid.test_set.size(); ++i)
    if (c.centroid.test_set[i] == w) return c.centroid.values[i];
  throw MismatchedTestSetError("cylinder outside the atlas test set");
}

}  // namespace tms
