#pragma once

// Independent reference implementations used only by tests.  These are
// deliberately naive: exhaustive enumeration and dense iteration, no shared
// code with the library's fast paths.

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "tms/transfer.hpp"

namespace tms::testing {

// (L^n f)(x) by enumerating every admissible backward word v of length n and
// evaluating e^{phi_n(v . x)} f(v . x) through TailPoint::prepended.
inline double brute_Ln(const SimpleFunction& f, const TailPoint& x, int n, const System& sys) {
  const StateGraph& g = *sys.graph;
  const int r = sys.potential.range();
  if (n == 0) return f.eval(x);
  double total = 0.0;
  Word v;
  auto rec = [&](auto&& self, State front) -> void {
    v.insert(v.begin(), front);
    if (static_cast<int>(v.size()) == n) {
      TailPoint y = x;
      for (auto it = v.rbegin(); it != v.rend(); ++it) y = y.prepended(*it, g);
      double phi_n = 0.0;
      Word coords = y.coords(static_cast<std::size_t>(n + r - 1));
      for (int i = 0; i < n; ++i)
        phi_n += sys.potential.eval(std::span<const State>(coords.data() + i, r));
      total += std::exp(phi_n) * f.eval(y);
    } else {
      for (State b : g.in_edges(v.front())) self(self, b);
    }
    v.erase(v.begin());
  };
  for (State b : g.in_edges(x.head())) rec(rec, b);
  return total;
}

// Undirected-free BFS distance along directed edges a -> ... -> b.
inline int bfs_distance(State a, State b, const StateGraph& g, int cap) {
  if (a == b) return 0;
  std::queue<std::pair<State, int>> q;
  std::set<State> seen{a};
  q.push({a, 0});
  while (!q.empty()) {
    auto [s, d] = q.front();
    q.pop();
    if (d >= cap) continue;
    for (State t : g.out_edges(s)) {
      if (t == b) return d + 1;
      if (seen.insert(t).second) q.push({t, d + 1});
    }
  }
  return -1;
}

// Partial first-passage sum  sum_{n <= depth} e^{alpha n} #{length-n paths
// a -> b with no intermediate visit to b}  via a length-indexed count table.
inline double first_passage_partial(double alpha, State a, State b, int depth,
                                    const StateGraph& g) {
  double total = a == b ? 1.0 : 0.0;
  std::map<State, double> counts{{a, 1.0}};
  for (int n = 1; n <= depth; ++n) {
    std::map<State, double> next;
    double arrived = 0.0;
    for (const auto& [s, cnt] : counts)
      for (State t : g.out_edges(s)) {
        if (t == b)
          arrived += cnt;
        else
          next[t] += cnt;
      }
    total += std::exp(alpha * n) * arrived;
    counts = std::move(next);
  }
  return total;
}

// (L^n 1_[a])(x) for a single-state cylinder via a forward path-weight DP:
// sum over length-n paths a -> head(x) of e^{phi_n}.  Polynomial where the
// backward enumeration is exponential; ranges 1 and 2 only.
inline double forward_Ln(State a, State x_head, int n, const System& sys) {
  const StateGraph& g = *sys.graph;
  const int r = sys.potential.range();
  auto step = [&](State s, State t) {
    if (r == 1) return std::exp(sys.potential.eval(std::span<const State>(&s, 1)));
    return std::exp(sys.potential.eval(s, t));
  };
  if (n == 0) return a == x_head ? 1.0 : 0.0;
  std::map<State, double> cur{{a, 1.0}};
  for (int k = 1; k < n; ++k) {
    std::map<State, double> next;
    for (const auto& [s, w] : cur)
      for (State t : g.out_edges(s)) next[t] += w * step(s, t);
    cur = std::move(next);
  }
  double total = 0.0;
  for (const auto& [s, w] : cur)
    if (g.has_edge(s, x_head)) total += w * step(s, x_head);
  return total;
}

// Stationary ratio pi(target) / pi(0) of the inward-drift birth-death chain
// (down with probability p, up with 1 - p, lazy at 0), by dense power
// iteration on the truncated state space {0, ..., cap}.
inline double stationary_ratio(double p, State target, int cap, int iters = 20000) {
  std::vector<double> pi(cap + 1, 1.0 / (cap + 1));
  for (int it = 0; it < iters; ++it) {
    std::vector<double> next(cap + 1, 0.0);
    next[0] += pi[0] * p;
    next[1] += pi[0] * (1.0 - p);
    for (int s = 1; s <= cap; ++s) {
      next[s - 1] += pi[s] * p;
      if (s + 1 <= cap)
        next[s + 1] += pi[s] * (1.0 - p);
      else
        next[s] += pi[s] * (1.0 - p);  // reflect the truncation edge
    }
    pi = std::move(next);
  }
  return pi[static_cast<std::size_t>(target)] / pi[0];
}

}  // namespace tms::testing
