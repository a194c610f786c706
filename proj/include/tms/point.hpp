#pragma once

// Concrete points of the shift space: eventually periodic sequences stored as
// prefix + repeating cycle.  Equality and first-difference are decidable for
// this class, which is what makes metrics and cylinder membership computable.
//
// A backward-direction point stores its coordinates outward from index 0,
// i.e. at(k) is the coordinate k steps into the past, and admissibility runs
// against the arrows: at(k+1) -> at(k) must be an edge.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tms/graph.hpp"

namespace tms {

enum class Direction { forward, backward };

class TailPoint {
 public:
  TailPoint(Word prefix, Word cycle, const StateGraph& g,
            Direction dir = Direction::forward)
      : prefix_(std::move(prefix)), cycle_(std::move(cycle)), dir_(dir) {
    if (cycle_.empty()) throw InadmissibleError("tail point needs a nonempty cycle");
    Word probe = prefix_;
    probe.insert(probe.end(), cycle_.begin(), cycle_.end());
    probe.push_back(cycle_.front());  // closes the cycle and the junction
    if (dir_ == Direction::backward) std::reverse(probe.begin(), probe.end());
    if (!is_admissible(probe, g))
      throw InadmissibleError("tail point violates the transition structure");
  }

  State at(std::size_t i) const {
    if (i < prefix_.size()) return prefix_[i];
    return cycle_[(i - prefix_.size()) % cycle_.size()];
  }

  State head() const { return at(0); }
  Direction direction() const { return dir_; }
  const Word& prefix() const { return prefix_; }
  const Word& cycle() const { return cycle_; }

  // First min(n, available) coordinates as a word.
  Word coords(std::size_t n) const {
    Word w;
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) w.push_back(at(i));
    return w;
  }

  // Drops coordinate 0 (the one-sided shift image).  No graph needed: the
  // result is a subsequence of an already validated point.
  TailPoint shifted() const {
    TailPoint out = *this;
    if (!out.prefix_.empty()) {
      out.prefix_.erase(out.prefix_.begin());
    } else {
      std::rotate(out.cycle_.begin(), out.cycle_.begin() + 1, out.cycle_.end());
    }
    return out;
  }

  TailPoint shifted(std::size_t n) const {
    TailPoint out = *this;
    for (std::size_t i = 0; i < n; ++i) out = out.shifted();
    return out;
  }

  // b . x, validating the new edge b -> head (or head -> b backwards).
  TailPoint prepended(State b, const StateGraph& g) const {
    g.require_state(b);
    bool ok = dir_ == Direction::forward ? g.has_edge(b, head()) : g.has_edge(head(), b);
    if (!ok) throw InadmissibleError("prepended state does not connect");
    TailPoint out = *this;
    out.prefix_.insert(out.prefix_.begin(), b);
    return out;
  }

  bool starts_with(std::span<const State> w) const {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (at(i) != w[i]) return false;
    return true;
  }

  std::string str(const StateGraph& g) const {
    std::string s = dir_ == Direction::backward ? "<" : "";
    for (std::size_t i = 0; i < prefix_.size(); ++i) {
      if (i) s += ",";
      s += g.name(prefix_[i]);
    }
    s += "(";
    for (std::size_t i = 0; i < cycle_.size(); ++i) {
      if (i) s += ",";
      s += g.name(cycle_[i]);
    }
    s += ")*";
    return s;
  }

 private:
  Word prefix_, cycle_;
  Direction dir_;
};

// Index of the first differing coordinate, or nullopt when the points are
// equal as sequences.  Eventually periodic sequences that agree up to
// |p1| + |p2| + 2 lcm(|c1|, |c2|) agree everywhere, so the scan is a decision
// procedure, not a heuristic.
inline std::optional<std::size_t> first_difference(const TailPoint& x, const TailPoint& y) {
  std::size_t l = std::lcm(x.cycle().size(), y.cycle().size());
  std::size_t bound = x.prefix().size() + y.prefix().size() + 2 * l;
  for (std::size_t i = 0; i < bound; ++i)
    if (x.at(i) != y.at(i)) return i;
  return std::nullopt;
}

inline bool operator==(const TailPoint& x, const TailPoint& y) {
  return x.direction() == y.direction() && !first_difference(x, y).has_value();
}

// d(x, y) = 2^{-i} with i the first disagreement index; 0 for equal points.
// Only comparable within one orientation.
inline double metric_d(const TailPoint& x, const TailPoint& y) {
  if (x.direction() != y.direction())
    throw MismatchedTestSetError("metric compares points of one orientation only");
  auto i = first_difference(x, y);
  if (!i) return 0.0;
  return std::ldexp(1.0, -static_cast<int>(*i));
}

// All one-step shift preimages b . x (finitely many by the in-degree bound).
inline std::vector<TailPoint> preimages(const TailPoint& x, const StateGraph& g) {
  std::vector<TailPoint> out;
  for (State b : g.in_edges(x.head())) out.push_back(x.prepended(b, g));
  return out;
}

// Deterministic anchor in T[a]: iterative-deepening DFS over paths that start
// at a successor of a, exploring successors in encoded order; the first path
// that revisits one of its own states (at the smallest depth, then lex order)
// closes the cycle.  The result starts with a successor of a, so a . x_a is
// admissible.
inline TailPoint anchor_point(State a, const StateGraph& g, int cap = 64) {
  g.require_state(a);
  Word path;
  // Returns the completed point through an output parameter chain; DFS keeps
  // the path explicit so a revisit can split it into prefix + cycle.
  std::optional<TailPoint> found;
  auto dfs = [&](auto&& self, int limit) -> void {
    if (found) return;
    State last = path.back();
    for (State t : g.out_edges(last)) {
      auto hit = std::find(path.begin(), path.end(), t);
      if (hit != path.end()) {
        Word prefix(path.begin(), hit);
        Word cycle(hit, path.end());
        found = TailPoint(std::move(prefix), std::move(cycle), g);
        return;
      }
      if (static_cast<int>(path.size()) < limit) {
        path.push_back(t);
        self(self, limit);
        path.pop_back();
        if (found) return;
      }
    }
  };
  for (int limit = 1; limit <= cap && !found; ++limit) {
    for (State b : g.out_edges(a)) {
      path.assign(1, b);
      dfs(dfs, limit);
      if (found) break;
    }
  }
  if (!found)
    throw NoCycleReachableError("no cycle reachable from successors of " + g.name(a) +
                                " within depth " + std::to_string(cap));
  return *found;
}

// Nonempty admissible word standing for the cylinder [w0 ... wm].
struct Cylinder {
  Word word;
  Cylinder(Word w, const StateGraph& g) : word(std::move(w)) {
    if (word.empty()) throw InadmissibleError("empty cylinder word");
    if (!is_admissible(word, g)) throw InadmissibleError("inadmissible cylinder word");
  }
  bool contains(const TailPoint& x) const { return x.starts_with(word); }
};

}  // namespace tms
