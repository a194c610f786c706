#pragma once

// Built-in model zoo.  Each builder returns a Model bundling the transition
// graph, the potential, a distinguished origin, escape-orbit families, and
// naming / parsing hooks, so the CLI and the tests can refer to one object.
//
// State encodings are chosen deliberately: the int64 code order is the
// deterministic tie-break order for neighbor lists and cycle searches, so
// every builder documents its encoding next to the lambdas that use it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tms/graph.hpp"
#include "tms/green.hpp"
#include "tms/martin.hpp"
#include "tms/measure.hpp"
#include "tms/point.hpp"
#include "tms/potential.hpp"
#include "tms/rng.hpp"
#include "tms/transfer.hpp"

namespace tms {

// A one-parameter family of points escaping to (a candidate piece of) the
// boundary; at(n) is the n-th point of the family.
struct OrbitFamily {
  std::string name;
  int n_min = 1;
  std::function<TailPoint(int)> at;
};

struct Model {
  std::string name;
  std::shared_ptr<const StateGraph> graph;
  Potential potential = Potential::constant(0.0);
  State origin = 0;
  std::shared_ptr<const TransferOperator> op;  // null: default DP backend
  std::vector<OrbitFamily> orbits;
  std::function<State(const std::string&)> parse_state;
  std::function<int(State)> depth;              // coarse distance-from-core scale
  std::function<State(State)> escape_canonical; // stable representative of the
                                                // escape direction of a state
  std::function<TailPoint(State)> point_at;     // some point in T starting at s

  System system() const {
    return op ? System(graph, potential, op) : System(graph, potential);
  }
};

namespace detail {

// Zig-zag code for signed integers: 0, 1, -1, 2, -2 <-> 0, 1, 2, 3, 4.
// Positive states come before their negatives, so deterministic searches
// lean toward +infinity first.
inline State zig(std::int64_t z) { return z > 0 ? 2 * z - 1 : -2 * z; }
inline std::int64_t unzig(State e) { return e % 2 ? (e + 1) / 2 : -e / 2; }

inline std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UnknownStateError("cannot parse state '" + s + "'");
  }
  if (used != s.size()) throw UnknownStateError("cannot parse state '" + s + "'");
  return v;
}

inline void finalize(Model& m) {
  if (!m.escape_canonical) m.escape_canonical = [](State s) { return s; };
  if (!m.point_at) {
    auto g = m.graph;
    m.point_at = [g](State s) { return anchor_point(s, *g).prepended(s, *g); };
  }
  if (!m.depth) m.depth = [](State) { return 0; };
}

}  // namespace detail

// Single state with a self loop carrying potential alpha.  Green values are
// closed-form geometric sums, which makes this the calibration model.
inline Model self_loop(double alpha) {
  Model m;
  m.name = "self_loop";
  m.graph = std::make_shared<StateGraph>(
      [](State) { return std::vector<State>{0}; },
      [](State) { return std::vector<State>{0}; },
      [](State a) { return a == 0; },
      [](State) { return std::string("o"); });
  m.potential = Potential::constant(alpha);
  m.origin = 0;
  m.parse_state = [](const std::string& s) -> State {
    if (s == "o" || s == "0") return 0;
    throw UnknownStateError("self_loop has a single state named o");
  };
  detail::finalize(m);
  return m;
}

namespace detail {

// example1 codes: integer z -> 2 * zig(z) (even codes, order 0 < 1 < -1 < ...),
// primed n >= 1 -> 4n - 1 (the odd codes congruent to 3 mod 4), so the full
// order is 0 < 1 < 1' < -1 < 2 < 2' < -2 < ...
inline State e1_int(std::int64_t z) { return 2 * zig(z); }
inline State e1_primed(std::int64_t n) { return 4 * n - 1; }
inline bool e1_is_primed(State e) { return e % 2 == 1; }
inline std::int64_t e1_z(State e) { return unzig(e / 2); }       // even codes
inline std::int64_t e1_n(State e) { return (e + 1) / 4; }        // odd codes

}  // namespace detail

// Two rays of integers escaping in both directions, with a chain of primed
// states n' -> (n-1)' -> ... -> 1' -> 0 funneling every state back to the
// origin, and a constant potential alpha.  Two escape directions, one
// backward funnel: the standard two-point-boundary example.
inline Model example1(double alpha) {
  using namespace detail;
  Model m;
  m.name = "example1";
  auto out = [](State e) -> std::vector<State> {
    if (e1_is_primed(e)) {
      std::int64_t n = e1_n(e);
      if (n == 1) return {e1_int(0)};
      return {e1_primed(n - 1)};
    }
    std::int64_t z = e1_z(e);
    if (z == 0) return {e1_int(1), e1_int(-1)};
    return {e1_int(z + (z > 0 ? 1 : -1)), e1_primed(std::abs(z))};
  };
  auto in = [](State e) -> std::vector<State> {
    if (e1_is_primed(e)) {
      std::int64_t n = e1_n(e);
      return {e1_int(n), e1_int(-n), e1_primed(n + 1)};
    }
    std::int64_t z = e1_z(e);
    if (z == 0) return {e1_primed(1)};
    if (z == 1 || z == -1) return {e1_int(0)};
    return {e1_int(z - (z > 0 ? 1 : -1))};
  };
  auto valid = [](State e) { return e >= 0 && (e % 2 == 0 || e % 4 == 3); };
  auto name = [](State e) {
    if (e1_is_primed(e)) return std::to_string(e1_n(e)) + "'";
    return std::to_string(e1_z(e));
  };
  auto g = std::make_shared<StateGraph>(out, in, valid, name);
  m.graph = g;
  m.potential = Potential::constant(alpha);
  m.origin = e1_int(0);
  m.parse_state = [](const std::string& s) -> State {
    if (!s.empty() && s.back() == '\'') {
      std::int64_t n = parse_int(s.substr(0, s.size() - 1));
      if (n < 1) throw UnknownStateError("primed states start at 1'");
      return e1_primed(n);
    }
    return e1_int(parse_int(s));
  };
  m.depth = [](State e) {
    return static_cast<int>(e1_is_primed(e) ? e1_n(e) : std::abs(e1_z(e)));
  };
  auto orbit_at = [g](int n, int sgn) {
    Word prefix{e1_int(sgn * n)};
    for (std::int64_t k = n; k >= 1; --k) prefix.push_back(e1_primed(k));
    prefix.push_back(e1_int(0));
    Word cycle{e1_int(1), e1_primed(1), e1_int(0)};
    return TailPoint(std::move(prefix), std::move(cycle), *g);
  };
  m.orbits.push_back({"plus", 1, [orbit_at](int n) { return orbit_at(n, +1); }});
  m.orbits.push_back({"minus", 1, [orbit_at](int n) { return orbit_at(n, -1); }});
  detail::finalize(m);
  return m;
}

// Integers with a -> a + 1 always and a -> -a whenever -a <= 0, constant
// potential alpha.  The one escaping ray (0, 1, 2, ...) is not eventually
// periodic, so no OrbitFamily can represent it; see delta_ray_measure for
// the measure sitting on it.
inline Model example2(double alpha) {
  using detail::unzig;
  using detail::zig;
  Model m;
  m.name = "example2";
  auto out = [](State e) -> std::vector<State> {
    std::int64_t z = unzig(e);
    std::vector<State> v{zig(z + 1)};
    if (z >= 0) v.push_back(zig(-z));
    return v;
  };
  auto in = [](State e) -> std::vector<State> {
    std::int64_t z = unzig(e);
    std::vector<State> v{zig(z - 1)};
    if (z <= 0) v.push_back(zig(-z));
    return v;
  };
  auto g = std::make_shared<StateGraph>(
      out, in, [](State e) { return e >= 0; },
      [](State e) { return std::to_string(unzig(e)); });
  m.graph = g;
  m.potential = Potential::constant(alpha);
  m.origin = 0;
  m.parse_state = [](const std::string& s) { return detail::zig(detail::parse_int(s)); };
  m.depth = [](State e) { return static_cast<int>(std::abs(unzig(e))); };
  detail::finalize(m);
  return m;
}

// The coordinates of the escaping ray (0, 1, 2, ...) of example2, encoded.
inline Word example2_ray(std::size_t n) {
  Word w;
  w.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.push_back(detail::zig(static_cast<std::int64_t>(i)));
  return w;
}

// Point mass on the example2 ray: mu([w]) = 1 when w is a prefix of
// (0, 1, 2, ...), else 0.  Shift-invariant in the DLR sense but conformal
// for no lambda.
inline CylinderMeasure delta_ray_measure() {
  return CylinderMeasure("delta_ray", [](std::span<const State> w) {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] != detail::zig(static_cast<std::int64_t>(i))) return MassBar::exact(0.0);
    return MassBar::exact(1.0);
  });
}

// Nearest-neighbor walk on the integers stepping +1 with probability p and
// -1 with probability 1 - p; phi(a, b) = log of the step probability.
inline Model biased_walk_z(double p) {
  using detail::unzig;
  using detail::zig;
  if (!(p > 0.0 && p < 1.0)) throw InadmissibleError("biased_walk_z needs 0 < p < 1");
  Model m;
  m.name = "biased_walk_z";
  auto step = [](State e) -> std::vector<State> {
    std::int64_t z = unzig(e);
    return {zig(z + 1), zig(z - 1)};
  };
  auto g = std::make_shared<StateGraph>(
      step, step, [](State e) { return e >= 0; },
      [](State e) { return std::to_string(unzig(e)); });
  m.graph = g;
  m.potential = Potential::markov([p](State ea, State eb) {
    std::int64_t a = unzig(ea), b = unzig(eb);
    if (b == a + 1) return std::log(p);
    if (b == a - 1) return std::log1p(-p);
    throw InadmissibleError("biased_walk_z potential off an edge");
  });
  m.origin = zig(0);
  m.parse_state = [](const std::string& s) { return detail::zig(detail::parse_int(s)); };
  m.depth = [](State e) { return static_cast<int>(std::abs(unzig(e))); };
  auto orbit_at = [g](int n, int sgn) {
    Word prefix;
    for (int k = n; k >= 1; --k) prefix.push_back(detail::zig(sgn * k));
    Word cycle{detail::zig(0), detail::zig(1)};
    return TailPoint(std::move(prefix), std::move(cycle), *g);
  };
  m.orbits.push_back({"plus", 1, [orbit_at](int n) { return orbit_at(n, +1); }});
  m.orbits.push_back({"minus", 1, [orbit_at](int n) { return orbit_at(n, -1); }});
  // Kernel profiles depend on a state only through where it sits, so escape
  // directions can be represented by a clamped copy of the end state.
  m.escape_canonical = [](State e) {
    std::int64_t z = unzig(e);
    std::int64_t c = std::min<std::int64_t>(std::abs(z), 24);
    return zig(z >= 0 ? c : -c);
  };
  detail::finalize(m);
  return m;
}

// Nearest-neighbor walk on the nonnegative integers drifting toward 0:
// from a >= 1 step to a - 1 with probability p > 1/2 and to a + 1 with
// probability 1 - p; from 0 stay with probability p (the lazy loop keeps the
// chain aperiodic).  The potential reads the step backwards,
// phi(a, b) = log P(b -> a), so iterating the operator on an indicator runs
// the chain forward and converges to its stationary weights.
inline Model inward_drift_walk(double p) {
  if (!(p > 0.5 && p < 1.0)) throw InadmissibleError("inward_drift_walk needs 1/2 < p < 1");
  Model m;
  m.name = "inward_drift_walk";
  auto nbr = [](State a) -> std::vector<State> {
    if (a == 0) return {0, 1};
    return {a - 1, a + 1};
  };
  auto g = std::make_shared<StateGraph>(
      nbr, nbr, [](State a) { return a >= 0; },
      [](State a) { return std::to_string(a); });
  m.graph = g;
  m.potential = Potential::markov([p](State a, State b) {
    if (b == a + 1) return std::log(p);       // P(a+1 -> a) = p
    if (b == a - 1) return std::log1p(-p);    // P(a-1 -> a) = 1 - p
    if (a == 0 && b == 0) return std::log(p); // P(0 -> 0) = p
    throw InadmissibleError("inward_drift_walk potential off an edge");
  });
  m.origin = 0;
  m.parse_state = [](const std::string& s) -> State {
    std::int64_t v = detail::parse_int(s);
    if (v < 0) throw UnknownStateError("inward_drift_walk lives on the nonnegative integers");
    return v;
  };
  m.depth = [](State a) { return static_cast<int>(a); };
  detail::finalize(m);
  return m;
}

// ---------------------------------------------------------------------------
// Regular tree.

// Lazily grown registry of tree nodes.  Node 0 is the root; every other node
// records its parent and the edge letter in 0..d-1 (a child never reuses the
// letter of the edge to its parent, so every vertex has degree exactly d).
// Codes are assigned in creation order, which is deterministic for a
// deterministic sequence of calls.
class TreeRegistry {
 public:
  explicit TreeRegistry(int degree) : d_(degree) {
    if (degree < 3) throw InadmissibleError("regular_tree needs degree >= 3");
    nodes_.push_back(Node{-1, -1, 0, {}, false});
  }

  int degree() const { return d_; }

  bool valid(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return id >= 0 && id < static_cast<State>(nodes_.size());
  }

  std::vector<State> neighbors(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    expand(id);
    std::vector<State> v = nodes_[id].children;
    if (nodes_[id].parent >= 0) v.push_back(nodes_[id].parent);
    return v;
  }

  int depth(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return nodes_[id].depth;
  }

  // Letter of the first edge on the root-to-id path; -1 for the root.
  int first_letter(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (nodes_[id].depth > 1) id = nodes_[id].parent;
    return nodes_[id].letter;
  }

  State child(State id, int letter) const {
    std::lock_guard<std::mutex> lock(mu_);
    expand(id);
    for (State c : nodes_[id].children)
      if (nodes_[c].letter == letter) return c;
    throw UnknownStateError("no child with letter " + std::to_string(letter));
  }

  State parent(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (nodes_[id].parent < 0) throw UnknownStateError("the root has no parent");
    return nodes_[id].parent;
  }

  int distance(State a, State b) const {
    std::lock_guard<std::mutex> lock(mu_);
    int steps = 0;
    while (nodes_[a].depth > nodes_[b].depth) a = nodes_[a].parent, ++steps;
    while (nodes_[b].depth > nodes_[a].depth) b = nodes_[b].parent, ++steps;
    while (a != b) a = nodes_[a].parent, b = nodes_[b].parent, steps += 2;
    return steps;
  }

  std::string name(State id) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (id == 0) return "o";
    std::string s;
    while (id != 0) {
      std::string part = std::to_string(nodes_[id].letter);
      s = s.empty() ? part : part + "." + s;
      id = nodes_[id].parent;
    }
    return s;
  }

  State parse(const std::string& s) const {
    if (s == "o") return 0;
    State id = 0;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t dot = s.find('.', pos);
      std::string part = s.substr(pos, dot == std::string::npos ? dot : dot - pos);
      std::int64_t letter = detail::parse_int(part);
      if (letter < 0 || letter >= d_)
        throw UnknownStateError("tree edge letter out of range in '" + s + "'");
      id = child(id, static_cast<int>(letter));
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    return id;
  }

 private:
  struct Node {
    State parent;
    int letter;
    int depth;
    std::vector<State> children;
    bool expanded;
  };

  void expand(State id) const {
    if (id < 0 || id >= static_cast<State>(nodes_.size()))
      throw UnknownStateError("unknown tree node " + std::to_string(id));
    if (nodes_[id].expanded) return;
    // Copy out before push_back: growing nodes_ invalidates references.
    const int parent_letter = nodes_[id].letter;
    const int depth = nodes_[id].depth;
    for (int l = 0; l < d_; ++l) {
      if (id != 0 && l == parent_letter) continue;  // would backtrack the parent edge
      nodes_.push_back(Node{id, l, depth + 1, {}, false});
      nodes_[id].children.push_back(static_cast<State>(nodes_.size()) - 1);
    }
    nodes_[id].expanded = true;
  }

  int d_;
  mutable std::mutex mu_;
  mutable std::vector<Node> nodes_;
};

// Transfer operator for the simple random walk potential phi = -log d on a
// d-regular tree.  The generic backward DP is exponential here (balls grow
// like (d-1)^n), but by homogeneity (L^n 1_[w])(x) only depends on the tree
// distance between the end of w and the head of x, and the distance profile
// obeys a one-dimensional recursion.
class TreeTransferOperator : public TransferOperator {
 public:
  TreeTransferOperator(std::shared_ptr<const TreeRegistry> reg,
                       std::shared_ptr<const StateGraph> graph)
      : reg_(std::move(reg)), graph_(std::move(graph)) {
    levels_.push_back({1.0});  // w_0(j) = [j == 0]
  }

  double apply_n(std::span<const State> w, const TailPoint& x, int n) const override {
    if (w.empty()) throw InadmissibleError("empty cylinder word");
    const int m = static_cast<int>(w.size());
    for (int i = 0; i + 1 < m; ++i)
      if (!graph_->has_edge(w[i], w[i + 1])) return 0.0;
    const double d = static_cast<double>(reg_->degree());
    if (n < m) {
      // The cylinder pins all remaining coordinates; just match them.
      for (int i = n; i < m; ++i)
        if (x.at(static_cast<std::size_t>(i - n)) != w[i]) return 0.0;
      return std::pow(d, -n);
    }
    const int k = n - m + 1;
    const int j = reg_->distance(w.back(), x.head());
    return std::pow(d, -(m - 1)) * walk_weight(k, j);
  }

  using TransferOperator::partition_n;
  double partition_n(std::span<const State> coords, int n) const override {
    for (std::size_t i = 0; i + 1 < coords.size(); ++i)
      if (!graph_->has_edge(coords[i], coords[i + 1])) return 0.0;
    // Every state has exactly d predecessors of weight 1/d each, so the
    // n-step partition sum over any fiber is exactly 1.
    return n >= 0 ? 1.0 : 0.0;
  }

 private:
  // w_k(j): total weight of length-k walks from a vertex to a vertex at
  // distance j, each step weighing 1/d.  From distance j the walk moves to
  // distance j - 1 one way and j + 1 the other d - 1 ways (at j = 0 all d
  // moves lead to distance 1).
  double walk_weight(int k, int j) const {
    std::lock_guard<std::mutex> lock(mu_);
    const double d = static_cast<double>(reg_->degree());
    while (static_cast<int>(levels_.size()) <= k) {
      const std::vector<double>& prev = levels_.back();
      std::vector<double> next(prev.size() + 1, 0.0);
      auto at = [&prev](int i) {
        return i >= 0 && i < static_cast<int>(prev.size()) ? prev[i] : 0.0;
      };
      next[0] = at(1);  // all d neighbors sit at distance 1: d * at(1) / d
      for (int i = 1; i < static_cast<int>(next.size()); ++i)
        next[i] = (at(i - 1) + (d - 1) * at(i + 1)) / d;
      levels_.push_back(std::move(next));
    }
    const std::vector<double>& row = levels_[k];
    return j < static_cast<int>(row.size()) ? row[j] : 0.0;
  }

  std::shared_ptr<const TreeRegistry> reg_;
  std::shared_ptr<const StateGraph> graph_;
  mutable std::mutex mu_;
  mutable std::vector<std::vector<double>> levels_;
};

// Simple random walk on the d-regular tree: every edge in both directions,
// phi = -log d.  One escape-orbit family per subtree of the root, each
// walking out the ray that alternates letters l, l+1 mod d.
inline Model regular_tree(int degree) {
  Model m;
  m.name = "regular_tree";
  auto reg = std::make_shared<TreeRegistry>(degree);
  auto g = std::make_shared<StateGraph>(
      [reg](State a) { return reg->neighbors(a); },
      [reg](State a) { return reg->neighbors(a); },
      [reg](State a) { return reg->valid(a); },
      [reg](State a) { return reg->name(a); });
  m.graph = g;
  m.potential = Potential::constant(-std::log(static_cast<double>(degree)));
  m.op = std::make_shared<TreeTransferOperator>(reg, g);
  m.origin = 0;
  m.parse_state = [reg](const std::string& s) { return reg->parse(s); };
  m.depth = [reg](State a) { return reg->depth(a); };
  auto ray_node = [reg, degree](int l, int k) {
    State id = 0;
    for (int i = 0; i < k; ++i) id = reg->child(id, i % 2 == 0 ? l : (l + 1) % degree);
    return id;
  };
  auto down_path = [reg](State id) {
    Word w{id};
    while (id != 0) {
      id = reg->parent(id);
      w.push_back(id);
    }
    return w;
  };
  for (int l = 0; l < degree; ++l) {
    m.orbits.push_back({"ray" + std::to_string(l), 1, [g, reg, ray_node, down_path, l](int n) {
                          Word prefix = down_path(ray_node(l, n));
                          Word cycle{reg->child(0, 0), 0};
                          return TailPoint(std::move(prefix), std::move(cycle), *g);
                        }});
  }
  m.escape_canonical = [reg, ray_node](State s) {
    int k = std::min(reg->depth(s), 12);
    if (k == 0) return s;
    return ray_node(reg->first_letter(s), k);
  };
  m.point_at = [g, reg, down_path](State s) {
    Word prefix = down_path(s);
    Word cycle{reg->child(0, 0), 0};
    return TailPoint(std::move(prefix), std::move(cycle), *g);
  };
  detail::finalize(m);
  return m;
}

// ---------------------------------------------------------------------------
// First-passage series.

// Certified sum over n of lambda^{-n} * (weight of length-n paths a -> b
// whose intermediate states avoid b).  The n = 0 term is 1 exactly when
// a == b, making the a == b case the certified return series.
inline GreenValue first_passage(State a, State b, double lambda, const System& sys,
                                const GreenOptions& opt = {}) {
  const StateGraph& g = *sys.graph;
  g.require_state(a);
  g.require_state(b);
  if (sys.potential.range() != 2)
    throw RangeTooLargeError("first_passage needs a Markovian potential");
  SeriesCertifier cert(opt);
  if (auto done = cert.feed(a == b ? 1.0 : 0.0)) return *done;
  const double log_lambda = std::log(lambda);
  std::unordered_map<State, double> front{{a, 1.0}};
  for (int n = 1;; ++n) {
    double term = 0.0;
    std::unordered_map<State, double> next;
    for (const auto& [s, mass] : front) {
      for (State t : g.out_edges(s)) {
        double w = mass * std::exp(sys.potential.eval(s, t));
        if (t == b)
          term += w;
        else
          next[t] += w;
      }
    }
    front = std::move(next);
    if (auto done = cert.feed(term * std::exp(-log_lambda * n))) return *done;
  }
}

// ---------------------------------------------------------------------------
// Hitting distributions over an atlas.

struct WalkOptions {
  long n_samples = 1000;
  int horizon = 200;       // steps simulated per sample
  int escape_depth = 10;   // a run is resolved when depth reaches this
  std::uint64_t seed = 0;
  double z = 2.5758293035489004;  // 99% two-sided normal quantile
  GreenOptions green;
};

struct HittingDistribution {
  std::vector<std::int64_t> counts;  // per atlas cluster
  std::int64_t unresolved = 0;       // runs that had not escaped by the horizon
  std::int64_t total = 0;
  std::vector<std::pair<double, double>> interval;  // Wilson bounds on the
                                                    // resolved-share per cluster
};

inline std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double phat = static_cast<double>(k) / static_cast<double>(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

// Simulates the chain with step weights proportional to e^{phi(s, t)} over
// out-edges, classifies each resolved endpoint by the atlas cluster whose
// centroid is rho-nearest to the kernel profile of its canonical escape
// representative (memoized: for Markovian potentials the profile depends on
// the state alone).
inline HittingDistribution hitting_distribution(const Model& model, State start, double lambda,
                                                const BoundaryAtlas& atlas, const RhoMetric& rho,
                                                const WalkOptions& opt) {
  if (atlas.clusters.empty()) throw InadmissibleError("hitting over an empty atlas");
  System sys = model.system();
  const StateGraph& g = *model.graph;
  Rng rng(opt.seed);
  HittingDistribution out;
  out.counts.assign(atlas.clusters.size(), 0);
  out.total = opt.n_samples;
  std::unordered_map<State, std::vector<double>> step_weights;
  std::unordered_map<State, int> cluster_of;
  for (long i = 0; i < opt.n_samples; ++i) {
    State s = start;
    for (int t = 0; t < opt.horizon; ++t) {
      const std::vector<State>& succ = g.out_edges(s);
      auto it = step_weights.find(s);
      if (it == step_weights.end()) {
        std::vector<double> w;
        w.reserve(succ.size());
        for (State u : succ) w.push_back(std::exp(sys.potential.eval(s, u)));
        it = step_weights.emplace(s, std::move(w)).first;
      }
      s = succ[rng.discrete(it->second)];
    }
    if (model.depth(s) < opt.escape_depth) {
      ++out.unresolved;
      continue;
    }
    State canon = model.escape_canonical(s);
    auto found = cluster_of.find(canon);
    if (found == cluster_of.end()) {
      KernelProfile prof = kernel_profile(model.point_at(canon), lambda, atlas.test_set,
                                          model.origin, sys, opt.green);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < atlas.clusters.size(); ++c) {
        double dd = rho.distance(prof, atlas.clusters[c].centroid);
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<int>(c);
        }
      }
      found = cluster_of.emplace(canon, best).first;
    }
    ++out.counts[found->second];
  }
  const std::int64_t resolved = out.total - out.unresolved;
  for (std::int64_t c : out.counts) out.interval.push_back(wilson_interval(c, resolved, opt.z));
  return out;
}

}  // namespace tms
