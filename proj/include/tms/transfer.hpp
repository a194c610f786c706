#pragma once

// Iterated transfer operator (L f)(x) = sum over one-step preimages y of
// e^{phi(y)} f(y), applied to finite linear combinations of cylinder
// indicators.  Iterates are evaluated by dynamic programming over weighted
// backward paths; for Markovian potentials all cylinders based at one point
// share a single path-weight table, which the operator caches.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "tms/graph.hpp"
#include "tms/point.hpp"
#include "tms/potential.hpp"

namespace tms {

// Finite combination sum_i c_i 1_[w_i] with admissible words.
struct SimpleFunction {
  std::vector<std::pair<double, Word>> terms;

  static SimpleFunction indicator(Word w) {
    SimpleFunction f;
    f.terms.emplace_back(1.0, std::move(w));
    return f;
  }

  double eval(const TailPoint& x) const {
    double v = 0.0;
    for (const auto& [c, w] : terms)
      if (x.starts_with(w)) v += c;
    return v;
  }

  bool nonnegative() const {
    for (const auto& [c, w] : terms)
      if (c < 0) return false;
    return true;
  }

  // Merge duplicate cylinder words and drop exact zeros.
  SimpleFunction normalized() const {
    std::map<Word, double> acc;
    for (const auto& [c, w] : terms) acc[w] += c;
    SimpleFunction out;
    for (auto& [w, c] : acc)
      if (c != 0.0) out.terms.emplace_back(c, w);
    return out;
  }
};

class TransferOperator {
 public:
  virtual ~TransferOperator() = default;

  // (L^n 1_[w])(x), linear domain.  n = 0 is the indicator itself.
  virtual double apply_n(std::span<const State> w, const TailPoint& x, int n) const = 0;

  // Partition sum over the n-th backward fiber of x:
  //   sum over { y : T^n y = T^n x } of e^{phi_n(y)}.
  // The overload taking raw coordinates needs the first n + range - 1
  // coordinates of x; it exists for points that are not eventually periodic.
  virtual double partition_n(const TailPoint& x, int n) const {
    return partition_n(x.coords(static_cast<std::size_t>(n) + range_hint()), n);
  }
  virtual double partition_n(std::span<const State> coords, int n) const = 0;

 protected:
  virtual std::size_t range_hint() const { return 2; }
};

// Generic backward-path DP.  Markovian fast path: u_k(s) = weighted count of
// admissible length-k paths s -> x_0, grown level by level and cached per
// base state, so Green-type series and whole kernel profiles reuse one table.
// General finite range runs a window-keyed DP per call.
class DpTransferOperator : public TransferOperator {
 public:
  DpTransferOperator(std::shared_ptr<const StateGraph> g, Potential phi)
      : graph_ptr_(std::move(g)), graph_(*graph_ptr_), phi_(std::move(phi)) {}

  double apply_n(std::span<const State> w, const TailPoint& x, int n) const override {
    if (w.empty()) throw InadmissibleError("empty cylinder word");
    if (!is_admissible(w, graph_)) return 0.0;
    if (n == 0) return x.starts_with(w) ? 1.0 : 0.0;
    if (phi_.range() == 2) return apply_markov(w, x, n);
    return window_dp(w, x, n);
  }

  using TransferOperator::partition_n;
  double partition_n(std::span<const State> coords, int n) const override {
    int r = phi_.range();
    if (static_cast<int>(coords.size()) < n + r - 1)
      throw InadmissibleError("partition sum needs n + range - 1 coordinates");
    if (!is_admissible(coords.first(static_cast<std::size_t>(n + r - 1)), graph_))
      throw InadmissibleError("inadmissible coordinate word");
    if (n == 0) return 1.0;
    if (r == 2) {
      // sum of u_n over all start states, table based at coordinate n of x.
      const auto& lv = levels(coords[n], n);
      double s = 0.0;
      for (const auto& [st, v] : lv[n]) s += v;
      return s;
    }
    return window_partition(coords, n);
  }

 protected:
  std::size_t range_hint() const override {
    return static_cast<std::size_t>(phi_.range());
  }

 private:
  using Level = std::unordered_map<State, double>;

  // u tables for base state x0: u_0 = {x0: 1}, and
  //   u_{k+1}(s) = sum over t in out(s) of e^{phi(s, t)} u_k(t).
  const std::vector<Level>& levels(State x0, int upto) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto& lv = u_[x0];
    if (lv.empty()) lv.push_back(Level{{x0, 1.0}});
    while (static_cast<int>(lv.size()) <= upto) {
      const Level& prev = lv.back();
      Level next;
      for (const auto& [t, val] : prev)
        for (State s : graph_.in_edges(t))
          next[s] += std::exp(phi_.eval(s, t)) * val;
      lv.push_back(std::move(next));
    }
    return lv;
  }

  double apply_markov(std::span<const State> w, const TailPoint& x, int n) const {
    int m = static_cast<int>(w.size());
    if (n < m) {
      // The backward word is w_0 .. w_{n-1} and x itself must carry the rest.
      for (int j = 0; n + j < m; ++j)
        if (x.at(static_cast<std::size_t>(j)) != w[n + j]) return 0.0;
      // All n contributing windows (i, i+1) lie inside w since n <= m - 1.
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += phi_.eval(w[i], w[i + 1]);
      return std::exp(s);
    }
    // n >= m: fixed prefix w, then a free path of n - m + 1 edges from the
    // last word state to x_0.
    double prefix = 0.0;
    for (int i = 0; i + 1 < m; ++i) prefix += phi_.eval(w[i], w[i + 1]);
    int k = n - m + 1;
    const auto& lv = levels(x.head(), k);
    auto it = lv[k].find(w[m - 1]);
    if (it == lv[k].end()) return 0.0;
    return std::exp(prefix) * it->second;
  }

  // Window-keyed DP for range r > 2.  Coordinates 0 .. n-1 are the backward
  // word (the first min(|w|, n) of them pinned to w), coordinates >= n come
  // from x; every length-r window starting below n contributes its weight.
  double window_dp(std::span<const State> w, const TailPoint& x, int n) const {
    int r = phi_.range();
    int m = static_cast<int>(w.size());
    for (int j = 0; n + j < m; ++j)
      if (x.at(static_cast<std::size_t>(j)) != w[n + j]) return 0.0;
    auto fixed = [&](int pos) -> std::optional<State> {
      if (pos < std::min(m, n)) return w[pos];
      if (pos >= n) return x.at(static_cast<std::size_t>(pos - n));
      return std::nullopt;
    };
    int last_pos = n + r - 2;  // last coordinate any contributing window needs
    std::map<Word, double> cur;  // key: trailing min(pos+1, r-1) coordinates
    {
      State s0 = *fixed(0);  // position 0 always pinned (m >= 1, n >= 1)
      cur.emplace(Word{s0}, 1.0);
    }
    for (int pos = 1; pos <= last_pos; ++pos) {
      std::map<Word, double> next;
      for (const auto& [key, val] : cur) {
        State prev = key.back();
        auto step = [&](State t) {
          if (!graph_.has_edge(prev, t)) return;
          Word nk = key;
          nk.push_back(t);
          double weight = val;
          if (pos >= r - 1) {
            // nk now holds coordinates pos-r+1 .. pos; that window starts at
            // pos - r + 1 < n exactly when it contributes to phi_n.
            if (pos - r + 1 < n)
              weight *= std::exp(phi_.eval(std::span<const State>(nk).last(r)));
            nk.erase(nk.begin());
          }
          next[nk] += weight;
        };
        if (auto f = fixed(pos)) step(*f);
        else
          for (State t : graph_.out_edges(prev)) step(t);
      }
      cur.swap(next);
    }
    double total = 0.0;
    for (const auto& [key, val] : cur) total += val;
    return total;
  }

  double window_partition(std::span<const State> coords, int n) const {
    int r = phi_.range();
    // The backward word is free, so the DP runs from the pinned tail toward
    // position 0 (in-edges keep it finite), keyed on the leading r-1
    // coordinates; the window starting at pos is complete once its head moves
    // past pos + r - 1.
    std::map<Word, double> rev;  // key: coordinates pos .. pos + r - 2
    {
      Word key(coords.begin() + n, coords.begin() + n + (r - 1));
      rev.emplace(std::move(key), 1.0);
    }
    for (int pos = n - 1; pos >= 0; --pos) {
      std::map<Word, double> prev;
      for (const auto& [key, val] : rev) {
        for (State b : graph_.in_edges(key.front())) {
          Word nk;
          nk.push_back(b);
          nk.insert(nk.end(), key.begin(), key.end());
          // nk = coordinates pos .. pos + r - 1: the window starting at pos.
          double weight = val * std::exp(phi_.eval(std::span<const State>(nk).first(r)));
          nk.pop_back();
          prev[nk] += weight;
        }
      }
      rev.swap(prev);
    }
    double total = 0.0;
    for (const auto& [key, val] : rev) total += val;
    return total;
  }

  std::shared_ptr<const StateGraph> graph_ptr_;
  const StateGraph& graph_;
  Potential phi_;
  mutable std::mutex mu_;
  mutable std::unordered_map<State, std::vector<Level>> u_;
};

// The pieces every algorithm needs: transition structure, potential, and the
// operator backend that evaluates iterates on it.  Shared ownership keeps
// closures built from a System (measures, eigenfunction tables) valid on
// their own.
struct System {
  std::shared_ptr<const StateGraph> graph;
  Potential potential;
  std::shared_ptr<const TransferOperator> op;

  System(std::shared_ptr<const StateGraph> g, Potential phi)
      : graph(std::move(g)),
        potential(phi),
        op(std::make_shared<DpTransferOperator>(graph, std::move(phi))) {}

  System(std::shared_ptr<const StateGraph> g, Potential phi,
         std::shared_ptr<const TransferOperator> custom)
      : graph(std::move(g)), potential(std::move(phi)), op(std::move(custom)) {}
};

// (L^n f)(x) by linearity over the cylinder terms.
inline double eval_Ln(const SimpleFunction& f, const TailPoint& x, int n, const System& sys) {
  double v = 0.0;
  for (const auto& [c, w] : f.terms) v += c * sys.op->apply_n(w, x, n);
  return v;
}

// Symbolic one-step image L 1_[a0 .. am]:
//   m >= 1:  e^{phi(a0, a1)} 1_[a1 .. am]
//   m == 0:  sum over successors b of e^{phi(a, b)} 1_[b]
// Markovian potentials only; longer ranges must go through eval_Ln.
inline SimpleFunction push_L(const SimpleFunction& f, const Potential& phi,
                             const StateGraph& g) {
  if (phi.range() != 2)
    throw RangeTooLargeError("push_L needs a Markovian potential; use eval_Ln");
  SimpleFunction out;
  for (const auto& [c, w] : f.terms) {
    if (w.empty()) throw InadmissibleError("empty cylinder word");
    if (!is_admissible(w, g)) continue;
    if (w.size() >= 2) {
      out.terms.emplace_back(c * std::exp(phi.eval(w[0], w[1])), Word(w.begin() + 1, w.end()));
    } else {
      for (State b : g.out_edges(w[0]))
        out.terms.emplace_back(c * std::exp(phi.eval(w[0], b)), Word{b});
    }
  }
  return out.normalized();
}

inline SimpleFunction push_L_n(SimpleFunction f, const Potential& phi,
                               const StateGraph& g, int n) {
  for (int i = 0; i < n; ++i) f = push_L(f, phi, g);
  return f;
}

inline double backward_partition_sum(const TailPoint& x, int n, const System& sys) {
  return sys.op->partition_n(x, n);
}

inline double backward_partition_sum(std::span<const State> coords, int n, const System& sys) {
  return sys.op->partition_n(coords, n);
}

}  // namespace tms
