#pragma once

// Finite-range potentials: phi(x) depends on the first `range` coordinates
// only (range >= 2).  The rule is lazy so infinite-alphabet models can define
// phi by formula; explicit tables are wrapped in the same interface.

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "tms/graph.hpp"
#include "tms/point.hpp"

namespace tms {

class Potential {
 public:
  using Rule = std::function<double(std::span<const State>)>;

  Potential(int range, Rule rule) : range_(range), rule_(std::move(rule)) {
    if (range_ < 2) throw InadmissibleError("potential range must be >= 2");
  }

  static Potential constant(double alpha) {
    return Potential(2, [alpha](std::span<const State>) { return alpha; });
  }

  static Potential markov(std::function<double(State, State)> f) {
    return Potential(2, [f = std::move(f)](std::span<const State> w) {
      return f(w[0], w[1]);
    });
  }

  static Potential from_table(int range, std::map<Word, double> table) {
    return Potential(range, [table = std::move(table)](std::span<const State> w) {
      auto it = table.find(Word(w.begin(), w.end()));
      if (it == table.end()) throw InadmissibleError("word outside the potential table");
      return it->second;
    });
  }

  int range() const { return range_; }

  // Value on the window (x_0, ..., x_{range-1}).
  double eval(std::span<const State> window) const {
    if (static_cast<int>(window.size()) != range_)
      throw InadmissibleError("potential window of wrong length");
    return rule_(window);
  }

  double eval(State a, State b) const {
    if (range_ != 2) throw RangeTooLargeError("pair evaluation needs a range-2 potential");
    State w[2] = {a, b};
    return rule_(std::span<const State>(w, 2));
  }

  double eval_at(const TailPoint& x) const {
    Word w = x.coords(static_cast<std::size_t>(range_));
    return rule_(w);
  }

  // phi - log(lambda), the potential normalized for eigenvalue lambda.
  Potential shifted_by_log(double log_lambda) const {
    auto rule = rule_;
    return Potential(range_, [rule, log_lambda](std::span<const State> w) {
      return rule(w) - log_lambda;
    });
  }

 private:
  int range_;
  Rule rule_;
};

// Birkhoff sum of the first n shift iterates along word . tail.  The word may
// be empty; coordinates beyond it come from the tail point.
inline double birkhoff_sum(const Potential& p, std::span<const State> word,
                           const TailPoint& tail, int n) {
  int need = n - 1 + p.range();
  Word coords(word.begin(), word.end());
  while (static_cast<int>(coords.size()) < need)
    coords.push_back(tail.at(coords.size() - word.size()));
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += p.eval(std::span<const State>(coords).subspan(i, p.range()));
  return s;
}

// Birkhoff sum over a word long enough on its own (|w| >= n - 1 + range).
inline double birkhoff_sum(const Potential& p, std::span<const State> word, int n) {
  if (static_cast<int>(word.size()) < n - 1 + p.range())
    throw InadmissibleError("word too short for the requested Birkhoff sum");
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += p.eval(word.subspan(i, p.range()));
  return s;
}

// m-th variation: sup |phi(x) - phi(y)| over pairs agreeing on the first m-1
// coordinates.  Zero for m > range.  The rule is lazy, so the supremum is
// taken over admissible range-words inside the ball around the seeds; callers
// choose the ball to cover the states they will actually touch.
inline double variation(const Potential& p, int m, const StateGraph& g,
                        std::span<const State> seeds, int radius) {
  if (m > p.range()) return 0.0;
  if (m < 1) throw InadmissibleError("variation order must be >= 1");
  std::vector<State> ball = state_ball(seeds, radius, g);
  std::unordered_set<State> inside(ball.begin(), ball.end());
  // Enumerate admissible range-words staying inside the ball, grouped by the
  // first m-1 coordinates.
  std::map<Word, std::pair<double, double>> spread;  // key -> (min, max)
  Word word;
  auto visit = [&](auto&& self) -> void {
    if (static_cast<int>(word.size()) == p.range()) {
      double v = p.eval(word);
      Word key(word.begin(), word.begin() + (m - 1));
      auto [it, fresh] = spread.emplace(key, std::make_pair(v, v));
      if (!fresh) {
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      }
      return;
    }
    for (State t : g.out_edges(word.back())) {
      if (!inside.count(t)) continue;
      word.push_back(t);
      self(self);
      word.pop_back();
    }
  };
  for (State s : ball) {
    word.assign(1, s);
    visit(visit);
  }
  double var = 0.0;
  for (const auto& [key, mm] : spread) var = std::max(var, mm.second - mm.first);
  return var;
}

}  // namespace tms
