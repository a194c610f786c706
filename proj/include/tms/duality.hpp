#pragma once

// The reversed shift as a forward system: a point of the negative half-axis
// read outward (u_k = z_{-k}) is a forward point of the reversed graph, and
// the reversed potential phi-(u) = phi(u_{r-1}, ..., u_0) differs from phi by
// the coboundary of psi(z) = -sum_{j=1}^{r-1} phi(z_{-j} .. z_{-j+r-1}).
// Conformal measures of the reversed system correspond one-to-one to
// eigenfunctions of the forward operator through the pairing function chi.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tms/green.hpp"
#include "tms/measure.hpp"
#include "tms/pressure.hpp"
#include "tms/rng.hpp"
#include "tms/transfer.hpp"

namespace tms {

struct ReversedSystem {
  std::shared_ptr<const StateGraph> graph;  // arrows reversed
  Potential potential;                      // phi- in forward coordinates
  // psi on the window (z_{-(r-1)}, ..., z_{r-2}) of length 2(r-1).
  std::function<double(std::span<const State>)> psi;

  System system() const { return System(graph, potential); }
  System system(std::shared_ptr<const TransferOperator> op) const {
    return System(graph, potential, std::move(op));
  }
};

inline std::shared_ptr<const StateGraph> reverse_graph(
    std::shared_ptr<const StateGraph> g) {
  return std::make_shared<StateGraph>(
      [g](State a) { return g->in_edges(a); }, [g](State a) { return g->out_edges(a); },
      [g](State a) { return g->is_state(a); }, [g](State a) { return g->name(a); });
}

inline ReversedSystem reverse_system(std::shared_ptr<const StateGraph> g,
                                     const Potential& phi) {
  int r = phi.range();
  Potential flipped(r, [phi](std::span<const State> w) {
    Word rev(w.rbegin(), w.rend());
    return phi.eval(rev);
  });
  auto psi = [phi, r](std::span<const State> window) {
    if (static_cast<int>(window.size()) != 2 * (r - 1))
      throw InadmissibleError("psi window must have 2 (range - 1) states");
    // window[i] = z_{i - (r-1)}; the j-th summand starts at z_{-j}.
    double s = 0.0;
    for (int j = 1; j <= r - 1; ++j) s -= phi.eval(window.subspan(r - 1 - j, r));
    return s;
  };
  return ReversedSystem{reverse_graph(std::move(g)), std::move(flipped), std::move(psi)};
}

// phi+(z) - phi-(z-) - psi(z) + psi(T z) on a finite two-sided window; zero
// identically when the reversal is coherent.  z[origin_index] is coordinate 0
// and the window must extend range - 1 states on both sides (plus one more to
// the right for the shifted psi).
inline double cohomology_residual(const Potential& phi, const ReversedSystem& rev,
                                  std::span<const State> z, int origin_index) {
  int r = phi.range();
  if (origin_index < r - 1 || origin_index + r >= static_cast<int>(z.size()) + 0)
    throw InadmissibleError("two-sided window too short for the cohomology check");
  double fwd = phi.eval(z.subspan(origin_index, r));
  Word back;
  for (int k = 0; k < r; ++k) back.push_back(z[origin_index - k]);
  double bwd = rev.potential.eval(back);
  double psi_z = rev.psi(z.subspan(origin_index - (r - 1), 2 * (r - 1)));
  double psi_tz = rev.psi(z.subspan(origin_index - (r - 1) + 1, 2 * (r - 1)));
  return std::abs(fwd - bwd - psi_z + psi_tz);
}

// Pairing function for the point x: chi_x = sum over predecessors b of x_0 of
// e^{phi(b, x_0)} 1_[b] as a function on the reversed system.  Markovian
// potentials only (the pairing factors through single coordinates there).
inline SimpleFunction chi(const TailPoint& x, const Potential& phi, const StateGraph& g) {
  if (phi.range() != 2)
    throw RangeTooLargeError("chi needs a Markovian potential; recode longer ranges");
  SimpleFunction f;
  for (State b : g.in_edges(x.head()))
    f.terms.emplace_back(std::exp(phi.eval(b, x.head())), Word{b});
  return f;
}

// Table-backed eigenfunction candidate of the forward operator.
struct Eigenfunction {
  std::function<double(State)> table;
  double lambda = 1.0;
};

// | (L h)(x) - lambda h(x) | for points with the given base states; for a
// Markovian potential and a table function this depends on the base alone.
inline std::vector<double> eigen_residual(const Eigenfunction& h,
                                          std::span<const State> bases,
                                          const Potential& phi, const StateGraph& g) {
  if (phi.range() != 2)
    throw RangeTooLargeError("eigen_residual needs a Markovian potential");
  std::vector<double> out;
  for (State s : bases) {
    double acc = 0.0;
    for (State b : g.in_edges(s)) acc += std::exp(phi.eval(b, s)) * h.table(b);
    out.push_back(std::abs(acc - h.lambda * h.table(s)));
  }
  return out;
}

// The correspondence mu -> h(x) = mu(chi_x): a lambda-conformal measure on
// the reversed system induces a lambda-eigenfunction of the forward operator.
// conformality_battery (single-state words) is verified first when nonempty.
inline Eigenfunction pi_map(const CylinderMeasure& mu_rev, double lambda,
                            const Potential& phi,
                            std::shared_ptr<const StateGraph> fwd_graph,
                            const ReversedSystem& rev,
                            const std::vector<Word>& conformality_battery = {},
                            double conformal_tol = 1e-8) {
  if (phi.range() != 2) throw RangeTooLargeError("pi_map needs a Markovian potential");
  if (!conformality_battery.empty()) {
    System rsys = rev.system();
    for (const auto& res : conformality_residual(mu_rev, lambda, conformality_battery, rsys))
      if (res.residual > conformal_tol + res.bar)
        throw InadmissibleError("pi_map input fails conformality on the battery");
  }
  Eigenfunction h;
  h.lambda = lambda;
  // Capture by value; the table only touches mu on single-state cylinders.
  h.table = [mu_rev, phi, g = std::move(fwd_graph)](State s) {
    double acc = 0.0;
    for (State b : g->in_edges(s)) acc += std::exp(phi.eval(b, s)) * mu_rev.mass(Word{b}).value;
    return acc;
  };
  return h;
}

// Reconstruction along the inverse correspondence: the reversed-system path
// measure  mu([u_0 .. u_n]) = lambda^{-n} e^{sum phi-(u_i, u_{i+1})} h(u_n)
// is lambda-conformal exactly when h is a forward eigenfunction.  Stated for
// a general system so random-walk path measures reuse it: the measure is
// conformal on `sys` iff  sum_{b in out(a)} e^{phi(a,b)} h(b) = lambda h(a).
inline CylinderMeasure measure_from_harmonic(const Eigenfunction& h, System sys,
                                             double check_tol = 1e-10) {
  if (sys.potential.range() != 2)
    throw RangeTooLargeError("path measures need a Markovian potential");
  return CylinderMeasure("path", [h, sys = std::move(sys), check_tol](std::span<const State> w) {
    auto guard = [&](State a) {
      double acc = 0.0;
      for (State b : sys.graph->out_edges(a))
        acc += std::exp(sys.potential.eval(a, b)) * h.table(b);
      if (std::abs(acc - h.lambda * h.table(a)) >
          check_tol * std::max(1.0, std::abs(h.lambda * h.table(a))))
        throw NotHarmonicError("mean-value identity fails at state " + sys.graph->name(a));
    };
    if (w.empty()) throw InadmissibleError("empty cylinder word");
    if (!is_admissible(w, *sys.graph)) return MassBar::exact(0.0);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      guard(w[i]);
      s += sys.potential.eval(w[i], w[i + 1]) - std::log(h.lambda);
    }
    guard(w.back());
    return MassBar::exact(std::exp(s) * h.table(w.back()));
  });
}

// sup over the states of | sum_b e^{phi(a,b)} h(b) - lambda h(a) |.
inline std::vector<double> harmonic_residual(const Eigenfunction& h, const System& sys,
                                             std::span<const State> states) {
  std::vector<double> out;
  for (State a : states) {
    double acc = 0.0;
    for (State b : sys.graph->out_edges(a)) acc += std::exp(sys.potential.eval(a, b)) * h.table(b);
    out.push_back(std::abs(acc - h.lambda * h.table(a)));
  }
  return out;
}

struct DualityVerdict {
  TransienceVerdict forward;
  TransienceVerdict reversed;
  bool consistent = true;  // no certified disagreement
};

// lambda-transience is invariant under reversal; certified verdicts on both
// orientations must agree (inconclusive on either side is tolerated).
inline DualityVerdict transience_duality_check(State origin, double lambda,
                                               const System& fwd, const System& rev,
                                               const GreenOptions& opt = {}) {
  DualityVerdict v;
  SimpleFunction f = SimpleFunction::indicator(Word{origin});
  v.forward = classify(f, anchor_point(origin, *fwd.graph), lambda, fwd, opt);
  v.reversed = classify(f, anchor_point(origin, *rev.graph), lambda, rev, opt);
  v.consistent = v.forward.kind == Transience::inconclusive ||
                 v.reversed.kind == Transience::inconclusive ||
                 v.forward.kind == v.reversed.kind;
  return v;
}

struct RatioTrajectory {
  std::vector<State> states;   // s_0 = base, then sampled backward extensions
  std::vector<double> ratios;  // f(s_n) / h(s_n)
};

// Ratio-limit experiment: extend the point backward step by step, drawing the
// predecessor t of the current state s with probability
//   e^{phi(t, s)} h(t) / (lambda h(s))
// (the eigen-equation makes this a probability), and record f/h along the
// way.  For an eigenfunction pair f, h with |f| <= c h the recorded sequence
// is a bounded martingale and settles to a boundary-dependent limit.
inline std::vector<RatioTrajectory> poisson_ratio_limit(
    const Eigenfunction& f, const Eigenfunction& h, State base, int n_steps,
    int n_samples, std::uint64_t seed, const System& sys) {
  if (sys.potential.range() != 2)
    throw RangeTooLargeError("the backward sampler needs a Markovian potential");
  Rng rng(seed);
  std::vector<RatioTrajectory> out;
  for (int k = 0; k < n_samples; ++k) {
    RatioTrajectory traj;
    State s = base;
    traj.states.push_back(s);
    traj.ratios.push_back(f.table(s) / h.table(s));
    for (int n = 0; n < n_steps; ++n) {
      const auto& preds = sys.graph->in_edges(s);
      std::vector<double> w;
      w.reserve(preds.size());
      for (State t : preds) w.push_back(std::exp(sys.potential.eval(t, s)) * h.table(t));
      s = preds[rng.discrete(w)];
      traj.states.push_back(s);
      traj.ratios.push_back(f.table(s) / h.table(s));
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace tms
