#pragma once

// Measures enter only through cylinder valuations: a rule mapping admissible
// words to masses with certified error bars (exact rules report zero-width
// bars).  Everything downstream -- conformality and excessiveness residuals,
// the Riesz decomposition, DLR consistency, thermodynamic limits -- is
// arithmetic over finitely many such valuations.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tms/green.hpp"
#include "tms/martin.hpp"
#include "tms/transfer.hpp"

namespace tms {

struct MassBar {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  static MassBar exact(double v) { return {v, v, v}; }
  double half_width() const { return 0.5 * (hi - lo); }
};

class CylinderMeasure {
 public:
  using Rule = std::function<MassBar(std::span<const State>)>;

  CylinderMeasure(std::string kind, Rule rule)
      : kind_(std::move(kind)), rule_(std::move(rule)) {}

  const std::string& kind() const { return kind_; }

  MassBar mass(std::span<const State> w) const { return rule_(w); }
  MassBar mass(const Word& w) const { return rule_(std::span<const State>(w)); }

  // Linear extension to simple functions, bars added per term.
  MassBar eval(const SimpleFunction& f) const {
    MassBar out{0.0, 0.0, 0.0};
    for (const auto& [c, w] : f.terms) {
      MassBar m = mass(w);
      out.value += c * m.value;
      out.lo += c * (c >= 0 ? m.lo : m.hi);
      out.hi += c * (c >= 0 ? m.hi : m.lo);
    }
    return out;
  }

 private:
  std::string kind_;
  Rule rule_;
};

// G(., x0 | lambda) as a cylinder valuation with certified bars.
inline CylinderMeasure green_measure(const TailPoint& x0, double lambda, System sys,
                                     GreenOptions opt = {}) {
  return CylinderMeasure("green", [sys = std::move(sys), x0, lambda, opt](std::span<const State> w) {
    GreenValue g = green(SimpleFunction::indicator(Word(w.begin(), w.end())), x0,
                         lambda, sys, opt);
    return MassBar{g.mid(), g.lo(), g.hi()};
  });
}

struct ConformalityResidual {
  Word word;
  double residual = 0.0;   // | mu(L 1_[w]) - lambda mu([w]) |
  double bar = 0.0;        // measurement slack from the bars
};

// Residuals of the eigen-equation of the dual operator on a battery of
// cylinders.  Zero residuals (to bars) on all refinements characterize
// conformal measures; a measure can pass DLR and still fail here.
inline std::vector<ConformalityResidual> conformality_residual(
    const CylinderMeasure& mu, double lambda, const std::vector<Word>& battery,
    const System& sys) {
  std::vector<ConformalityResidual> out;
  for (const Word& w : battery) {
    SimpleFunction pushed = push_L(SimpleFunction::indicator(w), sys.potential, *sys.graph);
    MassBar lhs = mu.eval(pushed);
    MassBar rhs = mu.mass(w);
    ConformalityResidual r;
    r.word = w;
    r.residual = std::abs(lhs.value - lambda * rhs.value);
    r.bar = lhs.half_width() + lambda * rhs.half_width();
    out.push_back(std::move(r));
  }
  return out;
}

struct ExcessivenessReport {
  bool excessive = true;
  std::vector<ConformalityResidual> slack;  // residual field reused as slack
};

// lambda mu([w]) - mu(L 1_[w]) >= 0 (up to bars) on the battery.
inline ExcessivenessReport excessiveness_check(const CylinderMeasure& mu, double lambda,
                                               const std::vector<Word>& battery,
                                               const System& sys) {
  ExcessivenessReport rep;
  for (const Word& w : battery) {
    SimpleFunction pushed = push_L(SimpleFunction::indicator(w), sys.potential, *sys.graph);
    MassBar lhs = mu.eval(pushed);
    MassBar rhs = mu.mass(w);
    ConformalityResidual r;
    r.word = w;
    r.residual = lambda * rhs.value - lhs.value;  // the slack
    r.bar = lhs.half_width() + lambda * rhs.half_width();
    if (r.residual < -r.bar - 1e-12) rep.excessive = false;
    rep.slack.push_back(std::move(r));
  }
  return rep;
}

struct RieszAtom {
  TailPoint at;
  double weight = 0.0;   // nu-charge of the deepest tested cylinder around at
  double drift = 0.0;    // charge variation across tested depths (stability)
};

struct RieszDecomposition {
  // nu = mu - lambda^{-1} L* mu on the tested battery.
  std::vector<ConformalityResidual> nu_charge;  // residual field = charge
  std::vector<RieszAtom> atoms;
  // Per test function: the trajectory n -> mu(f) minus the n-term truncation
  // of the recovered potential part sum_atoms w . G(f, atom).  For a pure
  // Green potential this equals lambda^{-n} (L*^n mu)(f); its limit is the
  // invariant part mu*(f).
  std::vector<std::vector<double>> mu_star_partials;
  // | mu(f) - ( sum_atoms weight . G(f, atom) + mu*_partial(f) ) | per f.
  std::vector<double> identity_residual;
};

struct RieszParams {
  int n_max = 60;          // iterations for the mu* partials
  int atom_depth = 6;      // cylinder depth when reading atom charges
  GreenOptions green;
  double negative_tol = 1e-9;  // charge below -tol (beyond bars) => not excessive
};

// Splits an excessive measure into a potential part (integral of Green
// functions against nu) and an invariant remainder, all evaluated on finite
// batteries.  atom_candidates tells the decomposition where nu might sit;
// charges elsewhere stay visible through nu_charge on the battery.
inline RieszDecomposition riesz_decompose(const CylinderMeasure& mu, double lambda,
                                          const std::vector<Word>& battery,
                                          const std::vector<SimpleFunction>& test_functions,
                                          const std::vector<TailPoint>& atom_candidates,
                                          const System& sys, const RieszParams& par = {}) {
  RieszDecomposition dec;
  auto nu = [&](const Word& w) -> ConformalityResidual {
    SimpleFunction pushed = push_L(SimpleFunction::indicator(w), sys.potential, *sys.graph);
    MassBar lhs = mu.eval(pushed);
    MassBar rhs = mu.mass(w);
    ConformalityResidual r;
    r.word = w;
    r.residual = rhs.value - lhs.value / lambda;
    r.bar = rhs.half_width() + lhs.half_width() / lambda;
    return r;
  };
  for (const Word& w : battery) {
    ConformalityResidual c = nu(w);
    if (c.residual < -c.bar - par.negative_tol)
      throw NotExcessiveError("negative charge " + std::to_string(c.residual) +
                              " on a battery cylinder: measure is not excessive");
    dec.nu_charge.push_back(std::move(c));
  }
  for (const TailPoint& x : atom_candidates) {
    RieszAtom atom{x, 0.0, 0.0};
    double prev = 0.0;
    for (int d = 1; d <= par.atom_depth; ++d) {
      ConformalityResidual c = nu(x.coords(static_cast<std::size_t>(d)));
      if (d > 1) atom.drift = std::max(atom.drift, std::abs(c.residual - prev));
      prev = c.residual;
      atom.weight = c.residual;
    }
    dec.atoms.push_back(std::move(atom));
  }
  for (const SimpleFunction& f : test_functions) {
    std::vector<double> partials;
    const double mu_f = mu.eval(f).value;
    double removed = 0.0;  // sum_{k < n} lambda^{-k} sum_atoms w . (L^k f)(atom)
    double scale = 1.0;
    for (int n = 0; n <= par.n_max; ++n) {
      partials.push_back(mu_f - removed);
      for (const RieszAtom& atom : dec.atoms)
        if (atom.weight > 0.0)
          removed += scale * atom.weight * eval_Ln(f, atom.at, n, sys);
      scale /= lambda;
    }
    double potential_part = 0.0;
    for (const RieszAtom& atom : dec.atoms)
      if (atom.weight > 0.0)
        potential_part += atom.weight * green(f, atom.at, lambda, sys, par.green).mid();
    dec.identity_residual.push_back(
        std::abs(mu.eval(f).value - (potential_part + partials.back())));
    dec.mu_star_partials.push_back(std::move(partials));
  }
  return dec;
}

struct DlrResidual {
  Word word;        // the conditioned prefix (or the moved word b)
  Word tail;        // tail word fixing the conditioning class
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double bar = 0.0;
};

// Conditional-expectation form: for each length-n word w and tail word t (the
// finite-depth stand-in for a backward fiber),
//   mu([w . t]) / sum_v mu([v . t])  vs  e^{phi_n(w t)} / sum_v e^{phi_n(v t)}
// with v ranging over all admissible length-n words feeding into t.  The tail
// must carry at least range - 1 coordinates so phi_n is determined.
inline std::vector<DlrResidual> dlr_check_conditional(const CylinderMeasure& mu, int n,
                                                      const std::vector<Word>& words,
                                                      const std::vector<Word>& tails,
                                                      const System& sys) {
  int r = sys.potential.range();
  std::vector<DlrResidual> out;
  for (const Word& t : tails) {
    if (static_cast<int>(t.size()) < r - 1)
      throw InadmissibleError("tail word shorter than range - 1");
    if (!is_admissible(t, *sys.graph)) throw InadmissibleError("inadmissible tail word");
    // Enumerate the fiber: admissible length-n words v with v -> t_0.
    std::vector<Word> fiber;
    Word cur;
    auto grow = [&](auto&& self, State next) -> void {
      cur.insert(cur.begin(), next);
      if (static_cast<int>(cur.size()) == n) fiber.push_back(cur);
      else
        for (State b : sys.graph->in_edges(cur.front())) self(self, b);
      cur.erase(cur.begin());
    };
    for (State b : sys.graph->in_edges(t.front())) grow(grow, b);
    double mass_total = 0.0, weight_total = 0.0, mass_bar = 0.0;
    std::vector<double> masses(fiber.size()), weights(fiber.size());
    for (std::size_t i = 0; i < fiber.size(); ++i) {
      Word vt = fiber[i];
      vt.insert(vt.end(), t.begin(), t.end());
      MassBar m = mu.mass(vt);
      masses[i] = m.value;
      mass_bar += m.half_width();
      mass_total += m.value;
      weights[i] = std::exp(birkhoff_sum(sys.potential, vt, n));
      weight_total += weights[i];
    }
    if (!(mass_total > 0.0))
      throw ZeroMassConditioningError("conditioning class has zero mass");
    for (const Word& w : words) {
      if (static_cast<int>(w.size()) != n)
        throw InadmissibleError("conditioned words must have length n");
      DlrResidual res;
      res.word = w;
      res.tail = t;
      Word wt = w;
      wt.insert(wt.end(), t.begin(), t.end());
      bool ok = is_admissible(wt, *sys.graph);
      res.lhs = ok ? mu.mass(wt).value / mass_total : 0.0;
      res.rhs = ok ? std::exp(birkhoff_sum(sys.potential, wt, n)) / weight_total : 0.0;
      res.residual = std::abs(res.lhs - res.rhs);
      res.bar = ok ? (mu.mass(wt).half_width() + res.lhs * mass_bar) / mass_total : 0.0;
      out.push_back(std::move(res));
    }
  }
  return out;
}

// Ratio form: words a, b of equal length n with the same final state define a
// tail-preserving swap [a . t] -> [b . t], and DLR consistency forces
//   mu([b . t]) = mu([a . t]) exp(phi_n(b t) - phi_n(a t)).
inline DlrResidual dlr_check_ratio(const CylinderMeasure& mu, const Word& a, const Word& b,
                                   const Word& t, const System& sys) {
  if (a.size() != b.size() || a.empty())
    throw InadmissibleError("ratio check needs words of one length");
  if (a.back() != b.back())
    throw InadmissibleError("ratio check needs words with the same final state");
  int r = sys.potential.range();
  if (static_cast<int>(t.size()) < r - 1)
    throw InadmissibleError("tail word shorter than range - 1");
  int n = static_cast<int>(a.size());
  Word at = a, bt = b;
  at.insert(at.end(), t.begin(), t.end());
  bt.insert(bt.end(), t.begin(), t.end());
  if (!is_admissible(at, *sys.graph) || !is_admissible(bt, *sys.graph))
    throw InadmissibleError("swap words do not connect to the tail");
  double factor = std::exp(birkhoff_sum(sys.potential, bt, n) -
                           birkhoff_sum(sys.potential, at, n));
  MassBar ma = mu.mass(at), mb = mu.mass(bt);
  DlrResidual res;
  res.word = b;
  res.tail = t;
  res.lhs = mb.value;
  res.rhs = ma.value * factor;
  res.residual = std::abs(res.lhs - res.rhs);
  res.bar = mb.half_width() + ma.half_width() * factor;
  return res;
}

enum class ThermoScheme { pos_recurrent, null_recurrent, transient };

// Finite-stage thermodynamic limits mu_N(f), one value per stage:
//   pos_recurrent:  (L^N f)(x) / (L^N 1_[o])(x)
//   null_recurrent: sum_{n<N} lambda^{-n} (L^n f)(x) / same for 1_[o]
//   transient:      K(f, x_N) along a model-supplied escaping orbit
// The transient scheme takes the orbit explicitly: an eventually periodic
// point cannot escape, so "T^N x" is represented by the orbit's N-th entry.
inline std::vector<double> thermo_limit(ThermoScheme scheme, const TailPoint& x,
                                        const SimpleFunction& f, State origin,
                                        double lambda, int stages, const System& sys) {
  std::vector<double> out;
  SimpleFunction ind_o = SimpleFunction::indicator(Word{origin});
  if (scheme == ThermoScheme::pos_recurrent) {
    for (int n = 1; n <= stages; ++n) {
      double den = eval_Ln(ind_o, x, n, sys);
      out.push_back(den > 0 ? eval_Ln(f, x, n, sys) / den
                            : std::numeric_limits<double>::quiet_NaN());
    }
  } else if (scheme == ThermoScheme::null_recurrent) {
    double num = 0.0, den = 0.0, scale = 1.0;
    for (int n = 0; n < stages; ++n) {
      num += scale * eval_Ln(f, x, n, sys);
      den += scale * eval_Ln(ind_o, x, n, sys);
      scale /= lambda;
      out.push_back(den > 0 ? num / den : std::numeric_limits<double>::quiet_NaN());
    }
  } else {
    throw InadmissibleError("transient scheme needs an escaping orbit overload");
  }
  return out;
}

inline std::vector<double> thermo_limit(const std::vector<TailPoint>& orbit,
                                        const SimpleFunction& f, State origin,
                                        double lambda, const System& sys,
                                        const GreenOptions& opt = {}) {
  std::vector<double> out;
  for (const TailPoint& x : orbit)
    out.push_back(martin_kernel(f, x, lambda, origin, sys, opt).value);
  return out;
}

}  // namespace tms
