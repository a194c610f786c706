// End-to-end acceptance checks.  Each criterion prints exactly one PASS/FAIL
// line with its pinned tolerance and measured quantity; the process exits
// nonzero if any criterion fails.  Oracles are independent of the library
// paths they certify (closed forms, counting DPs, truncated linear solves).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tms/duality.hpp"
#include "tms/martin.hpp"
#include "tms/measure.hpp"
#include "tms/model_file.hpp"
#include "tms/models.hpp"
#include "tms/pressure.hpp"

using namespace tms;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

int g_failures = 0;

void criterion(int id, const std::string& label, double time_limit_s,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << "exception: " << e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0 && secs > time_limit_s) {
    out.ok = false;
    out.detail << (out.detail.tellp() > 0 ? "; " : "") << "over the " << time_limit_s
               << " s budget";
  }
  if (!out.ok) ++g_failures;
  std::printf("%s  %2d  %s (%.2f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, label.c_str(), secs,
              out.detail.tellp() > 0 ? " -- " : "", out.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

double trailing_oscillation(const std::vector<double>& v, int window) {
  double lo = v.back(), hi = v.back();
  for (int i = static_cast<int>(v.size()) - window; i < static_cast<int>(v.size()); ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  return hi - lo;
}

// All admissible length-n words feeding into the tail's first state.
std::vector<Word> fiber_words(int n, const Word& tail, const StateGraph& g) {
  std::vector<Word> fiber;
  Word cur;
  auto grow = [&](auto&& self, State next) -> void {
    cur.insert(cur.begin(), next);
    if (static_cast<int>(cur.size()) == n)
      fiber.push_back(cur);
    else
      for (State b : g.in_edges(cur.front())) self(self, b);
    cur.erase(cur.begin());
  };
  for (State b : g.in_edges(tail.front())) grow(grow, b);
  return fiber;
}

// Unanchored stochastic path measure.
CylinderMeasure path_measure(const Model& m) {
  MeasureSpec spec{"path", "path", {}};
  return materialize_measure(spec, m, 1.0);
}

// Forward boundary atlas of the two-sided escape model: two entries per
// escape direction so the reported cluster diameters are nontrivial.
BoundaryAtlas escape_model_atlas(const Model& m, const std::vector<Word>& ts,
                                 const RhoMetric& rho, const System& sys) {
  std::vector<std::vector<TailPoint>> orbits(4);
  for (int n = 1; n <= 16; ++n) {
    orbits[0].push_back(m.orbits[0].at(n));
    orbits[1].push_back(m.orbits[0].at(n + 2));
    orbits[2].push_back(m.orbits[1].at(n));
    orbits[3].push_back(m.orbits[1].at(n + 2));
  }
  AtlasOptions opt;
  opt.eps = 1e-3;
  opt.green.tol = 1e-11;
  return boundary_atlas(orbits, 1.0, ts, m.origin, sys, rho, opt);
}

}  // namespace

int main() {
  // 1. Certified Green value on the one-state loop against the closed form
  //    of the geometric series.
  criterion(1, "green value on the self loop matches the geometric series", 1.0, [](Outcome& o) {
    Model m = self_loop(-1.0);
    GreenOptions opt;
    opt.tol = 1e-12;
    GreenValue g = green(SimpleFunction::indicator(Word{m.origin}), m.point_at(m.origin), 1.0,
                         m.system(), opt);
    double truth = 1.0 / (1.0 - std::exp(-1.0));
    o.require(std::abs(g.mid() - truth) <= 1e-10,
              "|G - closed form| = " + fmt(std::abs(g.mid() - truth)) + " > 1e-10");
    o.require(g.lo() <= truth && truth <= g.hi(), "certified interval misses the closed form");
    o.require(g.ratio > 0.0 && g.ratio < 1.0, "no geometric certificate produced");
  });

  // 2. Kernel identity along the two escape directions: the kernel at the
  //    plus orbit equals the minus-orbit kernel scaled by the certified
  //    first-passage factor from -1 to 1 (independent counting DP confirms
  //    the factor's partial sums).
  criterion(2, "escape-orbit kernel identity via the first-passage factor", 30.0, [](Outcome& o) {
    Model m = example1(-1.0);
    System sys = m.system();
    GreenOptions opt;
    opt.tol = 1e-12;
    State s_minus = m.parse_state("-1"), s_plus = m.parse_state("1");
    GreenValue F = first_passage(s_minus, s_plus, 1.0, sys, opt);
    double dp = testing::first_passage_partial(-1.0, s_minus, s_plus, 120, *m.graph);
    o.require(std::abs(F.mid() - dp) <= 1e-10 + F.tail_bound,
              "first-passage series disagrees with the counting DP by " +
                  fmt(std::abs(F.mid() - dp)));
    SimpleFunction f = SimpleFunction::indicator(Word{s_minus});
    for (int n = 5; n <= 20; ++n) {
      KernelEntry kp = martin_kernel(f, m.orbits[0].at(n), 1.0, m.origin, sys, opt);
      KernelEntry km = martin_kernel(f, m.orbits[1].at(n), 1.0, m.origin, sys, opt);
      // Certified interval of F * K(minus) must meet the interval of K(plus).
      double lo = F.lo() * km.lo, hi = F.hi() * km.hi;
      bool overlap = kp.hi >= lo && hi >= kp.lo;
      o.require(overlap, "intervals separate at orbit index " + std::to_string(n) +
                             ": gap " + fmt(std::max(lo - kp.hi, kp.lo - hi)));
    }
  });

  // 3. Boundary atlas: two clusters on the forward shift, one on the
  //    reversed shift, at resolution 1e-3 with diameters below 1e-4.
  criterion(3, "boundary atlas resolves two forward ends and one reversed end", 120.0,
            [](Outcome& o) {
    Model m = example1(-1.0);
    System sys = m.system();
    std::vector<Word> ts = default_test_set(m.origin, 2, 2, *m.graph);
    RhoMetric rho = RhoMetric::constructive(ts, m.origin, 1.0, sys, 0.0);
    BoundaryAtlas fwd = escape_model_atlas(m, ts, rho, sys);
    o.require(fwd.clusters.size() == 2, "forward clusters: expected 2, got " +
                                            std::to_string(fwd.clusters.size()));
    for (const BoundaryCluster& c : fwd.clusters)
      o.require(c.diameter < 1e-4, "forward cluster diameter " + fmt(c.diameter) + " >= 1e-4");

    // Reversed orientation: arrows flipped, constant weight unchanged.
    ReversedSystem rev = reverse_system(m.graph, m.potential);
    System rsys = rev.system();
    auto rev_orbit = [&](int sgn, int n) {
      Word prefix;
      for (int k = n; k >= 1; --k) prefix.push_back(m.parse_state(std::to_string(sgn * k)));
      Word cycle{m.parse_state("0"), m.parse_state("1'"), m.parse_state("1")};
      return TailPoint(std::move(prefix), std::move(cycle), *rev.graph);
    };
    std::vector<std::vector<TailPoint>> orbits(2);
    for (int n = 1; n <= 16; ++n) {
      orbits[0].push_back(rev_orbit(+1, n));
      orbits[1].push_back(rev_orbit(-1, n));
    }
    std::vector<Word> rts = default_test_set(m.origin, 2, 2, *rev.graph);
    RhoMetric rrho = RhoMetric::constructive(rts, m.origin, 1.0, rsys, 0.0);
    AtlasOptions opt;
    opt.eps = 1e-3;
    opt.green.tol = 1e-11;
    BoundaryAtlas bwd = boundary_atlas(orbits, 1.0, rts, m.origin, rsys, rrho, opt);
    o.require(bwd.clusters.size() == 1, "reversed clusters: expected 1, got " +
                                            std::to_string(bwd.clusters.size()));
    for (const BoundaryCluster& c : bwd.clusters)
      o.require(c.diameter < 1e-4, "reversed cluster diameter " + fmt(c.diameter) + " >= 1e-4");
  });

  // 4. Operator iterates agree with exhaustive backward-word enumeration on
  //    every model, short cylinders, n <= 6.
  criterion(4, "operator iterates match exhaustive backward enumeration", 0.0, [](Outcome& o) {
    std::vector<Model> zoo{example1(-1.0),  example2(-0.8),
                           biased_walk_z(2.0 / 3.0), regular_tree(3),
                           inward_drift_walk(0.7),   self_loop(-1.0)};
    for (const Model& m : zoo) {
      System sys = m.system();
      TailPoint x = m.point_at(m.origin);
      // Length <= 3 admissible words starting inside the radius-2 ball.
      std::vector<Word> words;
      Word cur;
      auto rec = [&](auto&& self, int len) -> void {
        if (static_cast<int>(cur.size()) == len) {
          words.push_back(cur);
          return;
        }
        for (State t : m.graph->out_edges(cur.back())) {
          cur.push_back(t);
          self(self, len);
          cur.pop_back();
        }
      };
      for (State s : state_ball(Word{m.origin}, 2, *m.graph))
        for (int len = 1; len <= 3; ++len) {
          cur = {s};
          rec(rec, len);
        }
      for (const Word& w : words) {
        SimpleFunction f = SimpleFunction::indicator(w);
        for (int n = 0; n <= 6; ++n) {
          double fast = eval_Ln(f, x, n, sys);
          double slow = testing::brute_Ln(f, x, n, sys);
          double scale = std::max({1.0, std::abs(fast), std::abs(slow)});
          if (std::abs(fast - slow) > 1e-12 * scale) {
            o.require(false, m.name + ": |fast - brute| = " + fmt(std::abs(fast - slow)) +
                                 " at n = " + std::to_string(n));
            return;
          }
        }
      }
    }
  });

  // 5. Stochastic path measures satisfy both Gibbsian consistency checks;
  //    the single-ray point mass satisfies them too yet fails the
  //    eigen-equation of the dual operator at every tested lambda.
  criterion(5, "path measures are Gibbs-consistent; the ray mass is DLR but not conformal", 0.0,
            [](Outcome& o) {
    Model m = biased_walk_z(2.0 / 3.0);
    System sys = m.system();
    CylinderMeasure mu = path_measure(m);
    for (int n = 1; n <= 4; ++n) {
      Word tail{detail::zig(n % 2), detail::zig(n % 2 + 1)};
      std::vector<Word> fiber = fiber_words(n, tail, *m.graph);
      for (const DlrResidual& r : dlr_check_conditional(mu, n, fiber, {tail}, sys))
        o.require(r.residual < 1e-12, "conditional residual " + fmt(r.residual) + " at n = " +
                                          std::to_string(n));
      for (std::size_t i = 0; i < fiber.size(); ++i)
        for (std::size_t j = i + 1; j < fiber.size(); ++j) {
          if (fiber[i].back() != fiber[j].back()) continue;
          double r = dlr_check_ratio(mu, fiber[i], fiber[j], tail, sys).residual;
          o.require(r < 1e-12, "ratio residual " + fmt(r) + " at n = " + std::to_string(n));
        }
    }

    Model e2 = example2(-0.8);
    System esys = e2.system();
    CylinderMeasure ray = delta_ray_measure();
    for (int n = 1; n <= 4; ++n) {
      Word tail{detail::zig(n), detail::zig(n + 1)};
      std::vector<Word> fiber = fiber_words(n, tail, *e2.graph);
      for (const DlrResidual& r : dlr_check_conditional(ray, n, fiber, {tail}, esys))
        o.require(r.residual < 1e-12, "ray conditional residual " + fmt(r.residual));
      for (std::size_t i = 0; i < fiber.size(); ++i)
        for (std::size_t j = i + 1; j < fiber.size(); ++j)
          if (fiber[i].back() == fiber[j].back())
            o.require(dlr_check_ratio(ray, fiber[i], fiber[j], tail, esys).residual < 1e-12,
                      "ray ratio residual too large");
    }
    std::vector<Word> battery{Word{detail::zig(0)}, Word{detail::zig(0), detail::zig(0)},
                              Word{detail::zig(0), detail::zig(1)}};
    for (double lambda : {0.5, 1.0, std::exp(-0.8), 2.0}) {
      double worst = 0.0;
      for (const auto& r : conformality_residual(ray, lambda, battery, esys))
        worst = std::max(worst, r.residual);
      o.require(worst > 1e-3, "conformality failure invisible at lambda " + fmt(lambda) +
                                  " (worst residual " + fmt(worst) + ")");
    }
  });

  // 6. Riesz split of a Green-potential measure: unit point charge at the
  //    base point, vanishing invariant part, reconstruction identity.
  criterion(6, "riesz split of a green potential is a pure point charge", 0.0, [](Outcome& o) {
    Model m = example1(-1.0);
    System sys = m.system();
    TailPoint x0 = m.point_at(m.origin);
    GreenOptions gopt;
    gopt.tol = 1e-12;
    CylinderMeasure mu = green_measure(x0, 1.0, sys, gopt);
    std::vector<Word> battery;
    for (State s : state_ball(Word{m.origin}, 2, *m.graph)) {
      battery.push_back(Word{s});
      for (State t : m.graph->out_edges(s)) battery.push_back(Word{s, t});
    }
    std::vector<SimpleFunction> fs{SimpleFunction::indicator(Word{m.origin}),
                                   SimpleFunction::indicator(Word{m.parse_state("1")})};
    RieszParams par;
    par.n_max = 100;
    par.atom_depth = 4;
    par.green = gopt;
    RieszDecomposition dec = riesz_decompose(mu, 1.0, battery, fs, {x0}, sys, par);
    for (const auto& c : dec.nu_charge) {
      double expect = x0.starts_with(c.word) ? 1.0 : 0.0;
      if (expect == 0.0)
        o.require(std::abs(c.residual) < 1e-8,
                  "off-atom charge " + fmt(std::abs(c.residual)) + " >= 1e-8");
      else
        o.require(std::abs(c.residual - 1.0) < 1e-8, "atom charge off unit by " +
                                                         fmt(std::abs(c.residual - 1.0)));
    }
    for (const auto& partials : dec.mu_star_partials)
      o.require(std::abs(partials.back()) < 1e-8,
                "invariant-part partial " + fmt(std::abs(partials.back())) + " >= 1e-8");
    for (double r : dec.identity_residual)
      o.require(r < 1e-8, "reconstruction residual " + fmt(r) + " >= 1e-8");
  });

  // 7. Transience verdicts agree across orientation reversal on a lambda
  //    grid clear of the convergence threshold, and the conformal-measure
  //    pairing produces a certified eigenfunction.
  criterion(7, "transience verdicts match across reversal; the pairing yields an eigenfunction",
            0.0, [](Outcome& o) {
    std::vector<Model> zoo{example1(-1.0), biased_walk_z(2.0 / 3.0), self_loop(-1.0)};
    for (const Model& m : zoo) {
      System sys = m.system();
      PressureEstimate pres = gurevich_pressure(m.origin, 40, sys);
      double crit = std::exp(pres.extrapolated);
      o.require(std::isfinite(crit), m.name + ": no pressure estimate");
      ReversedSystem rev = reverse_system(m.graph, m.potential);
      System rsys = rev.system();
      GreenOptions opt;
      opt.divergence_sum = 1e3;
      opt.n_cap = 200000;
      for (double factor : {0.55, 0.75, 0.90, 1.25, 1.60}) {
        double lambda = factor * crit;  // outside the +-5% band by construction
        DualityVerdict v = transience_duality_check(m.origin, lambda, sys, rsys, opt);
        o.require(v.consistent, m.name + ": verdicts disagree at lambda " + fmt(lambda));
        o.require(v.forward.kind != Transience::inconclusive &&
                      v.reversed.kind != Transience::inconclusive,
                  m.name + ": uncertified verdict at lambda " + fmt(lambda));
      }
    }

    Model w = biased_walk_z(2.0 / 3.0);
    ReversedSystem rev = reverse_system(w.graph, w.potential);
    CylinderMeasure mu = measure_from_harmonic(
        Eigenfunction{[](State) { return 1.0; }, 1.0}, rev.system());
    std::vector<Word> battery{Word{detail::zig(0)}, Word{detail::zig(0), detail::zig(-1)}};
    Eigenfunction h = pi_map(mu, 1.0, w.potential, w.graph, rev, battery);
    std::vector<State> pts;
    for (int z = -10; z < 10; ++z) pts.push_back(detail::zig(z));
    for (double r : eigen_residual(h, pts, w.potential, *w.graph))
      o.require(r < 1e-10, "eigen residual " + fmt(r) + " >= 1e-10");
  });

  // 8. Finite-stage thermodynamic limits: the escaping scheme settles on two
  //    distinct boundary values matching the atlas centroids; the recurrent
  //    scheme hits the stationary ratio of the truncated linear solve.
  criterion(8, "thermodynamic limits match atlas centroids and the stationary solve", 0.0,
            [](Outcome& o) {
    Model m = example1(-1.0);
    System sys = m.system();
    GreenOptions gopt;
    gopt.tol = 1e-11;
    std::vector<Word> ts = default_test_set(m.origin, 2, 2, *m.graph);
    RhoMetric rho = RhoMetric::constructive(ts, m.origin, 1.0, sys, 0.0);
    BoundaryAtlas atlas = escape_model_atlas(m, ts, rho, sys);
    o.require(atlas.clusters.size() == 2, "atlas did not resolve two ends");
    Word target{m.parse_state("-1")};
    SimpleFunction f = SimpleFunction::indicator(target);
    std::vector<double> limits;
    for (int fam = 0; fam < 2; ++fam) {
      std::vector<TailPoint> orbit;
      for (int n = 1; n <= 16; ++n) orbit.push_back(m.orbits[fam].at(n));
      std::vector<double> vals = thermo_limit(orbit, f, m.origin, 1.0, sys, gopt);
      double osc = trailing_oscillation(vals, 5);
      o.require(osc < 1e-4, "trailing oscillation " + fmt(osc) + " >= 1e-4");
      limits.push_back(vals.back());
      // Family fam was fed to the atlas as orbits 2*fam and 2*fam + 1.
      KernelEntry centroid = mu_omega(atlas.clusters[atlas.cluster_of[2 * fam]], target);
      double tol = 1e-3 + (centroid.hi - centroid.lo);
      o.require(std::abs(vals.back() - centroid.value) <= tol,
                "limit vs centroid gap " + fmt(std::abs(vals.back() - centroid.value)));
    }
    o.require(std::abs(limits[0] - limits[1]) > 1e-2, "the two limits are not distinct");

    Model drift = inward_drift_walk(0.7);
    std::vector<double> vals =
        thermo_limit(ThermoScheme::pos_recurrent, drift.point_at(drift.origin),
                     SimpleFunction::indicator(Word{2}), drift.origin, 1.0, 80, drift.system());
    double oracle = testing::stationary_ratio(0.7, 2, 400);
    o.require(std::abs(vals.back() - oracle) < 1e-6,
              "stationary gap " + fmt(std::abs(vals.back() - oracle)) + " >= 1e-6");
  });

  // 9. Hitting statistics against the boundary atlas, plus the harmonic
  //    machinery of the drifted walk.
  criterion(9, "hitting frequencies land in the predicted boundary clusters", 0.0, [](Outcome& o) {
    // Simple random walk on the 3-regular tree: each of the three subtree
    // clusters is hit with frequency 1/3 (99% Wilson interval).
    Model tree = regular_tree(3);
    System tsys = tree.system();
    std::vector<Word> ts = default_test_set(tree.origin, 1, 2, *tree.graph);
    RhoMetric rho = RhoMetric::constructive(ts, tree.origin, 1.0, tsys, 0.0);
    std::vector<std::vector<TailPoint>> orbits(tree.orbits.size());
    for (std::size_t i = 0; i < tree.orbits.size(); ++i)
      for (int n = 1; n <= 10; ++n) orbits[i].push_back(tree.orbits[i].at(n));
    AtlasOptions aopt;
    aopt.green.tol = 1e-11;
    BoundaryAtlas atlas = boundary_atlas(orbits, 1.0, ts, tree.origin, tsys, rho, aopt);
    o.require(atlas.clusters.size() == 3, "tree atlas: expected 3 clusters, got " +
                                              std::to_string(atlas.clusters.size()));
    WalkOptions wopt;
    wopt.n_samples = 100000;
    wopt.horizon = 60;
    wopt.escape_depth = 10;
    wopt.seed = 20260826u;
    wopt.green.tol = 1e-11;
    HittingDistribution hits = hitting_distribution(tree, tree.origin, 1.0, atlas, rho, wopt);
    for (std::size_t c = 0; c < hits.counts.size(); ++c)
      o.require(hits.interval[c].first <= 1.0 / 3.0 && 1.0 / 3.0 <= hits.interval[c].second,
                "cluster " + std::to_string(c) + " Wilson interval [" +
                    fmt(hits.interval[c].first) + ", " + fmt(hits.interval[c].second) +
                    "] misses 1/3");

    // Drifted walk: everything escapes to the positive end.
    Model w = biased_walk_z(2.0 / 3.0);
    System wsys = w.system();
    std::vector<Word> wts = default_test_set(w.origin, 2, 2, *w.graph);
    RhoMetric wrho = RhoMetric::constructive(wts, w.origin, 1.0, wsys, 0.0);
    std::vector<std::vector<TailPoint>> worbits(2);
    for (int n = 1; n <= 12; ++n) {
      worbits[0].push_back(w.orbits[0].at(n));
      worbits[1].push_back(w.orbits[1].at(n));
    }
    BoundaryAtlas watlas = boundary_atlas(worbits, 1.0, wts, w.origin, wsys, wrho, aopt);
    o.require(watlas.clusters.size() == 2, "walk atlas: expected 2 clusters");
    WalkOptions dopt = wopt;
    dopt.horizon = 200;
    HittingDistribution dhits = hitting_distribution(w, w.origin, 1.0, watlas, wrho, dopt);
    int plus = watlas.cluster_of[0];
    std::int64_t losses = dhits.total - dhits.counts[plus];
    o.require(static_cast<double>(losses) < 1e-3 * static_cast<double>(dhits.total),
              "losses off the positive end: " + std::to_string(losses) + " of " +
                  std::to_string(dhits.total));

    // The geometric table is harmonic and generates a conformal path measure.
    double p = 2.0 / 3.0;
    Eigenfunction geo{[p](State e) {
                        return std::pow((1.0 - p) / p,
                                        static_cast<double>(detail::unzig(e)));
                      },
                      1.0};
    std::vector<State> pts;
    for (int z = -10; z <= 10; ++z) pts.push_back(detail::zig(z));
    for (double r : harmonic_residual(geo, wsys, pts))
      o.require(r < 1e-12, "harmonic residual " + fmt(r) + " >= 1e-12");
    CylinderMeasure mu = measure_from_harmonic(geo, wsys);
    std::vector<Word> battery;
    for (int z = -2; z <= 2; ++z) {
      Word word;
      for (int k = 0; k < 5; ++k) {
        word.push_back(detail::zig(z + k));
        battery.push_back(word);
      }
    }
    for (const auto& r : conformality_residual(mu, 1.0, battery, wsys))
      o.require(r.residual < 1e-12 + r.bar, "conformality residual " + fmt(r.residual));
  });

  // 10. Backward ratio-limit trajectories settle on the two boundary values
  //     of the eigenfunction quotient.
  criterion(10, "backward ratio trajectories settle on the boundary values", 0.0, [](Outcome& o) {
    double p = 2.0 / 3.0, q = 1.0 - p;
    Model m = biased_walk_z(p);
    ReversedSystem rev = reverse_system(m.graph, m.potential);
    Eigenfunction f{[p, q](State e) {
                      return std::pow(q / p, static_cast<double>(detail::unzig(e)));
                    },
                    1.0};
    Eigenfunction h{[p, q](State e) {
                      return 1.0 + std::pow(q / p, static_cast<double>(detail::unzig(e)));
                    },
                    1.0};
    auto trajs = poisson_ratio_limit(f, h, m.origin, 200, 1000, 20260826u, rev.system());
    int settled = 0;
    for (const auto& t : trajs) {
      double r = t.ratios.back();
      if (std::abs(r) < 1e-2 || std::abs(r - 1.0) < 1e-2) ++settled;
    }
    o.require(settled >= 950, "only " + std::to_string(settled) + " of 1000 settled");
  });

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
