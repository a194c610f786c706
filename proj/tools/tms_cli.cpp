// Batch CLI over the tms library.  Subcommands: green, kernel, atlas, thermo,
// dlr, walk, duality.  Every run reads one model file, evaluates one query
// family, writes <out>/<subcommand>.json, and mirrors the result to stdout as
// JSON or an aligned table.  Outputs are byte-stable for fixed flags and
// seeds.  Exit codes: 0 success, 2 certified divergence, 3 budget exhausted /
// inconclusive, 4 validation failure, 5 parse failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tms/duality.hpp"
#include "tms/model_file.hpp"
#include "tms/models.hpp"
#include "tms/pressure.hpp"

using json = nlohmann::ordered_json;
using namespace tms;

namespace {

constexpr int kExitDiverging = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitValidation = 4;
constexpr int kExitParse = 5;

struct Common {
  std::string model_path;
  double lambda = 1.0;
  double tol = 1e-9;
  int n_cap = 4000;
  int test_depth = 3;
  double eps = 1e-3;
  std::string out_dir = ".";
  std::string format = "json";

  GreenOptions green() const {
    GreenOptions g;
    g.tol = tol;
    g.n_cap = n_cap;
    return g;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--model", c.model_path, "model description file")->required();
  cmd->add_option("--lambda", c.lambda, "eigenvalue parameter (default 1)");
  cmd->add_option("--tol", c.tol, "certified tail tolerance");
  cmd->add_option("--n-cap", c.n_cap, "series term budget");
  cmd->add_option("--test-depth", c.test_depth, "test-set word length / ball radius");
  cmd->add_option("--eps", c.eps, "atlas cluster resolution");
  cmd->add_option("--out", c.out_dir, "output directory (default .)");
  cmd->add_option("--format", c.format, "stdout format: json | table")
      ->check(CLI::IsMember({"json", "table"}));
}

ModelFile load(const Common& c) {
  std::ifstream in(c.model_path);
  if (!in) throw ParseError("cannot open model file '" + c.model_path + "'", 0);
  return parse_model_file(in);
}

std::string word_str(const Word& w, const Model& m) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += m.graph->name(w[i]);
  }
  return s;
}

json interval_json(double lo, double hi) { return json::array({lo, hi}); }

// Flat-ish table rendering of the JSON document for --format table.
void print_table(const json& j, const std::string& prefix = "") {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      print_table(v, prefix.empty() ? k : prefix + "." + k);
  } else if (j.is_array()) {
    bool scalar = true;
    for (const auto& v : j)
      if (v.is_object() || v.is_array()) scalar = false;
    if (scalar) {
      std::cout << std::left << std::setw(32) << prefix << " " << j.dump() << "\n";
    } else {
      int i = 0;
      for (const auto& v : j) print_table(v, prefix + "[" + std::to_string(i++) + "]");
    }
  } else {
    std::cout << std::left << std::setw(32) << prefix << " " << j.dump() << "\n";
  }
}

void emit(const json& doc, const Common& c, const std::string& subcommand) {
  std::filesystem::create_directories(c.out_dir);
  std::filesystem::path path = std::filesystem::path(c.out_dir) / (subcommand + ".json");
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  if (c.format == "table")
    print_table(doc);
  else
    std::cout << doc.dump(2) << "\n";
}

TailPoint point_or_default(const std::string& literal, const ModelFile& mf) {
  if (literal.empty()) return mf.model.point_at(mf.model.origin);
  // Named [orbits] entries take precedence over literals.
  for (const auto& [name, p] : mf.points)
    if (name == literal) return p;
  return parse_point(literal, mf.model);
}

Word cyl_or_origin(const std::string& literal, const Model& m) {
  if (literal.empty()) return Word{m.origin};
  return parse_word(literal, m);
}

json green_value_json(const GreenValue& g) {
  return {{"value", g.partial},
          {"lo", g.lo()},
          {"hi", g.hi()},
          {"tail_bound", g.tail_bound},
          {"n_terms", g.n_terms},
          {"ratio", g.ratio}};
}

json kernel_entry_json(const KernelEntry& k) {
  return {{"value", k.value}, {"lo", k.lo}, {"hi", k.hi}, {"half_width", k.half_width()}};
}

json header_json(const Common& c, const ModelFile& mf) {
  return {{"model", mf.model.name},
          {"origin", mf.model.graph->name(mf.model.origin)},
          {"lambda", c.lambda}};
}

// Orbit sequences used by atlas / walk / thermo: every family in the model,
// sampled at n_min .. n_min + count - 1.
std::vector<std::vector<TailPoint>> orbit_grid(const Model& m, int count,
                                               std::vector<std::string>* names = nullptr) {
  if (m.orbits.empty())
    throw InadmissibleError("model '" + m.name + "' provides no escape-orbit families");
  std::vector<std::vector<TailPoint>> grid;
  for (const OrbitFamily& fam : m.orbits) {
    std::vector<TailPoint> orbit;
    for (int n = fam.n_min; n < fam.n_min + count; ++n) orbit.push_back(fam.at(n));
    grid.push_back(std::move(orbit));
    if (names) names->push_back(fam.name);
  }
  return grid;
}

struct AtlasBundle {
  std::vector<Word> test_set;
  RhoMetric rho;
  BoundaryAtlas atlas;
  std::vector<std::string> orbit_names;
};

AtlasBundle build_atlas(const Common& c, const ModelFile& mf, int orbit_count) {
  const Model& m = mf.model;
  System sys = m.system();
  AtlasBundle b;
  b.test_set = default_test_set(m.origin, c.test_depth, c.test_depth, *m.graph);
  double var_sum = sys.potential.range() <= 2
                       ? 0.0
                       : variation(sys.potential, 2, *m.graph, Word{m.origin}, c.test_depth);
  b.rho = RhoMetric::constructive(b.test_set, m.origin, c.lambda, sys, var_sum);
  AtlasOptions opt;
  opt.eps = c.eps;
  opt.green = c.green();
  b.atlas = boundary_atlas(orbit_grid(m, orbit_count, &b.orbit_names), c.lambda, b.test_set,
                           m.origin, sys, b.rho, opt);
  return b;
}

json atlas_json(const AtlasBundle& b, const Model& m) {
  json clusters = json::array();
  for (const BoundaryCluster& cl : b.atlas.clusters) {
    json members = json::array();
    for (int oi : cl.members) members.push_back(b.orbit_names[oi]);
    json values = json::array();
    for (std::size_t i = 0; i < b.test_set.size(); ++i)
      values.push_back({{"cylinder", word_str(b.test_set[i], m)},
                        {"kernel", kernel_entry_json(cl.centroid.values[i])}});
    clusters.push_back(
        {{"members", members}, {"diameter", cl.diameter}, {"centroid", values}});
  }
  json ts = json::array();
  for (const Word& w : b.test_set) ts.push_back(word_str(w, m));
  return {{"test_set", ts},
          {"resolution", b.atlas.resolution},
          {"rho_tail", b.atlas.rho_tail},
          {"clusters", clusters}};
}

// All admissible length-n words feeding into the first state of `tail`.
std::vector<Word> fiber_words(const Word& tail, int n, const StateGraph& g) {
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

double trailing_oscillation(const std::vector<double>& v, int window) {
  if (static_cast<int>(v.size()) < 2) return 0.0;
  int k = std::min<int>(window, static_cast<int>(v.size()));
  double lo = v.back(), hi = v.back();
  for (int i = static_cast<int>(v.size()) - k; i < static_cast<int>(v.size()); ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  return hi - lo;
}

int run_green(const Common& c, const std::string& cyl, const std::string& point) {
  ModelFile mf = load(c);
  Word w = cyl_or_origin(cyl, mf.model);
  TailPoint x = point_or_default(point, mf);
  System sys = mf.model.system();
  json doc = header_json(c, mf);
  doc["cylinder"] = word_str(w, mf.model);
  doc["point"] = x.str(*mf.model.graph);
  doc["green"] =
      green_value_json(green(SimpleFunction::indicator(w), x, c.lambda, sys, c.green()));
  emit(doc, c, "green");
  return 0;
}

int run_kernel(const Common& c, const std::string& cyl, const std::string& point) {
  ModelFile mf = load(c);
  const Model& m = mf.model;
  TailPoint x = point_or_default(point, mf);
  System sys = m.system();
  json doc = header_json(c, mf);
  doc["point"] = x.str(*m.graph);
  if (!cyl.empty()) {
    Word w = parse_word(cyl, m);
    doc["cylinder"] = word_str(w, m);
    doc["kernel"] = kernel_entry_json(
        martin_kernel(SimpleFunction::indicator(w), x, c.lambda, m.origin, sys, c.green()));
  } else {
    std::vector<Word> ts = default_test_set(m.origin, c.test_depth, c.test_depth, *m.graph);
    KernelProfile prof = kernel_profile(x, c.lambda, ts, m.origin, sys, c.green());
    json rows = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i)
      rows.push_back({{"cylinder", word_str(ts[i], m)},
                      {"kernel", kernel_entry_json(prof.values[i])},
                      {"indicator", static_cast<int>(prof.indicators[i])}});
    doc["profile"] = rows;
  }
  emit(doc, c, "kernel");
  return 0;
}

int run_atlas(const Common& c, int orbit_count) {
  ModelFile mf = load(c);
  AtlasBundle b = build_atlas(c, mf, orbit_count);
  json doc = header_json(c, mf);
  doc.update(atlas_json(b, mf.model));
  emit(doc, c, "atlas");
  return 0;
}

int run_thermo(const Common& c, const std::string& scheme, const std::string& cyl,
               const std::string& point, int stages) {
  ModelFile mf = load(c);
  const Model& m = mf.model;
  System sys = m.system();
  SimpleFunction f = SimpleFunction::indicator(cyl_or_origin(cyl, m));
  json doc = header_json(c, mf);
  doc["scheme"] = scheme;
  doc["cylinder"] = word_str(cyl_or_origin(cyl, m), m);
  if (scheme == "transient") {
    if (m.orbits.empty())
      throw InadmissibleError("transient scheme needs escape-orbit families");
    json fams = json::array();
    for (const OrbitFamily& fam : m.orbits) {
      std::vector<TailPoint> orbit;
      for (int n = fam.n_min; n < fam.n_min + stages; ++n) orbit.push_back(fam.at(n));
      std::vector<double> vals = thermo_limit(orbit, f, m.origin, c.lambda, sys, c.green());
      fams.push_back({{"orbit", fam.name},
                      {"values", vals},
                      {"limit", vals.back()},
                      {"trailing_oscillation", trailing_oscillation(vals, 5)}});
    }
    doc["limits"] = fams;
  } else {
    ThermoScheme s = scheme == "pos_recurrent" ? ThermoScheme::pos_recurrent
                                               : ThermoScheme::null_recurrent;
    TailPoint x = point_or_default(point, mf);
    doc["point"] = x.str(*m.graph);
    std::vector<double> vals = thermo_limit(s, x, f, m.origin, c.lambda, stages, sys);
    doc["values"] = vals;
    doc["limit"] = vals.back();
    doc["trailing_oscillation"] = trailing_oscillation(vals, 5);
  }
  emit(doc, c, "thermo");
  return 0;
}

int run_dlr(const Common& c, const std::string& measure_name, int n,
            const std::vector<std::string>& tail_literals) {
  ModelFile mf = load(c);
  const Model& m = mf.model;
  System sys = m.system();
  const MeasureSpec* spec = nullptr;
  for (const MeasureSpec& s : mf.measures)
    if (s.name == measure_name) spec = &s;
  if (!spec)
    throw InadmissibleError("model file defines no [measure " + measure_name + "]");
  CylinderMeasure mu = materialize_measure(*spec, m, c.lambda, c.green());

  std::vector<Word> tails;
  for (const std::string& t : tail_literals) tails.push_back(parse_word(t, m));
  if (tails.empty())
    tails.push_back(m.point_at(m.origin).coords(
        std::max<std::size_t>(sys.potential.range() - 1, 1)));

  json doc = header_json(c, mf);
  doc["measure"] = measure_name;
  doc["n"] = n;
  double worst_dlr = 0.0;
  json cond = json::array();
  json ratio = json::array();
  for (const Word& t : tails) {
    std::vector<Word> fiber = fiber_words(t, n, *m.graph);
    for (const DlrResidual& r : dlr_check_conditional(mu, n, fiber, {t}, sys)) {
      worst_dlr = std::max(worst_dlr, r.residual);
      cond.push_back({{"word", word_str(r.word, m)},
                      {"tail", word_str(r.tail, m)},
                      {"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"residual", r.residual},
                      {"bar", r.bar}});
    }
    // Ratio form over fiber pairs sharing a final state.
    for (std::size_t i = 0; i < fiber.size(); ++i)
      for (std::size_t j = i + 1; j < fiber.size(); ++j) {
        if (fiber[i].back() != fiber[j].back()) continue;
        DlrResidual r = dlr_check_ratio(mu, fiber[i], fiber[j], t, sys);
        worst_dlr = std::max(worst_dlr, r.residual);
        ratio.push_back({{"a", word_str(fiber[i], m)},
                         {"b", word_str(fiber[j], m)},
                         {"tail", word_str(t, m)},
                         {"residual", r.residual},
                         {"bar", r.bar}});
      }
  }
  doc["conditional"] = cond;
  doc["ratio"] = ratio;
  doc["worst_dlr_residual"] = worst_dlr;

  std::vector<Word> battery = default_test_set(m.origin, c.test_depth, c.test_depth, *m.graph);
  double worst_conf = 0.0;
  json conf = json::array();
  for (const ConformalityResidual& r : conformality_residual(mu, c.lambda, battery, sys)) {
    worst_conf = std::max(worst_conf, r.residual);
    conf.push_back(
        {{"word", word_str(r.word, m)}, {"residual", r.residual}, {"bar", r.bar}});
  }
  doc["conformality"] = conf;
  doc["worst_conformality_residual"] = worst_conf;
  doc["dlr_pass"] = worst_dlr <= c.tol * 1e3 + 1e-12;
  doc["conformal_pass"] = worst_conf <= c.tol * 1e3 + 1e-12;
  emit(doc, c, "dlr");
  return 0;
}

int run_walk(const Common& c, std::uint64_t seed, long samples, int horizon, int escape_depth,
             int orbit_count) {
  ModelFile mf = load(c);
  const Model& m = mf.model;
  AtlasBundle b = build_atlas(c, mf, orbit_count);
  WalkOptions opt;
  opt.n_samples = samples;
  opt.horizon = horizon;
  opt.escape_depth = escape_depth;
  opt.seed = seed;
  opt.green = c.green();
  HittingDistribution hd = hitting_distribution(m, m.origin, c.lambda, b.atlas, b.rho, opt);
  json doc = header_json(c, mf);
  doc["seed"] = seed;
  doc["samples"] = hd.total;
  doc["horizon"] = horizon;
  doc["unresolved"] = hd.unresolved;
  json clusters = json::array();
  for (std::size_t i = 0; i < hd.counts.size(); ++i) {
    json members = json::array();
    for (int oi : b.atlas.clusters[i].members) members.push_back(b.orbit_names[oi]);
    clusters.push_back({{"members", members},
                        {"count", hd.counts[i]},
                        {"wilson99", interval_json(hd.interval[i].first, hd.interval[i].second)}});
  }
  doc["clusters"] = clusters;
  emit(doc, c, "walk");
  return 0;
}

int run_duality(const Common& c, std::uint64_t seed, int n_points) {
  ModelFile mf = load(c);
  const Model& m = mf.model;
  System fwd = m.system();
  if (fwd.potential.range() != 2)
    throw RangeTooLargeError("the duality subcommand needs a Markovian potential");
  ReversedSystem rev = reverse_system(m.graph, m.potential);
  System rsys = rev.system();

  json doc = header_json(c, mf);
  DualityVerdict v = transience_duality_check(m.origin, c.lambda, fwd, rsys, c.green());
  auto verdict_json = [](const TransienceVerdict& t) {
    const char* k = t.kind == Transience::transient
                        ? "transient"
                        : t.kind == Transience::recurrent ? "recurrent" : "inconclusive";
    return json{{"verdict", k}, {"partial", t.partial}, {"n_terms", t.n_terms},
                {"detail", t.detail}};
  };
  doc["forward"] = verdict_json(v.forward);
  doc["reversed"] = verdict_json(v.reversed);
  doc["consistent"] = v.consistent;

  // Seed-derived residual probe: pi_map of the reversed path measure started
  // from states sampled in the origin's ball, residual-checked at the same
  // states.  Meaningful when e^{phi} rows are stochastic; reported always.
  std::vector<State> ball = state_ball(Word{m.origin}, c.test_depth, *m.graph);
  Rng rng(seed);
  std::vector<State> probes;
  for (int i = 0; i < n_points; ++i)
    probes.push_back(ball[rng.discrete(std::vector<double>(ball.size(), 1.0))]);
  CylinderMeasure mu_rev("reversed_path", [rsys](std::span<const State> w) {
    if (w.empty()) return MassBar::exact(1.0);
    double log_mass = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (!rsys.graph->has_edge(w[i], w[i + 1])) return MassBar::exact(0.0);
      log_mass += rsys.potential.eval(w[i], w[i + 1]);
    }
    return MassBar::exact(std::exp(log_mass));
  });
  Eigenfunction h = pi_map(mu_rev, c.lambda, m.potential, m.graph, rev);
  std::vector<double> res = eigen_residual(h, probes, m.potential, *m.graph);
  json probe_rows = json::array();
  for (std::size_t i = 0; i < probes.size(); ++i)
    probe_rows.push_back({{"state", m.graph->name(probes[i])},
                          {"h", h.table(probes[i])},
                          {"eigen_residual", res[i]}});
  doc["pi_map_probe"] = probe_rows;
  emit(doc, c, "duality");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermodynamic formalism computations on countable Markov shifts"};
  app.require_subcommand(1);

  Common c;
  std::string cyl, point, scheme = "transient", measure_name;
  std::vector<std::string> tails;
  int stages = 12, orbit_count = 12, dlr_n = 3, duality_points = 20;
  int horizon = 200, escape_depth = 10;
  long samples = 1000;
  std::uint64_t seed = 0;

  CLI::App* g = app.add_subcommand("green", "certified Green series value");
  add_common(g, c);
  g->add_option("--cyl", cyl, "cylinder word, space-separated states (default origin)");
  g->add_option("--point", point, "tail point 'prefix / cycle' or [orbits] name");

  CLI::App* k = app.add_subcommand("kernel", "Martin kernel value or profile");
  add_common(k, c);
  k->add_option("--cyl", cyl, "cylinder word; omit for a full test-set profile");
  k->add_option("--point", point, "tail point (default: anchored at the origin)");

  CLI::App* a = app.add_subcommand("atlas", "boundary atlas from the model's orbit families");
  add_common(a, c);
  a->add_option("--orbit-count", orbit_count, "points sampled per orbit family");

  CLI::App* t = app.add_subcommand("thermo", "finite-stage thermodynamic limits");
  add_common(t, c);
  t->add_option("--scheme", scheme, "transient | pos_recurrent | null_recurrent")
      ->check(CLI::IsMember({"transient", "pos_recurrent", "null_recurrent"}));
  t->add_option("--cyl", cyl, "cylinder word for the numerator (default origin)");
  t->add_option("--point", point, "base point for the recurrent schemes");
  t->add_option("--stages", stages, "number of finite stages");

  CLI::App* d = app.add_subcommand("dlr", "DLR and conformality residuals of a measure");
  add_common(d, c);
  d->add_option("--measure", measure_name, "[measure NAME] entry of the model file")
      ->required();
  d->add_option("--n", dlr_n, "conditioned prefix length");
  d->add_option("--tail", tails, "tail word(s) fixing the conditioning class");

  CLI::App* w = app.add_subcommand("walk", "Monte-Carlo hitting distribution over the atlas");
  add_common(w, c);
  w->add_option("--seed", seed, "RNG seed")->required();
  w->add_option("--samples", samples, "number of trajectories");
  w->add_option("--horizon", horizon, "steps per trajectory");
  w->add_option("--escape-depth", escape_depth, "depth that counts as escaped");
  w->add_option("--orbit-count", orbit_count, "points sampled per orbit family");

  CLI::App* du = app.add_subcommand("duality", "forward/reversed transience and pi-map probe");
  add_common(du, c);
  du->add_option("--seed", seed, "RNG seed for the residual probe states")->required();
  du->add_option("--points", duality_points, "number of probe states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (g->parsed()) return run_green(c, cyl, point);
    if (k->parsed()) return run_kernel(c, cyl, point);
    if (a->parsed()) return run_atlas(c, orbit_count);
    if (t->parsed()) return run_thermo(c, scheme, cyl, point, stages);
    if (d->parsed()) return run_dlr(c, measure_name, dlr_n, tails);
    if (w->parsed()) return run_walk(c, seed, samples, horizon, escape_depth, orbit_count);
    if (du->parsed()) return run_duality(c, seed, duality_points);
  } catch (const ParseError& e) {
    std::cerr << "parse error (line " << e.line << "): " << e.what() << "\n";
    return kExitParse;
  } catch (const DivergingError& e) {
    std::cerr << "diverging: " << e.what() << " (partial " << e.partial << " after "
              << e.n_terms << " terms)\n";
    return kExitDiverging;
  } catch (const BudgetExhaustedError& e) {
    std::cerr << "inconclusive: " << e.what() << " (partial " << e.partial << " after "
              << e.n_terms << " terms)\n";
    return kExitInconclusive;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
