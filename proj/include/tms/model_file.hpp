#pragma once

// Model description files.  A file is a sequence of [section] headers with
// key = value lines; # starts a comment.  Sections:
//
//   [graph]              builder = example1 | example2 | biased_walk_z |
//                                  regular_tree | inward_drift_walk | self_loop
//                        alpha / p / degree as the builder requires
//   [potential]          add = R        (optional additive constant on phi)
//   [origin]             state = NAME   (optional override, model naming)
//   [measure NAME]       rule = green | delta_ray | path, plus rule params
//   [orbits]             NAME = s0 s1 ... / c0 c1 ...   (extra named points)
//
// Point literals "s0 s1 ... / c0 c1 ..." give the prefix before the slash and
// the repeating cycle after it; states use the model's naming.

#include <cctype>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tms/models.hpp"

namespace tms {

// A measure entry is materialized lazily because green-type rules need the
// lambda the CLI receives at run time.
struct MeasureSpec {
  std::string name;
  std::string rule;                         // green | delta_ray | path
  std::map<std::string, std::string> args;  // e.g. state = ...
};

struct ModelFile {
  Model model;
  std::vector<MeasureSpec> measures;
  std::vector<std::pair<std::string, TailPoint>> points;  // named [orbits] entries
};

// "s0 s1 ... / c0 c1 ..." -> TailPoint; an absent slash means a pure cycle.
inline TailPoint parse_point(const std::string& text, const Model& m) {
  auto slash = text.find('/');
  auto parse_states = [&m](const std::string& part) {
    Word w;
    std::istringstream in(part);
    std::string tok;
    while (in >> tok) w.push_back(m.parse_state(tok));
    return w;
  };
  Word prefix, cycle;
  if (slash == std::string::npos) {
    cycle = parse_states(text);
  } else {
    prefix = parse_states(text.substr(0, slash));
    cycle = parse_states(text.substr(slash + 1));
  }
  return TailPoint(std::move(prefix), std::move(cycle), *m.graph);
}

// Space-separated state names -> cylinder word.
inline Word parse_word(const std::string& text, const Model& m) {
  std::istringstream in(text);
  std::string tok;
  Word w;
  while (in >> tok) w.push_back(m.parse_state(tok));
  return w;
}

namespace detail {

inline std::string trimmed(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_real(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("trailing junk after number '" + s + "'", line);
  return v;
}

inline Model build_from_section(const std::map<std::string, std::string>& kv,
                                const std::map<std::string, int>& kv_line, int section_line) {
  auto at = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError("[graph] builder '" + kv.at("builder") + "' needs key '" + key + "'",
                       section_line);
    return it->second;
  };
  auto real_at = [&](const std::string& key) {
    return parse_real(at(key), kv_line.at(key));
  };
  auto it = kv.find("builder");
  if (it == kv.end()) throw ParseError("[graph] needs a 'builder' key", section_line);
  const std::string& b = it->second;
  if (b == "example1") return example1(real_at("alpha"));
  if (b == "example2") return example2(real_at("alpha"));
  if (b == "self_loop") return self_loop(real_at("alpha"));
  if (b == "biased_walk_z") return biased_walk_z(real_at("p"));
  if (b == "inward_drift_walk") return inward_drift_walk(real_at("p"));
  if (b == "regular_tree") {
    double d = real_at("degree");
    if (d != static_cast<int>(d)) throw ParseError("degree must be an integer", section_line);
    return regular_tree(static_cast<int>(d));
  }
  throw ParseError("unknown builder '" + b + "'", kv_line.at("builder"));
}

}  // namespace detail

inline ModelFile parse_model_file(std::istream& in) {
  struct Section {
    std::string header;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;  // in file order
    std::vector<int> entry_lines;
  };
  std::vector<Section> sections;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trimmed(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      sections.push_back({detail::trimmed(line.substr(1, line.size() - 2)), line_no, {}, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    if (sections.empty()) throw ParseError("entry before any [section]", line_no);
    sections.back().entries.emplace_back(detail::trimmed(line.substr(0, eq)),
                                         detail::trimmed(line.substr(eq + 1)));
    sections.back().entry_lines.push_back(line_no);
  }

  const Section* graph = nullptr;
  const Section* potential = nullptr;
  const Section* origin = nullptr;
  const Section* orbits = nullptr;
  std::vector<const Section*> measures;
  for (const Section& s : sections) {
    if (s.header == "graph") graph = &s;
    else if (s.header == "potential") potential = &s;
    else if (s.header == "origin") origin = &s;
    else if (s.header == "orbits") orbits = &s;
    else if (s.header.rfind("measure", 0) == 0) measures.push_back(&s);
    else throw ParseError("unknown section [" + s.header + "]", s.line);
  }
  if (!graph) throw ParseError("model file needs a [graph] section", 1);

  auto to_maps = [](const Section& s) {
    std::map<std::string, std::string> kv;
    std::map<std::string, int> kl;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      if (kv.count(s.entries[i].first))
        throw ParseError("duplicate key '" + s.entries[i].first + "'", s.entry_lines[i]);
      kv[s.entries[i].first] = s.entries[i].second;
      kl[s.entries[i].first] = s.entry_lines[i];
    }
    return std::make_pair(kv, kl);
  };

  ModelFile out;
  {
    auto [kv, kl] = to_maps(*graph);
    out.model = detail::build_from_section(kv, kl, graph->line);
  }
  if (potential) {
    auto [kv, kl] = to_maps(*potential);
    for (const auto& [k, v] : kv) {
      if (k != "add") throw ParseError("[potential] supports only 'add'", kl.at(k));
      if (out.model.op)
        throw ParseError("[potential] add is unsupported for models with a custom operator",
                         kl.at(k));
      double add = detail::parse_real(v, kl.at(k));
      // shifted_by_log subtracts its argument, so negate to add.
      out.model.potential = out.model.potential.shifted_by_log(-add);
    }
  }
  if (origin) {
    auto [kv, kl] = to_maps(*origin);
    auto it = kv.find("state");
    if (it == kv.end() || kv.size() != 1)
      throw ParseError("[origin] takes exactly one key, 'state'", origin->line);
    try {
      out.model.origin = out.model.parse_state(it->second);
    } catch (const Error& e) {
      throw ParseError(e.what(), kl.at("state"));
    }
  }
  for (const Section* s : measures) {
    MeasureSpec spec;
    spec.name = detail::trimmed(s->header.substr(7));
    if (spec.name.empty()) throw ParseError("[measure NAME] needs a name", s->line);
    auto [kv, kl] = to_maps(*s);
    auto it = kv.find("rule");
    if (it == kv.end()) throw ParseError("[measure " + spec.name + "] needs a 'rule'", s->line);
    spec.rule = it->second;
    kv.erase(it);
    spec.args = std::move(kv);
    out.measures.push_back(std::move(spec));
  }
  if (orbits) {
    for (std::size_t i = 0; i < orbits->entries.size(); ++i) {
      try {
        out.points.emplace_back(orbits->entries[i].first,
                                parse_point(orbits->entries[i].second, out.model));
      } catch (const Error& e) {
        throw ParseError(e.what(), orbits->entry_lines[i]);
      }
    }
  }
  return out;
}

// Turns a measure spec into a CylinderMeasure.  Rules:
//   green      state = S   -> f |-> G(f, x_S | lambda) at the model's point_at(S)
//   delta_ray              -> the example2 escaping-ray point mass
//   path                   -> unanchored Markov path measure prod e^{phi}
inline CylinderMeasure materialize_measure(const MeasureSpec& spec, const Model& model,
                                           double lambda, const GreenOptions& opt = {}) {
  auto arg = [&spec](const std::string& key) -> const std::string& {
    auto it = spec.args.find(key);
    if (it == spec.args.end())
      throw InadmissibleError("measure '" + spec.name + "' (" + spec.rule +
                              ") needs parameter '" + key + "'");
    return it->second;
  };
  if (spec.rule == "green")
    return green_measure(model.point_at(model.parse_state(arg("state"))), lambda,
                         model.system(), opt);
  if (spec.rule == "delta_ray") {
    if (model.name != "example2")
      throw InadmissibleError("delta_ray is defined for the example2 builder");
    return delta_ray_measure();
  }
  if (spec.rule == "path") {
    // Unanchored Markov path measure: unit mass on every single-state
    // cylinder, multiplied along the steps.  Anchoring the first coordinate
    // would break both conformality and the Gibbsian conditional checks.
    System sys = model.system();
    if (sys.potential.range() != 2)
      throw InadmissibleError("path measures need a Markovian potential");
    return CylinderMeasure("path", [sys = std::move(sys)](std::span<const State> w) {
      if (w.empty()) return MassBar::exact(0.0);
      double log_mass = 0.0;
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (!sys.graph->has_edge(w[i], w[i + 1])) return MassBar::exact(0.0);
        log_mass += sys.potential.eval(w[i], w[i + 1]);
      }
      return MassBar::exact(std::exp(log_mass));
    });
  }
  throw InadmissibleError("unknown measure rule '" + spec.rule + "'");
}

}  // namespace tms
