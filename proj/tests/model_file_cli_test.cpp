// Model-definition files: section parsing, builder dispatch, measure
// materialization, and the point / word literal grammar.

#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tms/model_file.hpp"

using namespace tms;

namespace {

ModelFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_model_file(in);
}

int parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

}  // namespace

TEST_CASE("full model file round trip") {
  ModelFile f = parse(
      "# walk with a drift\n"
      "[graph]\n"
      "builder = biased_walk_z\n"
      "p = 0.75\n"
      "\n"
      "[origin]\n"
      "state = 2\n"
      "\n"
      "[measure nu]\n"
      "rule = path\n"
      "\n"
      "[orbits]\n"
      "up3 = 3 2 1 / 0 1\n"
      "loop = 0 1\n");
  CHECK(f.model.name == "biased_walk_z");
  CHECK(f.model.graph->name(f.model.origin) == "2");
  REQUIRE(f.measures.size() == 1);
  CHECK(f.measures[0].name == "nu");
  CHECK(f.measures[0].rule == "path");
  REQUIRE(f.points.size() == 2);
  CHECK(f.points[0].first == "up3");
  CHECK(f.points[0].second.head() == f.model.parse_state("3"));
  CHECK(f.points[1].first == "loop");
  CHECK(f.points[1].second.head() == f.model.parse_state("0"));

  CylinderMeasure mu = materialize_measure(f.measures[0], f.model, 1.0);
  Word w01 = parse_word("0 1", f.model);
  CHECK(mu.mass(w01).value == doctest::Approx(0.75).epsilon(1e-15));
  // Unanchored: every admissible word carries its step product.
  CHECK(mu.mass(parse_word("1 2", f.model)).value == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(mu.mass(parse_word("0 2", f.model)).value == 0.0);  // not an edge
}

TEST_CASE("builders dispatch with their parameters") {
  CHECK(parse("[graph]\nbuilder = self_loop\nalpha = -1\n").model.name == "self_loop");
  CHECK(parse("[graph]\nbuilder = example1\nalpha = -1\n").model.name == "example1");
  CHECK(parse("[graph]\nbuilder = example2\nalpha = -0.8\n").model.name == "example2");
  CHECK(parse("[graph]\nbuilder = inward_drift_walk\np = 0.7\n").model.name ==
        "inward_drift_walk");
  ModelFile tree = parse("[graph]\nbuilder = regular_tree\ndegree = 3\n");
  CHECK(tree.model.name == "regular_tree");
  CHECK(tree.model.graph->out_edges(tree.model.origin).size() == 3);
}

TEST_CASE("potential shifts apply to plain builders only") {
  ModelFile f = parse(
      "[graph]\nbuilder = self_loop\nalpha = -1\n"
      "[potential]\nadd = 0.25\n");
  Word o{f.model.origin};
  CHECK(f.model.potential.eval(o[0], o[0]) == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK_THROWS_AS(parse("[graph]\nbuilder = regular_tree\ndegree = 3\n"
                        "[potential]\nadd = 0.25\n"),
                  ParseError);
}

TEST_CASE("parse errors carry one-based line numbers") {
  CHECK(parse_error_line("key = 1\n") == 1);                               // entry before section
  CHECK(parse_error_line("[graph\n") == 1);                                // unterminated header
  CHECK(parse_error_line("[graph]\nbuilder = nope\n") == 2);               // unknown builder
  CHECK(parse_error_line("[graph]\nbuilder = self_loop\nalpha bad\n") == 3);  // no equals sign
  CHECK(parse_error_line("[graph]\nbuilder = self_loop\nalpha = x\n") == 3);  // non-numeric
  CHECK(parse_error_line("[graph]\nbuilder = self_loop\nalpha = 0\nalpha = 1\n") == 4);
  CHECK(parse_error_line("[bogus]\nx = 1\n") == 1);                        // unknown section
  CHECK(parse_error_line("") == 1);                                        // missing [graph]
  CHECK(parse_error_line("[graph]\nbuilder = example1\nalpha = -1\n"
                         "[measure m]\nstart = 0\n") == 4);                // measure without rule
  CHECK(parse_error_line("[graph]\nbuilder = example1\nalpha = -1\n"
                         "[origin]\nwrong = 0\n") == 4);                   // origin needs 'state'
  CHECK(parse_error_line("[graph]\nbuilder = example1\nalpha = -1\n"
                         "[origin]\nstate = 7q\n") == 5);                  // unknown state name
}

TEST_CASE("point literals accept prefixes and pure cycles") {
  ModelFile f = parse("[graph]\nbuilder = example1\nalpha = -1\n");
  TailPoint pure = parse_point("1 1' 0", f.model);
  CHECK(pure.head() == f.model.parse_state("1"));
  TailPoint mixed = parse_point("2 2' 1' 0 / 1 1' 0", f.model);
  CHECK(mixed.head() == f.model.parse_state("2"));
  CHECK(mixed.coords(4)[1] == f.model.parse_state("2'"));
  // Inadmissible transitions are rejected by TailPoint validation.
  CHECK_THROWS(parse_point("0 0", f.model));
  CHECK_THROWS_AS(parse_point("1 1' zzz", f.model), UnknownStateError);
}

TEST_CASE("measure rules validate their target model") {
  ModelFile e1 = parse("[graph]\nbuilder = example1\nalpha = -1\n");
  MeasureSpec bad_rule{"m", "mystery", {}};
  CHECK_THROWS_AS(materialize_measure(bad_rule, e1.model, 1.0), InadmissibleError);
  MeasureSpec ray{"m", "delta_ray", {}};
  CHECK_THROWS_AS(materialize_measure(ray, e1.model, 1.0), InadmissibleError);
  ModelFile e2 = parse("[graph]\nbuilder = example2\nalpha = -0.8\n");
  CylinderMeasure mu = materialize_measure(ray, e2.model, 1.0);
  CHECK(mu.mass(example2_ray(3)).value == 1.0);
  MeasureSpec green_no_state{"g", "green", {}};
  CHECK_THROWS_AS(materialize_measure(green_no_state, e1.model, 1.0), InadmissibleError);
  MeasureSpec path_on_tree{"p", "path", {}};
  ModelFile tree = parse("[graph]\nbuilder = regular_tree\ndegree = 3\n");
  CylinderMeasure tree_mu = materialize_measure(path_on_tree, tree.model, 1.0);
  Word step{tree.model.origin, tree.model.graph->out_edges(tree.model.origin)[0]};
  CHECK(tree_mu.mass(step).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("green measure from a spec matches the direct construction") {
  ModelFile f = parse(
      "[graph]\nbuilder = self_loop\nalpha = -1\n"
      "[measure g]\nrule = green\nstate = o\n");
  GreenOptions opt;
  opt.tol = 1e-14;
  CylinderMeasure mu = materialize_measure(f.measures[0], f.model, 1.0, opt);
  double expect = 1.0 / (1.0 - std::exp(-1.0));
  CHECK(mu.mass(Word{f.model.origin}).value == doctest::Approx(expect).epsilon(1e-12));
}
