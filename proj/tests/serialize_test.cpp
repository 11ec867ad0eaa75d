#include <doctest.h>

#include "idrt/frontend.hpp"
#include "idrt/serialize.hpp"

using namespace idrt;

namespace {

bool same_trace(const TosTrace& a, const TosTrace& b) {
  if (a.rule != b.rule || a.form != b.form || a.premises.size() != b.premises.size()) return false;
  if (a.conclusion() != b.conclusion()) return false;
  for (std::size_t i = 0; i < a.premises.size(); ++i) {
    if (!same_trace(a.premises[i], b.premises[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("trace round trip") {
  Engine e(EngineOptions{.trace = true});
  e.eval_term(parse_context("T:Type, c:El(T), r:El(<k : T>)"),
              parse_term("[<r, l = ([x:El(T)]x)(c) : [_:El(<k : T>)]T>]"));
  REQUIRE(e.last_trace());
  json j = to_json(*e.last_trace());
  CHECK(j["rule"] == "RESTR");
  TosTrace back = trace_from_json(json::parse(j.dump()));
  CHECK(same_trace(back, *e.last_trace()));
  CHECK(to_json(back) == j);

  e.eval_context(parse_context("T:Type"));
  json c = to_json(*e.last_trace());
  CHECK(c["form"] == "context");
  CHECK(to_json(trace_from_json(c)) == c);

  e.eval_kind(parse_context("T:Type"), parse_kind("(x:El(T))Type"));
  json k = to_json(*e.last_trace());
  CHECK(k["form"] == "kind");
  CHECK(to_json(trace_from_json(k)) == k);
}

TEST_CASE("check report round trip") {
  Checker c(EngineOptions{.trace = true});
  CheckReport ok = c.infer(parse_context("T:Type, c:El(T)"), parse_term("([x:El(T)]x)(c)"));
  json j = to_json(ok);
  CHECK(j["verdict"] == "accepted");
  CHECK(j["nf"] == "c");
  CHECK(to_json(check_report_from_json(j)) == j);

  CheckReport bad = c.infer(parse_context("T:Type"), parse_term("T(T)"));
  json b = to_json(bad);
  CHECK(b["verdict"] == "rejected");
  CHECK(b["failure"].is_object());
  CheckReport back = check_report_from_json(b);
  REQUIRE(back.failure);
  CHECK(back.failure->reason == bad.failure->reason);
  CHECK(back.failure->path == bad.failure->path);
  CHECK(to_json(back) == b);
}

TEST_CASE("property report round trip") {
  PropertyReport r{"Determinacy", 12, {{"x", "y", "z"}}};
  json j = to_json(r);
  CHECK(j["passed"] == false);
  PropertyReport back = property_report_from_json(j);
  CHECK(back.property == r.property);
  CHECK(back.instances_checked == 12);
  REQUIRE(back.failures.size() == 1);
  CHECK(back.failures[0].got == "z");
  CHECK(to_json(back) == j);
}

TEST_CASE("graph round trip") {
  ReductionGraph g = reduction_graph(parse_term("([x:Type]g(x))(([y:Type]y)(z))"), 100);
  json j = to_json(g);
  ReductionGraph back = graph_from_json(j);
  REQUIRE(back.nodes.size() == g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) CHECK(alpha_eq(back.nodes[i], g.nodes[i]));
  CHECK(back.edges.size() == g.edges.size());
  CHECK(back.truncated == g.truncated);
  CHECK(back.joinable());
  CHECK(to_json(back) == j);
}

TEST_CASE("derivation round trip") {
  auto r = derive_auto(parse_judgement("T:Type, r:El(<k : T, l : T>) |- r.k = [r].k : El(T)"));
  REQUIRE(r.deriv);
  json j = to_json(*r.deriv);
  CHECK(j["height"] == derivation_height(*r.deriv));
  DerivPtr back = derivation_from_json(j);
  CHECK(print_derivation(*back) == print_derivation(*r.deriv));
  CHECK(check_derivation(*back, SystemVariant::Minus).ok);

  DeclDiagnostic d{{0, 1}, "BETA", "conclusion", "expected c, got d"};
  json dj = to_json(d);
  DeclDiagnostic db = diagnostic_from_json(dj);
  CHECK(db.path == d.path);
  CHECK(db.message == d.message);
  CHECK(to_json(db) == dj);
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(trace_from_json(json::object()), std::invalid_argument);
  CHECK_THROWS_AS(trace_from_json(json{{"rule", "NOPE"}, {"form", "term"}}), std::invalid_argument);
  CHECK_THROWS_AS(check_report_from_json(json{{"verdict", "maybe"}}), std::invalid_argument);
  CHECK_THROWS_AS(check_report_from_json(json{{"verdict", "accepted"}, {"nf", "[x"}}), std::invalid_argument);
  CHECK_THROWS_AS(property_report_from_json(json{{"property", 3}}), std::invalid_argument);
  CHECK_THROWS_AS(graph_from_json(json{{"nodes", json::array({"x"})},
                                       {"edges", json::array({{{"src", 0}, {"step", "Beta"}, {"dst", 4}}})},
                                       {"truncated", false}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(derivation_from_json(json{{"script", "derive"}}), std::invalid_argument);
  CHECK_THROWS_AS(diagnostic_from_json(json::array()), std::invalid_argument);
}
