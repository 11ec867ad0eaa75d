#include <doctest.h>

#include <algorithm>

#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"

using namespace idrt;

namespace {

Term T(const char* s) { return parse_term(s); }

const char* kOmega = "([x:Type]x(x))([x:Type]x(x))";

bool has_reduct(const std::vector<Step>& steps, const Term& t) {
  return std::any_of(steps.begin(), steps.end(), [&](const Step& s) { return alpha_eq(s.result, t); });
}

bool contains(const std::vector<Term>& ts, const Term& t) {
  return std::any_of(ts.begin(), ts.end(), [&](const Term& u) { return alpha_eq(u, t); });
}

}  // namespace

TEST_CASE("root redexes") {
  auto b = root_redex(T("([x:Type]x)(y)"));
  REQUIRE(b);
  CHECK(b->kind == StepKind::Beta);
  CHECK(alpha_eq(b->result, T("y")));

  auto p1 = root_redex(T("[<r, l = a : A>]"));
  REQUIRE(p1);
  CHECK(p1->kind == StepKind::Pi1);
  CHECK(alpha_eq(p1->result, T("r")));

  auto p2 = root_redex(T("<r, l = a : A>.l"));
  REQUIRE(p2);
  CHECK(p2->kind == StepKind::Pi2);
  CHECK(alpha_eq(p2->result, T("a")));

  auto p3 = root_redex(T("<r, l = a : A>.m"));
  REQUIRE(p3);
  CHECK(p3->kind == StepKind::Pi2Prime);
  CHECK(alpha_eq(p3->result, T("r.m")));

  auto e = root_redex(T("[x:Type]f(x)"));
  REQUIRE(e);
  CHECK(e->kind == StepKind::Eta);
  CHECK(alpha_eq(e->result, T("f")));

  CHECK_FALSE(root_redex(T("[x:Type]x(x)")));
  CHECK_FALSE(root_redex(T("x.l")));
  CHECK_FALSE(root_redex(T("[r]")));
}

TEST_CASE("one-step reducts") {
  CHECK(one_step(T("x")).empty());

  // Outer and inner beta give alpha-equal reducts here, kept once.
  CHECK(one_step(T("([x:Type]x)(([y:Type]y)(z))")).size() == 1);

  auto two = one_step(T("([x:Type]g(x))(([y:Type]y)(z))"));
  CHECK(two.size() == 3);
  CHECK(has_reduct(two, T("([x:Type]g(x))(z)")));
  CHECK(has_reduct(two, T("g(([y:Type]y)(z))")));

  auto inner = one_step(T("<<>, l = ([x:Type]x)(a) : A>"));
  REQUIRE(inner.size() == 1);
  CHECK(alpha_eq(inner[0].result, T("<<>, l = a : A>")));

  // Kind annotations reduce too.
  auto ann = one_step(T("[x:El(([y:Type]y)(T))]x"));
  REQUIRE(ann.size() == 1);
  CHECK(alpha_eq(ann[0].result, T("[x:El(T)]x")));
  CHECK(one_step(parse_kind("El(([y:Type]y)(T))")).size() == 1);
}

TEST_CASE("no record eta") {
  // <[r], l = r.l : A> would contract to r under record-eta; here it is stuck
  // apart from its components.
  Term t = T("<[r], l = r.l : A>");
  CHECK_FALSE(root_redex(t));
  CHECK_FALSE(has_reduct(one_step(t), T("r")));
  ReductionGraph g = reduction_graph(t, 100);
  CHECK(g.nodes.size() == 1);
  CHECK(is_normal(t));
}

TEST_CASE("untyped normalisation") {
  for (auto s : {Strategy::LeftmostOutermost, Strategy::RightmostInnermost}) {
    auto r = normalize_untyped(T("([x:Type]x)(y)"), 10, s);
    CHECK(alpha_eq(r.term, T("y")));
    CHECK_FALSE(r.exhausted);
    CHECK(r.steps == 1);
  }
  for (std::size_t fuel : {0u, 1u, 10u, 1000u}) {
    CHECK(normalize_untyped(T(kOmega), fuel).exhausted);
  }
  auto p = normalize_untyped(T("<<>, l = a : A>.l"), 1);
  CHECK(alpha_eq(p.term, T("a")));
  CHECK_FALSE(p.exhausted);
  CHECK(normalize_untyped(T("([x:Type]x)(([y:Type]y)(z))"), 1).exhausted);
}

TEST_CASE("strategies pick different redexes") {
  Term t = T("([x:Type]g(x))(([y:Type]y)(z))");
  auto lo = strategy_step(t, Strategy::LeftmostOutermost);
  auto ri = strategy_step(t, Strategy::RightmostInnermost);
  REQUIRE(lo);
  REQUIRE(ri);
  CHECK(alpha_eq(lo->result, T("g(([y:Type]y)(z))")));
  CHECK(alpha_eq(ri->result, T("([x:Type]g(x))(z)")));
  CHECK_FALSE(strategy_step(T("z"), Strategy::LeftmostOutermost));
}

TEST_CASE("weak-head and normal forms") {
  CHECK(is_whnf(T("[x:Type]x")));
  CHECK(is_whnf(T("[x:Type]([y:Type]y)(x)")));
  CHECK_FALSE(is_whnf(T("[<r, l = a : A>]")));
  CHECK(is_whnf(T("x.l")));
  CHECK(is_whnf(T("f(([y:Type]y)(x))")));
  CHECK_FALSE(is_whnf(T("([x:Type]x)(y)")));
  CHECK(is_whnf(T("<<>, l = ([x:Type]x)(a) : A>")));

  CHECK_FALSE(is_normal(T("[x:Type]f(x)")));
  CHECK(is_normal(T("<<>, l = x : [y:El(<>)]T>")));
  CHECK_FALSE(is_normal(T("[x:Type]([y:Type]y)(x)")));
  CHECK(is_normal(T("[x:Type]x")));
  CHECK(is_eta_redex(T("[x:Type]f(x)")));
  CHECK_FALSE(is_eta_redex(T("[x:Type]x(x)")));
  CHECK(is_normal(parse_kind("(x:Type)El(x)")));
  CHECK_FALSE(is_normal(parse_kind("El(([x:Type]x)(T))")));
}

TEST_CASE("parallel reduction") {
  CHECK(contains(parallel_reducts(T("x")), T("x")));
  auto b = parallel_reducts(T("([x:Type]x)(y)"));
  CHECK(contains(b, T("([x:Type]x)(y)")));
  CHECK(contains(b, T("y")));
  CHECK(contains(parallel_reducts(T("([x:Type]x)(([y:Type]y)(z))")), T("z")));
  CHECK(contains(parallel_reducts(T("<<>, l = ([x:Type]x)(a) : A>.l")), T("a")));
}

TEST_CASE("reduction graphs") {
  ReductionGraph y = reduction_graph(T("y"), 100);
  CHECK(y.nodes.size() == 1);
  CHECK(y.edges.empty());
  CHECK_FALSE(y.truncated);

  ReductionGraph b = reduction_graph(T("([x:Type]x)(y)"), 100);
  CHECK(b.nodes.size() == 2);
  CHECK(b.edges.size() == 1);
  CHECK(b.acyclic());
  CHECK(b.joinable());
  CHECK(b.normal_nodes().size() == 1);

  ReductionGraph d = reduction_graph(T("([x:Type]g(x))(([y:Type]y)(z))"), 100);
  CHECK(d.nodes.size() == 4);
  CHECK(d.normal_nodes().size() == 1);
  CHECK(d.joinable());
  auto reach = d.reachable(0);
  CHECK(std::all_of(reach.begin(), reach.end(), [](bool v) { return v; }));
}

TEST_CASE("omega never closes") {
  // Omega contracts to itself, so its graph is a single node with a loop:
  // finite, but not acyclic. A variant that grows on every step truncates.
  ReductionGraph w = reduction_graph(T(kOmega), 100);
  CHECK(w.nodes.size() == 1);
  CHECK_FALSE(w.acyclic());
  CHECK_FALSE(w.truncated);

  ReductionGraph grow = reduction_graph(T("([x:Type]x(x)(x))([x:Type]x(x)(x))"), 50);
  CHECK(grow.truncated);
}

TEST_CASE("one step is a parallel step and parallel steps are reachable") {
  EnumConfig cfg;
  cfg.max_term_size = 6;
  cfg.random_samples = 0;
  Context g = parse_context("T:Type, F:(El(T))Type, c:El(T)");
  std::size_t n = 0;
  enumerate_raw(cfg, g, 6, [&](const Term& t) {
    if (++n % 7 != 0) return true;
    auto par = parallel_reducts(t);
    for (const auto& s : one_step(t)) CHECK(contains(par, s.result));
    ReductionGraph gr = reduction_graph(t, 2000);
    if (!gr.truncated) {
      auto reach = gr.reachable(0);
      for (const auto& p : par) {
        auto i = gr.find(p);
        CHECK(i.has_value());
        if (i) CHECK(reach[*i]);
      }
    }
    return true;
  });
  CHECK(n > 1000);
}

TEST_CASE("step names") {
  for (auto k : {StepKind::Beta, StepKind::Eta, StepKind::Pi1, StepKind::Pi2, StepKind::Pi2Prime}) {
    CHECK(step_from_name(step_name(k)) == k);
  }
  CHECK_FALSE(step_from_name("Delta"));
  CHECK(is_beta_r(StepKind::Pi2Prime));
  CHECK_FALSE(is_beta_r(StepKind::Eta));
}

TEST_CASE("parallel reduction is reflexive and substitutive") {
  EnumConfig cfg;
  cfg.max_term_size = 5;
  cfg.random_samples = 0;
  Context g = parse_context("T:Type, F:(El(T))Type, x:El(T), c:El(T)");
  std::vector<Term> ts;
  enumerate_raw(cfg, g, 5, [&](const Term& t) {
    ts.push_back(t);
    return true;
  });
  Term n = T("([y:El(T)]y)(c)");
  auto n_par = parallel_reducts(n);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ts.size(); i += 11) {
    const Term& m = ts[i];
    auto m_par = parallel_reducts(m);
    CHECK(contains(m_par, m));
    if (!occurs_free(m, "x")) continue;
    auto target = parallel_reducts(substitute(m, "x", n));
    for (const auto& m2 : m_par) {
      for (const auto& n2 : n_par) {
        ++checked;
        CHECK(contains(target, substitute(m2, "x", n2)));
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("normal implies weak-head normal on the corpus") {
  EnumConfig cfg;
  cfg.max_term_size = 5;
  cfg.random_samples = 20;
  for (const auto& it : build_corpus(cfg).items) {
    for (const auto& node : reduction_graph(it.term, 500).nodes) {
      if (is_normal(node)) CHECK(is_whnf(node));
    }
  }
}
