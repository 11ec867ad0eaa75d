#include <doctest.h>

#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"
#include "idrt/tos.hpp"

using namespace idrt;

namespace {

Term T(const char* s) { return parse_term(s); }
Context C(const char* s) { return parse_context(s); }

bool rule_in(const TosTrace& t, TosRule r) {
  if (t.rule == r) return true;
  for (const auto& p : t.premises) {
    if (rule_in(p, r)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("context normalisation") {
  Engine e;
  CHECK(e.eval_context(Context{}).empty());
  Context d = e.eval_context(C("A:Type, x:El(([y:Type]y)(A))"));
  CHECK(alpha_eq(d, C("A:Type, x:El(A)")));
  CHECK(d.domain() == NameSet{"A", "x"});
  CHECK_THROWS_AS(e.eval_context(C("x:Type, x:Type")), NotDerivable);
  CHECK_THROWS_AS(e.eval_context(C("x:El(y)")), NotDerivable);
}

TEST_CASE("kind normalisation") {
  Engine e;
  CHECK(alpha_eq(e.eval_kind({}, type_kind()), type_kind()));
  CHECK(alpha_eq(e.eval_kind({}, rtype({Label("l")})), rtype({Label("l")})));
  CHECK(alpha_eq(e.eval_kind({}, rtype()), rtype()));
  CHECK(alpha_eq(e.eval_kind({}, parse_kind("(x:Type)El(([y:Type]y)(x))")), parse_kind("(x:Type)El(x)")));
  CHECK_THROWS_AS(e.eval_kind({}, parse_kind("El(T)")), NotDerivable);
}

TEST_CASE("the overloaded empty record") {
  Engine e;
  EvalResult ty = e.eval_term({}, empty_rec(), Demand::RecordType);
  CHECK(alpha_eq(ty.kind, rtype(LabelSet{})));
  EvalResult val = e.eval_term({}, empty_rec(), Demand::Value);
  CHECK(alpha_eq(val.kind, el(empty_rec())));
  CHECK(alpha_eq(val.whnf, empty_rec()));
  CHECK(alpha_eq(val.nf, empty_rec()));
  CHECK(demand_of(type_kind()) == Demand::RecordType);
  CHECK(demand_of(rtype()) == Demand::RecordType);
  CHECK(demand_of(el(var("T"))) == Demand::Value);
}

TEST_CASE("field selection") {
  Engine e;
  Context g = C("T:Type, a:El(T)");
  EvalResult r = e.eval_term(g, T("<<>, l = a : [_:El(<>)]T>.l"));
  CHECK(alpha_eq(r.whnf, T("a")));
  CHECK(alpha_eq(r.nf, T("a")));
  CHECK(alpha_eq(r.kind, el(var("T"))));
  CHECK(alpha_eq(r.nf, normalize_untyped(T("<<>, l = a : [_:El(<>)]T>.l"), 100).term));
}

TEST_CASE("restriction of a variable") {
  Engine e(EngineOptions{.trace = true});
  Context g = C("T:Type, r:El(<<>, l : [_:El(<>)]T>)");
  EvalResult r = e.eval_term(g, T("[r]"));
  CHECK(alpha_eq(r.whnf, T("[r]")));
  CHECK(alpha_eq(r.nf, T("[r]")));
  CHECK(alpha_eq(r.kind, el(empty_rec())));
  REQUIRE(e.last_trace());
  CHECK(e.last_trace()->rule == TosRule::BASE_RESTR);
}

TEST_CASE("selection skipping a label") {
  Engine e(EngineOptions{.trace = true});
  Context g = C("T:Type, r:El(<k : T, l : T>)");
  EvalResult r = e.eval_term(g, T("r.k"));
  CHECK(alpha_eq(r.kind, el(var("T"))));
  // The skip rule takes both forms from [r].k.
  CHECK(alpha_eq(r.whnf, T("[r].k")));
  CHECK(alpha_eq(r.nf, T("[r].k")));
  CHECK(e.last_trace()->rule == TosRule::FLDSL_PRIME);
}

TEST_CASE("beta, eta and base application") {
  Engine e(EngineOptions{.trace = true});
  Context g = C("T:Type, F:(El(T))Type, c:El(T)");

  EvalResult b = e.eval_term(g, T("([x:El(T)]x)(c)"));
  CHECK(alpha_eq(b.whnf, T("c")));
  CHECK(e.last_trace()->rule == TosRule::BETA);

  EvalResult eta = e.eval_term(g, T("[x:El(T)]F(x)"));
  CHECK(alpha_eq(eta.nf, T("F")));
  CHECK(alpha_eq(eta.whnf, T("[x:El(T)]F(x)")));
  CHECK(alpha_eq(eta.kind, parse_kind("(El(T))Type")));
  CHECK(e.last_trace()->rule == TosRule::ETA);

  EvalResult base = e.eval_term(g, T("F(c)"));
  CHECK(alpha_eq(base.kind, type_kind()));
  CHECK(e.last_trace()->rule == TosRule::BASE);

  EvalResult lam = e.eval_term(g, T("[x:El(T)]x"));
  CHECK(e.last_trace()->rule == TosRule::LAM);
  CHECK(alpha_eq(lam.kind, parse_kind("(x:El(T))El(T)")));
}

TEST_CASE("record types and records") {
  Engine e(EngineOptions{.trace = true});
  Context g = C("T:Type, c:El(T)");
  EvalResult rt = e.eval_term(g, T("<k : T, l : T>"), Demand::RecordType);
  CHECK(alpha_eq(rt.kind, rtype({Label("k"), Label("l")})));
  CHECK(e.last_trace()->rule == TosRule::RCDT);

  CHECK_THROWS_AS(e.eval_term(g, T("<<<>, l : [_:El(<>)]T>, l : [_:El(<l : T>)]T>"), Demand::RecordType),
                  NotDerivable);

  EvalResult rc = e.eval_term(g, T("<<>, k = c : [_:El(<>)]T>"));
  CHECK(alpha_eq(rc.kind, el(T("<k : T>"))));
  CHECK(e.last_trace()->rule == TosRule::RCD);

  // Family at the wrong type for the value.
  CHECK_THROWS_AS(e.eval_term(g, T("<<>, k = c : [_:El(<>)]c>")), NotDerivable);
}

TEST_CASE("failures name the rule and the path") {
  Engine e;
  try {
    e.eval_term(C("T:Type"), T("T(T)"));
    FAIL("expected NotDerivable");
  } catch (const NotDerivable& ex) {
    CHECK_FALSE(ex.reason().empty());
    CHECK_FALSE(ex.rule().empty());
    CHECK_FALSE(ex.path().empty());
  }
  CHECK_THROWS_AS(e.eval_term({}, T("x")), NotDerivable);
  CHECK_THROWS_AS(e.eval_term({}, hole()), NotDerivable);
}

TEST_CASE("fuel") {
  Engine e(EngineOptions{.fuel = 3});
  CHECK_THROWS_AS(e.eval_term(C("T:Type, c:El(T)"), T("([x:El(T)]([y:El(T)]y)(x))(c)")), FuelExhausted);
  Engine ok(EngineOptions{.fuel = 10000});
  CHECK_NOTHROW(ok.eval_term(C("T:Type, c:El(T)"), T("([x:El(T)]([y:El(T)]y)(x))(c)")));
}

TEST_CASE("traces") {
  Engine e(EngineOptions{.trace = true});
  e.eval_term(C("T:Type, c:El(T), r:El(<k : T>)"), T("<r, l = c : [_:El(<k : T>)]T>.l"));
  REQUIRE(e.last_trace());
  const TosTrace& t = *e.last_trace();
  CHECK(t.rule == TosRule::FLDSEL);
  CHECK(t.form == TraceForm::Term);
  CHECK(rule_in(t, TosRule::RCD));
  CHECK(t.conclusion().find("|=") != std::string::npos);
  CHECK(t.to_text().find("FLDSEL") != std::string::npos);

  e.set_trace(false);
  e.eval_term(C("T:Type"), T("T"));
  CHECK(e.last_trace()->rule == TosRule::FLDSEL);
}

TEST_CASE("rule counters") {
  Engine e;
  e.eval_term(C("T:Type, c:El(T)"), T("([x:El(T)]x)(c)"));
  CHECK(e.counts()[static_cast<std::size_t>(TosRule::BETA)] == 1);
  CHECK(e.counts()[static_cast<std::size_t>(TosRule::VAR)] > 0);
  e.reset_counts();
  CHECK(e.counts()[static_cast<std::size_t>(TosRule::BETA)] == 0);
}

TEST_CASE("rule names") {
  for (std::size_t i = 0; i < kTosRuleCount; ++i) {
    auto r = static_cast<TosRule>(i);
    CHECK(tos_rule_from_name(tos_rule_name(r)) == r);
  }
  CHECK(tos_rule_name(TosRule::RTYPE_L) == "RTYPE[L]");
  CHECK(tos_rule_name(TosRule::FLDSL_PRIME) == "FLDSL'");
}

TEST_CASE("normal forms are fixed points and reducts evaluate forward") {
  EnumConfig cfg;
  cfg.max_term_size = 5;
  cfg.random_samples = 50;
  Corpus c = build_corpus(cfg);
  Engine e;
  std::size_t reducts = 0;
  for (const auto& it : c.items) {
    Demand d = demand_of(it.result.kind);
    EvalResult again = e.eval_term(it.ctx, it.result.nf, d);
    CHECK(alpha_eq(again.nf, it.result.nf));
    CHECK(alpha_eq(again.kind, it.result.kind));

    // A one-step reduct keeps nf and kind, and its whnf is reachable from
    // the original whnf.
    for (const auto& s : one_step(it.term)) {
      ++reducts;
      EvalResult r = e.eval_term(it.ctx, s.result, d);
      CHECK(alpha_eq(r.nf, it.result.nf));
      CHECK(alpha_eq(r.kind, it.result.kind));
      ReductionGraph gr = reduction_graph(it.result.whnf, 2000);
      auto at = gr.find(r.whnf);
      CHECK_MESSAGE(at.has_value(), print_term(it.term) << " -> " << print_term(s.result));
    }
  }
  CHECK(reducts > 100);
}
