#include <doctest.h>

#include <fstream>
#include <sstream>

#include "idrt/checker.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"

using namespace idrt;

namespace {

Term T(const char* s) { return parse_term(s); }
Kind K(const char* s) { return parse_kind(s); }
Context C(const char* s) { return parse_context(s); }

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(IDRT_SOURCE_DIR) + "/" + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("context checking") {
  Checker c;
  CHECK(c.check_context(Context{}).accepted());
  CHECK(c.check_context(C("A:Type, x:El(A)")).accepted());
  CheckReport bad = c.check_context(C("x:El(y)"));
  CHECK_FALSE(bad.accepted());
  REQUIRE(bad.failure);
  CHECK_FALSE(bad.failure->reason.empty());
}

TEST_CASE("inference") {
  Checker c;
  CheckReport r = c.infer(C("T:Type"), T("<<>, l : [_:El(<>)]T>"), Demand::RecordType);
  REQUIRE(r.accepted());
  CHECK(alpha_eq(*r.kind, rtype({Label("l")})));

  CheckReport dup = c.infer(C("A:Type"), T("<<<>, l : [_:El(<>)]A>, l : [_:El(<l : A>)]A>"), Demand::RecordType);
  CHECK_FALSE(dup.accepted());
  REQUIRE(dup.failure);
  CHECK(dup.failure->reason.find("l ∉ L") != std::string::npos);

  CheckReport sk = c.infer(C("T:Type, r:El(<<<>, k : [_:El(<>)]T>, l : [_:El(<k : T>)]T>)"), T("r.k"));
  REQUIRE(sk.accepted());
  CHECK(alpha_eq(*sk.kind, el(var("T"))));
}

TEST_CASE("checking against a kind") {
  Checker c;
  Context g = C("T:Type");
  Term lt = T("<<>, l : [_:El(<>)]T>");
  CHECK(c.check(g, lt, rtype({Label("l"), Label("m")})).accepted());
  CHECK(c.check(g, lt, rtype()).accepted());
  CHECK(c.check(g, lt, type_kind()).accepted());
  CHECK_FALSE(c.check(g, lt, rtype({Label("m")})).accepted());
  CHECK_FALSE(c.check(g, empty_rec(), el(lt)).accepted());
  CHECK(c.check(g, empty_rec(), el(empty_rec())).accepted());
  CHECK(c.check(g, empty_rec(), rtype(LabelSet{})).accepted());
  // The kind is normalised before comparison.
  CHECK(c.check(C("T:Type, c:El(T)"), T("c"), K("El(([x:Type]x)(T))")).accepted());
  CHECK_FALSE(c.check(C("T:Type, U:Type, c:El(T)"), T("c"), K("El(U)")).accepted());
}

TEST_CASE("subkinding") {
  CHECK(subkind(rtype({Label("k")}), rtype({Label("k"), Label("l")})));
  CHECK(subkind(rtype(LabelSet{}), rtype({Label("k")})));
  CHECK_FALSE(subkind(rtype({Label("k"), Label("l")}), rtype({Label("k")})));
  CHECK(subkind(rtype({Label("k")}), rtype()));
  CHECK(subkind(rtype(), type_kind()));
  CHECK(subkind(rtype({Label("k")}), type_kind()));
  CHECK_FALSE(subkind(type_kind(), rtype()));
  CHECK(subkind(el(var("T")), el(var("T"))));
  // No subkinding under products.
  CHECK_FALSE(subkind(arrow(type_kind(), rtype()), arrow(type_kind(), type_kind())));
}

TEST_CASE("the three computation equalities") {
  Checker c;
  Context g = C("T:Type, c:El(T), r:El(<k : T>)");
  CHECK(c.equal(g, T("[<r, l = c : [_:El(<k : T>)]T>]"), T("r"), K("El(<k : T>)")).accepted());
  CHECK(c.equal(g, T("<r, l = c : [_:El(<k : T>)]T>.l"), T("c"), K("El(T)")).accepted());
  Context g2 = C("T:Type, s:El(<k : T, l : T>)");
  CHECK(c.equal(g2, T("s.k"), T("[s].k"), K("El(T)")).accepted());
  // And a false one.
  CHECK_FALSE(c.equal(g, T("<r, l = c : [_:El(<k : T>)]T>.k"), T("c"), K("El(T)")).accepted());
}

TEST_CASE("equality") {
  Checker c;
  Context g = C("T:Type, F:(El(T))Type, c:El(T), d:El(T)");
  CHECK(c.equal(g, T("[x:El(T)]F(x)"), T("F"), K("(El(T))Type")).accepted());
  CHECK(c.equal(g, T("([x:El(T)]x)(c)"), T("c"), K("El(T)")).accepted());
  CHECK_FALSE(c.equal(g, T("c"), T("d"), K("El(T)")).accepted());
  CHECK_FALSE(c.equal(g, T("c"), T("c"), K("El(F(c))")).accepted());
  CHECK(c.kind_equal(g, K("El(([x:El(T)]F(x))(c))"), K("El(F(c))")).accepted());
  CHECK_FALSE(c.kind_equal(g, K("El(F(c))"), K("El(F(d))")).accepted());
}

TEST_CASE("judgements") {
  Checker c;
  CHECK(c.check_judgement(parse_judgement("() valid")).accepted());
  CHECK(c.check_judgement(parse_judgement("T:Type |- <k : T> : RType[k, l]")).accepted());
  CHECK(c.check_judgement(parse_judgement("T:Type |- (x:El(T))Type kind")).accepted());
  CHECK_FALSE(c.check_judgement(parse_judgement("T:Type |- <k : T> : RType[l]")).accepted());
  CHECK_FALSE(c.check_judgement(parse_judgement("T:Type |- El(<k : T>) = El(<l : T>)")).accepted());
}

TEST_CASE("reports never throw on bad input") {
  Checker c(EngineOptions{.fuel = 5});
  CheckReport r = c.infer(C("T:Type, c:El(T)"), T("([x:El(T)]([y:El(T)]y)(x))(c)"));
  CHECK_FALSE(r.accepted());
  REQUIRE(r.failure);
  CHECK(r.failure->reason.find("fuel") != std::string::npos);
  CHECK_FALSE(c.infer({}, T("x")).accepted());
  CHECK(c.infer({}, T("x")).to_text().find("rejected") != std::string::npos);
}

TEST_CASE("the record example file") {
  FileResult f = check_file(parse_file(slurp("samples/nat_vect.idrt")));
  CHECK(f.ok());
  CHECK(f.results.size() >= 6);
  bool saw_pair = false;
  for (const auto& r : f.results) {
    CHECK_MESSAGE(r.report.accepted(), r.report.to_text());
    if (r.directive.what == DirectiveKind::Check && r.directive.lhs.tag() == TermTag::RecExt) saw_pair = true;
  }
  CHECK(saw_pair);
}

TEST_CASE("the duplicate label file") {
  FileResult f = check_file(parse_file(slurp("samples/dup_label.idrt")));
  CHECK_FALSE(f.ok());
  bool cited = false;
  for (const auto& r : f.results) {
    if (r.report.failure && r.report.failure->reason.find("l ∉ L") != std::string::npos) cited = true;
  }
  CHECK(cited);
}

TEST_CASE("golden equalities file") {
  FileResult f = check_file(parse_file(slurp("samples/golden.idrt")));
  CHECK(f.ok());
  std::size_t eqs = 0;
  for (const auto& r : f.results) eqs += r.directive.what == DirectiveKind::Eq;
  CHECK(eqs == 3);
}

TEST_CASE("a bad declaration does not extend the context") {
  FileResult f = check_file(parse_file("x : El(y);\ncheck x : El(y);\nT : Type;\ncheck T : Type;\n"));
  REQUIRE(f.results.size() == 4);
  CHECK_FALSE(f.results[0].report.accepted());
  CHECK_FALSE(f.results[1].report.accepted());
  CHECK(f.results[1].ctx.empty());
  CHECK(f.results[3].report.accepted());
  CHECK_FALSE(f.ok());
}

TEST_CASE("equality is an equivalence on the corpus") {
  EnumConfig cfg;
  cfg.max_term_size = 4;
  cfg.random_samples = 20;
  Corpus corpus = build_corpus(cfg);
  Checker c;
  for (std::size_t i = 0; i < corpus.items.size(); i += 3) {
    const auto& it = corpus.items[i];
    const Kind& k = it.result.kind;
    CHECK(c.equal(it.ctx, it.term, it.term, k).accepted());
    CHECK(c.equal(it.ctx, it.term, it.result.nf, k).accepted());
    CHECK(c.equal(it.ctx, it.result.nf, it.term, k).accepted());
    CHECK(c.equal(it.ctx, it.result.whnf, it.result.nf, k).accepted());
  }
}

TEST_CASE("record congruences") {
  Checker c;
  Context g = parse_context("T:Type, c:El(T), r:El(<k : T>)");
  Term a = parse_term("<r, l = ([x:El(T)]x)(c) : [_:El(<k : T>)]T>");
  Term b = parse_term("<r, l = c : [_:El(<k : T>)]T>");
  Kind k = parse_kind("El(<k : T, l : T>)");
  CHECK(c.equal(g, a, b, k).accepted());
  CHECK(c.equal(g, restr(a), restr(b), parse_kind("El(<k : T>)")).accepted());
  CHECK(c.equal(g, sel(a, Label("l")), sel(b, Label("l")), parse_kind("El(T)")).accepted());
}
