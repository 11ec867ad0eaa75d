#include <doctest.h>

#include <algorithm>

#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/syntax.hpp"

using namespace idrt;

namespace {

Term T(const char* s) { return parse_term(s); }

}  // namespace

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(T("[x:Type]x"), T("[y:Type]y")));
  CHECK_FALSE(alpha_eq(T("<<>, l : A>"), T("<<>, m : A>")));
  CHECK_FALSE(alpha_eq(T("x"), T("y")));
  CHECK(alpha_eq(parse_kind("(x:Type)El(x)"), parse_kind("(y:Type)El(y)")));
  CHECK_FALSE(alpha_eq(parse_kind("RType[k]"), parse_kind("RType[l]")));
  CHECK_FALSE(alpha_eq(parse_kind("RType[]"), parse_kind("RType")));
  // Hints do not take part in hashing either.
  CHECK(T("[x:Type]x").hash() == T("[y:Type]y").hash());
}

TEST_CASE("substitution") {
  CHECK(alpha_eq(substitute(T("x"), "x", T("y")), T("y")));

  Term r = substitute(T("[y:Type]x"), "x", T("y"));
  REQUIRE(r.tag() == TermTag::Lam);
  // The free y must stay free: the body refers to the outer y, not the binder.
  CHECK(alpha_eq(instantiate(r.body(), var("z")), T("y")));
  CHECK(free_vars(r) == NameSet{"y"});
  CHECK(print_term(r) != "[y:Type]y");

  CHECK(alpha_eq(substitute(T("<<>, l = x : [_:El(<>)]B>"), "x", T("a")), T("<<>, l = a : [_:El(<>)]B>")));
  CHECK(alpha_eq(substitute(parse_kind("El(F(x))"), "x", T("c")), parse_kind("El(F(c))")));
  // No occurrence, no change.
  Term s = T("f(z)");
  CHECK(alpha_eq(substitute(s, "x", T("y")), s));
}

TEST_CASE("free variables") {
  CHECK(free_vars(T("[x:Type]x")).empty());
  CHECK(free_vars(T("<p, l = q : s>")) == NameSet{"p", "q", "s"});
  CHECK(free_vars(T("x(y)")) == NameSet{"x", "y"});
  CHECK(free_vars(parse_kind("(x:El(T))El(F(x))")) == NameSet{"F", "T"});
  CHECK(occurs_free(T("r.l"), "r"));
  CHECK_FALSE(occurs_free(T("[r:Type]r"), "r"));
}

TEST_CASE("pair records") {
  CHECK(is_pair_record(T("<<>, l = a : A>")));
  CHECK_FALSE(is_pair_record(T("<>")));
  CHECK_FALSE(is_pair_record(T("<<>, l : A>")));
  CHECK(is_abstraction(T("[x:Type]x")));
  CHECK_FALSE(is_abstraction(T("f(x)")));
}

TEST_CASE("top labels") {
  CHECK(top_labels(T("<>")).empty());
  CHECK(top_labels(T("<<<>, n : A>, v : B>")) == LabelSet{Label("n"), Label("v")});
  CHECK_THROWS_AS(top_labels(T("f(a)")), NotRecordType);
  CHECK_THROWS_AS(top_labels(T("<R, l : A>")), NotRecordType);
}

TEST_CASE("sizes count every node") {
  CHECK(T("x").size() == 1);
  CHECK(T("x(y)").size() == 3);
  // Lam, its domain Type, and the body.
  CHECK(T("[x:Type]x").size() == 3);
  CHECK(T("<<>, l : A>").size() == 3);
  CHECK(T("<<>, l = a : A>").size() == 4);
  CHECK(parse_kind("RType[k, l]").size() == 1);
  CHECK(parse_kind("El(x)").size() == 2);
}

TEST_CASE("de Bruijn plumbing") {
  Term body = abstract(T("f(x)"), "x");
  CHECK(body.loose() == 1);
  CHECK(alpha_eq(instantiate(body, T("a")), T("f(a)")));
  CHECK(alpha_eq(lam_over("x", type_kind(), T("x")), T("[y:Type]y")));
  CHECK(occurs_bound(body, 0));
  CHECK(alpha_eq(shift(shift(body, 2), -2), body));
}

TEST_CASE("contexts") {
  Context g = parse_context("T:Type, x:El(T), x:Type");
  REQUIRE(g.find("x") != nullptr);
  CHECK(g.find("x")->kind.tag() == KindTag::Type);
  CHECK(g.domain() == NameSet{"T", "x"});
  CHECK(g.prefix(1).size() == 1);
  CHECK(g.extended("y", type_kind()).size() == 4);
  CHECK(parse_context("()").empty());
}

TEST_CASE("fresh names") {
  CHECK(fresh_name("x", {}) == "x");
  CHECK(fresh_name("x", {"x"}) != "x");
  CHECK(fresh_name("_", {}) == "x");
  CHECK(fresh_name("", {"x"}) != "x");
}

TEST_CASE("label sets") {
  LabelSet a{Label("k")}, b{Label("k"), Label("l")};
  CHECK(is_subset(a, b));
  CHECK_FALSE(is_subset(b, a));
  CHECK(is_subset({}, a));
  CHECK(label_union(a, {Label("m")}).size() == 2);
}

namespace {

std::vector<Term> small_terms() {
  EnumConfig cfg;
  cfg.max_term_size = 4;
  cfg.random_samples = 0;
  std::vector<Term> out;
  Context g = parse_context("T:Type, F:(El(T))Type, x:El(T), y:El(T)");
  enumerate_raw(cfg, g, 4, [&](const Term& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

bool subset(const NameSet& a, const NameSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("substitution laws over small terms") {
  auto ts = small_terms();
  REQUIRE(ts.size() > 1000);
  Term a = T("F(y)");
  Term b = T("[z:El(T)]z");
  for (std::size_t i = 0; i < ts.size(); i += 3) {
    const Term& t = ts[i];
    CHECK(alpha_eq(substitute(t, "x", var("x")), t));

    // [b/y]([a/x]t) = [([b/y]a)/x]([b/y]t), x not free in b.
    Term lhs = substitute(substitute(t, "x", a), "y", b);
    Term rhs = substitute(substitute(t, "y", b), "x", substitute(a, "y", b));
    CHECK(alpha_eq(lhs, rhs));

    NameSet bound = free_vars(t);
    bound.erase("x");
    for (const auto& n : free_vars(a)) bound.insert(n);
    CHECK(subset(free_vars(substitute(t, "x", a)), bound));
  }
}

TEST_CASE("alpha equivalence is an equivalence") {
  auto ts = small_terms();
  for (std::size_t i = 0; i < ts.size(); i += 97) {
    const Term& t = ts[i];
    CHECK(alpha_eq(t, t));
    Term renamed = parse_term(print_term(t));
    CHECK(alpha_eq(t, renamed) == alpha_eq(renamed, t));
    for (std::size_t j = i; j < ts.size() && j < i + 40; ++j) {
      CHECK(alpha_eq(ts[i], ts[j]) == alpha_eq(ts[j], ts[i]));
      if (alpha_eq(ts[i], renamed) && alpha_eq(renamed, ts[j])) CHECK(alpha_eq(ts[i], ts[j]));
    }
  }
}
