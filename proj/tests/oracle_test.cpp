#include <doctest.h>

#include <algorithm>

#include "idrt/checker.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"

using namespace idrt;

namespace {

EnumConfig small(std::size_t size = 5) {
  EnumConfig cfg;
  cfg.max_term_size = size;
  cfg.random_samples = 50;
  return cfg;
}

bool has_term(const std::vector<CorpusItem>& items, const char* s) {
  Term t = parse_term(s);
  return std::any_of(items.begin(), items.end(), [&](const CorpusItem& it) { return alpha_eq(it.term, t); });
}

}  // namespace

TEST_CASE("config validation") {
  EnumConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_term_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.base_labels.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("base contexts respect the length bound") {
  EnumConfig cfg;
  auto all = base_contexts(cfg);
  CHECK(all.size() >= 6);
  CHECK(std::any_of(all.begin(), all.end(), [](const Context& g) { return g.empty(); }));
  Checker c;
  for (const auto& g : all) {
    CHECK(g.size() <= cfg.max_context_len);
    CHECK(c.check_context(g).accepted());
  }
  cfg.max_context_len = 2;
  for (const auto& g : base_contexts(cfg)) CHECK(g.size() <= 2);
}

TEST_CASE("typed terms of size one") {
  EnumConfig cfg = small();
  auto items = typed_terms(cfg, parse_context("T:Type, c:El(T)"), 1);
  CHECK(has_term(items, "c"));
  CHECK(has_term(items, "T"));
  CHECK(has_term(items, "<>"));
  // <> appears once per demand.
  CHECK(std::count_if(items.begin(), items.end(), [](const CorpusItem& it) {
          return it.term.tag() == TermTag::EmptyRec;
        }) == 2);
}

TEST_CASE("raw enumeration") {
  EnumConfig cfg = small(3);
  Context g = parse_context("T:Type");
  std::size_t n = 0;
  bool ill = false;
  enumerate_raw(cfg, g, 3, [&](const Term& t) {
    ++n;
    CHECK(t.size() <= 3);
    if (alpha_eq(t, parse_term("T(T)"))) ill = true;
    return true;
  });
  CHECK(n > 10);
  CHECK(ill);

  std::size_t stop = 0;
  enumerate_raw(cfg, g, 3, [&](const Term&) { return ++stop < 5; });
  CHECK(stop == 5);
}

TEST_CASE("omega is in the raw grammar once the size allows") {
  Term omega = parse_term("([x:Type]x(x))([x:Type]x(x))");
  CHECK(omega.size() == 11);
  Context g;
  EnumConfig cfg = small(11);
  CHECK(raw_enumerable(cfg, g, omega));
  // Above the default bound, so the default run meets it only through the
  // explicit negative controls.
  CHECK(omega.size() > EnumConfig{}.max_term_size);
  // Ill-typed, so never in the corpus.
  CHECK_FALSE(Checker().infer(g, omega).accepted());
}

TEST_CASE("corpus is deterministic in the seed") {
  EnumConfig cfg = small(4);
  Corpus a = build_corpus(cfg);
  Corpus b = build_corpus(cfg);
  REQUIRE(a.items.size() == b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) CHECK(alpha_eq(a.items[i].term, b.items[i].term));
  // A sample may contribute one item per demand.
  CHECK(a.enumerated + a.sampled <= a.items.size());
  CHECK(a.enumerated + 2 * a.sampled >= a.items.size());
  CHECK(a.sampled <= cfg.random_samples);
  cfg.random_samples = 0;
  CHECK(build_corpus(cfg).sampled == 0);
}

TEST_CASE("every corpus item is accepted by the checker at its kind") {
  EnumConfig cfg = small(4);
  Corpus c = build_corpus(cfg);
  Checker ch;
  for (const auto& it : c.items) {
    CheckReport r = ch.check(it.ctx, it.term, it.result.kind);
    CHECK_MESSAGE(r.accepted(), print_term(it.term));
  }
}

TEST_CASE("property suite at a small size") {
  Oracle o(small());
  for (Property p : all_properties()) {
    PropertyReport r = o.run(p);
    CHECK(r.property == property_name(p));
    CHECK(r.instances_checked > 0);
    if (p == Property::AdequacyReduction) continue;
    CHECK_MESSAGE(r.passed(), report_table({r}));
  }
}

TEST_CASE("adequacy fails exactly on skipped selections") {
  // A selection r.l' from a neutral r skips to [r].l' by the typed rule, but
  // no untyped step rewrites a neutral selection.
  PropertyReport r = run_property(Property::AdequacyReduction, small());
  CHECK_FALSE(r.passed());
  for (const auto& f : r.failures) {
    CHECK_MESSAGE(f.expected.find("].") != std::string::npos, f.input);
  }
}

TEST_CASE("structural properties") {
  auto rs = structural_suite(small(4));
  REQUIRE(rs.size() == 3);
  for (const auto& r : rs) {
    CHECK_MESSAGE(r.passed(), report_table({r}));
    CHECK(r.instances_checked > 0);
  }

  Engine e;
  Term c = parse_term("c");
  auto big = e.eval_term(parse_context("T:Type, U:Type, c:El(T)"), c);
  auto strong = e.eval_term(parse_context("T:Type, c:El(T)"), c);
  CHECK(alpha_eq(big.nf, strong.nf));
  CHECK(alpha_eq(big.kind, strong.kind));
  CHECK_THROWS_AS(e.eval_term(parse_context("U:Type, c:El(T)"), c), NotDerivable);
}

TEST_CASE("coverage at a small size") {
  // Small sizes miss the larger computation-rule instances.
  Oracle o(small());
  auto cov = o.coverage();
  CHECK_FALSE(cov.missing.empty());
  CHECK(cov.tos[static_cast<std::size_t>(TosRule::FLDSL_PRIME)] > 0);
  CHECK(cov.decl[static_cast<std::size_t>(DeclRule::SUBST_CTX)] > 0);
}

TEST_CASE("property names") {
  CHECK(all_properties().size() == kPropertyCount);
  for (Property p : all_properties()) CHECK(property_from_name(property_name(p)) == p);
  CHECK_FALSE(property_from_name("Confluence"));
  std::string t = report_table({PropertyReport{"X", 3, {}}});
  CHECK(t.find("pass") != std::string::npos);
}
