#include <doctest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>

#include "idrt/checker.hpp"
#include "idrt/declarative.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"

using namespace idrt;
namespace fs = std::filesystem;

namespace {

Judgement J(const char* s) { return parse_judgement(s); }

DerivPtr axiom() { return make_deriv(DeclRule::CTX_EMPTY, Judgement::ctx_valid({})); }

std::vector<NamedScript> load_scripts(bool subst) {
  std::vector<NamedScript> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(fs::path(IDRT_SOURCE_DIR) / "tests" / "derivations")) {
    if (e.path().extension() == ".drv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    bool is_subst = p.filename().string().rfind("subst", 0) == 0;
    if (is_subst != subst) continue;
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.push_back({p.filename().string(), parse_script(ss.str())});
  }
  return out;
}

void collect(const DeclDerivation& d, std::set<DeclRule>& out) {
  out.insert(d.rule);
  for (const auto& p : d.premises) collect(*p, out);
}

}  // namespace

TEST_CASE("the empty context axiom") {
  auto r = check_derivation(*axiom(), SystemVariant::Minus);
  CHECK(r.ok);
  CHECK(r.nodes_checked == 1);
  CHECK(r.rule_counts[static_cast<std::size_t>(DeclRule::CTX_EMPTY)] == 1);
}

TEST_CASE("empty record type from the empty context") {
  auto d = make_deriv(DeclRule::FORM_EMPTY, J("() |- <> : RType[]"), {axiom()});
  CHECK(check_derivation(*d, SystemVariant::Minus).ok);
  CHECK(check_derivation(*d, SystemVariant::Full).ok);
  CHECK(derivation_height(*d) == 2);
  CHECK(derivation_nodes(*d) == 2);

  auto wrong = make_deriv(DeclRule::FORM_EMPTY, J("() |- <> : RType[k]"), {axiom()});
  auto r = check_derivation(*wrong, SystemVariant::Full);
  CHECK_FALSE(r.ok);
  REQUIRE(r.diagnostic);
  CHECK(r.diagnostic->rule == "FORM_EMPTY");
  CHECK(r.diagnostic->path.empty());
}

TEST_CASE("substitution is excluded from the minus variant") {
  auto ctx = make_deriv(DeclRule::CTX_EXT, J("T:Type valid"),
                        {make_deriv(DeclRule::TYPE_KIND, J("() |- Type kind"), {axiom()})});
  auto tk = make_deriv(DeclRule::TYPE_KIND, J("T:Type |- Type kind"), {ctx});
  auto var = make_deriv(DeclRule::VAR, J("T:Type |- T : Type"), {ctx});
  auto ctx2 = make_deriv(DeclRule::CTX_EXT, J("T:Type, x:Type valid"), {tk});
  auto body = make_deriv(DeclRule::VAR, J("T:Type, x:Type |- x : Type"), {ctx2});
  auto sub = make_deriv(DeclRule::SUBST_TERM, J("T:Type |- T : Type"), {body, var});

  CHECK(check_derivation(*sub, SystemVariant::Full).ok);
  auto r = check_derivation(*sub, SystemVariant::Minus);
  CHECK_FALSE(r.ok);
  REQUIRE(r.diagnostic);
  CHECK(r.diagnostic->message.find("rule excluded in IDRT⁻") != std::string::npos);
  CHECK(check_node(*sub, SystemVariant::Minus).has_value());
  CHECK_FALSE(check_node(*sub, SystemVariant::Full).has_value());
}

TEST_CASE("diagnostics locate the failing premise") {
  auto bad_leaf = make_deriv(DeclRule::CTX_EXT, J("T:Type valid"),
                             {make_deriv(DeclRule::TYPE_KIND, J("() |- RType kind"), {axiom()})});
  auto top = make_deriv(DeclRule::FORM_EMPTY, J("T:Type |- <> : RType[]"), {bad_leaf});
  auto r = check_derivation(*top, SystemVariant::Full);
  CHECK_FALSE(r.ok);
  REQUIRE(r.diagnostic);
  CHECK(r.diagnostic->path.size() >= 1);
  CHECK(r.diagnostic->path[0] == 0);
  CHECK_FALSE(r.diagnostic->to_text().empty());
}

TEST_CASE("derive_auto") {
  auto a = derive_auto(J("() valid"));
  REQUIRE(a.deriv);
  CHECK(a.deriv->rule == DeclRule::CTX_EMPTY);

  for (const char* s : {"T:Type, c:El(T) |- ([x:El(T)]x)(c) : El(T)",
                        "T:Type |- <k : T> : RType[k, l]",
                        "T:Type, r:El(<k : T, l : T>) |- r.k = [r].k : El(T)",
                        "T:Type, F:(El(T))Type |- [x:El(T)]F(x) = F : (El(T))Type",
                        "() |- <> = <> : RType[]"}) {
    auto r = derive_auto(J(s));
    REQUIRE_MESSAGE(r.deriv, s << ": " << r.reason);
    CHECK(alpha_eq(r.deriv->conclusion, J(s)));
    CHECK(check_derivation(*r.deriv, SystemVariant::Minus).ok);
    CHECK(r.height <= 20);
    CHECK(r.height == derivation_height_sans_context(*r.deriv));
  }

  auto dup = derive_auto(J("A:Type |- <<<>, l : [_:El(<>)]A>, l : [_:El(<l : A>)]A> : RType[l]"));
  CHECK_FALSE(dup.deriv);
  CHECK_FALSE(dup.reason.empty());
  CHECK_FALSE(Checker().check_judgement(J("A:Type |- <<<>, l : [_:El(<>)]A>, l : [_:El(<l : A>)]A> : RType[l]"))
                  .accepted());

  DeriveOptions shallow;
  shallow.depth = 1;
  CHECK_FALSE(derive_auto(J("T:Type, c:El(T) |- ([x:El(T)]x)(c) : El(T)"), shallow).deriv);
}

TEST_CASE("sessions agree with single calls") {
  DeriveSession s;
  for (const char* j : {"T:Type, c:El(T) |- c : El(T)", "T:Type, c:El(T) |- ([x:El(T)]x)(c) = c : El(T)"}) {
    auto a = s.derive(J(j));
    auto b = derive_auto(J(j));
    REQUIRE(a.deriv);
    REQUIRE(b.deriv);
    CHECK(print_derivation(*a.deriv) == print_derivation(*b.deriv));
  }
}

TEST_CASE("the derivation suite") {
  auto both = load_scripts(false);
  auto subst = load_scripts(true);
  REQUIRE(!both.empty());
  REQUIRE(!subst.empty());

  std::size_t positives = 0;
  std::set<DeclRule> used;
  for (auto* group : {&both, &subst}) {
    for (const auto& ns : *group) {
      for (const auto& e : ns.script.entries) {
        if (e.expect == Expectation::Valid) {
          ++positives;
          collect(*e.deriv, used);
        }
      }
    }
  }
  CHECK(positives >= 40);
  for (DeclRule r : all_decl_rules()) CHECK_MESSAGE(used.count(r), rule_name(r));

  for (auto v : {SystemVariant::Minus, SystemVariant::Full}) {
    PropertyReport rep = script_agreement(both, v);
    CHECK_MESSAGE(rep.passed(), report_table({rep}));
    CHECK(rep.instances_checked > 0);
  }
  PropertyReport full = script_agreement(subst, SystemVariant::Full);
  CHECK_MESSAGE(full.passed(), report_table({full}));

  // Every substitution entry is rejected once the rules are taken away.
  for (const auto& ns : subst) {
    for (const auto& e : ns.script.entries) {
      auto r = check_derivation(*e.deriv, SystemVariant::Minus);
      CHECK_FALSE(r.ok);
    }
  }
}

TEST_CASE("rule metadata") {
  CHECK(all_decl_rules().size() == kDeclRuleCount);
  for (DeclRule r : all_decl_rules()) CHECK(rule_from_name(rule_name(r)) == r);
  CHECK(rule_arity(DeclRule::CTX_EMPTY) == 0);
  CHECK(rule_arity(DeclRule::RCD_EQ_EXT) == 4);
  CHECK(is_substitution_rule(DeclRule::SUBST_TERMEQ));
  CHECK_FALSE(is_substitution_rule(DeclRule::BETA));
  CHECK(is_record_rule(DeclRule::FORM_EXT));
  CHECK_FALSE(is_record_rule(DeclRule::LAM));
  CHECK(variant_from_name(variant_name(SystemVariant::Minus)) == SystemVariant::Minus);
}

TEST_CASE("every rule tells a perturbed premise from the real one") {
  // Each premise conclusion in turn gets an extra fresh declaration at the
  // end of its context; the root instance must then fail.
  std::set<DeclRule> seen;
  std::size_t checked = 0;
  std::function<void(const DerivPtr&)> visit = [&](const DerivPtr& d) {
    for (const auto& p : d->premises) visit(p);
    if (d->premises.empty() || !seen.insert(d->rule).second) return;
    for (std::size_t i = 0; i < d->premises.size(); ++i) {
      auto ps = d->premises;
      Judgement j = ps[i]->conclusion;
      j.ctx = j.ctx.extended("Zfresh", type_kind());
      ps[i] = make_deriv(ps[i]->rule, j, ps[i]->premises);
      auto bent = make_deriv(d->rule, d->conclusion, ps);
      ++checked;
      CHECK_MESSAGE(check_node(*bent, SystemVariant::Full).has_value(), rule_name(d->rule) << " premise " << i);
    }
    CHECK_FALSE(check_node(*d, SystemVariant::Full).has_value());
  };
  for (bool subst : {false, true}) {
    for (const auto& ns : load_scripts(subst)) {
      for (const auto& e : ns.script.entries) {
        if (e.expect == Expectation::Valid) visit(e.deriv);
      }
    }
  }
  CHECK(seen.size() + 1 == kDeclRuleCount);  // CTX_EMPTY has no premise
  CHECK(checked > 50);
}

TEST_CASE("the minus variant is included in the full one") {
  for (const auto& ns : load_scripts(false)) {
    for (const auto& e : ns.script.entries) {
      if (check_derivation(*e.deriv, SystemVariant::Minus).ok) {
        CHECK(check_derivation(*e.deriv, SystemVariant::Full).ok);
      }
    }
  }
}
