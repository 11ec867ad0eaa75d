#include "idrt/judgement.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace idrt {

Judgement Judgement::ctx_valid(Context g) {
  Judgement j;
  j.form = JudgementForm::CtxValid;
  j.ctx = std::move(g);
  return j;
}

Judgement Judgement::kind_wf(Context g, Kind k) {
  Judgement j;
  j.form = JudgementForm::KindWf;
  j.ctx = std::move(g);
  j.k1 = std::move(k);
  return j;
}

Judgement Judgement::kind_eq(Context g, Kind a, Kind b) {
  Judgement j;
  j.form = JudgementForm::KindEq;
  j.ctx = std::move(g);
  j.k1 = std::move(a);
  j.k2 = std::move(b);
  return j;
}

Judgement Judgement::has_kind(Context g, Term t, Kind k) {
  Judgement j;
  j.form = JudgementForm::HasKind;
  j.ctx = std::move(g);
  j.t1 = std::move(t);
  j.k1 = std::move(k);
  return j;
}

Judgement Judgement::term_eq(Context g, Term a, Term b, Kind k) {
  Judgement j;
  j.form = JudgementForm::TermEq;
  j.ctx = std::move(g);
  j.t1 = std::move(a);
  j.t2 = std::move(b);
  j.k1 = std::move(k);
  return j;
}

bool alpha_eq(const Judgement& a, const Judgement& b) {
  if (a.form != b.form || !alpha_eq(a.ctx, b.ctx)) return false;
  switch (a.form) {
    case JudgementForm::CtxValid:
      return true;
    case JudgementForm::KindWf:
      return alpha_eq(a.k1, b.k1);
    case JudgementForm::KindEq:
      return alpha_eq(a.k1, b.k1) && alpha_eq(a.k2, b.k2);
    case JudgementForm::HasKind:
      return alpha_eq(a.t1, b.t1) && alpha_eq(a.k1, b.k1);
    case JudgementForm::TermEq:
      return alpha_eq(a.t1, b.t1) && alpha_eq(a.t2, b.t2) && alpha_eq(a.k1, b.k1);
  }
  return false;
}

namespace {

struct RuleInfo {
  DeclRule rule;
  std::string_view name;
  std::size_t arity;
};

constexpr std::array<RuleInfo, kDeclRuleCount> kRules{{
    {DeclRule::CTX_EMPTY, "CTX_EMPTY", 0},
    {DeclRule::CTX_EXT, "CTX_EXT", 1},
    {DeclRule::VAR, "VAR", 1},
    {DeclRule::KEQ_REFL, "KEQ_REFL", 1},
    {DeclRule::KEQ_SYM, "KEQ_SYM", 1},
    {DeclRule::KEQ_TRANS, "KEQ_TRANS", 2},
    {DeclRule::EQ_REFL, "EQ_REFL", 1},
    {DeclRule::EQ_SYM, "EQ_SYM", 1},
    {DeclRule::EQ_TRANS, "EQ_TRANS", 2},
    {DeclRule::CONV, "CONV", 2},
    {DeclRule::CONV_EQ, "CONV_EQ", 2},
    {DeclRule::SUBST_CTX, "SUBST_CTX", 2},
    {DeclRule::SUBST_KIND, "SUBST_KIND", 2},
    {DeclRule::SUBST_KIND_EQARG, "SUBST_KIND_EQARG", 2},
    {DeclRule::SUBST_TERM, "SUBST_TERM", 2},
    {DeclRule::SUBST_TERM_EQARG, "SUBST_TERM_EQARG", 2},
    {DeclRule::SUBST_KINDEQ, "SUBST_KINDEQ", 2},
    {DeclRule::SUBST_TERMEQ, "SUBST_TERMEQ", 2},
    {DeclRule::TYPE_KIND, "TYPE_KIND", 1},
    {DeclRule::EL_KIND, "EL_KIND", 1},
    {DeclRule::EL_EQ, "EL_EQ", 1},
    {DeclRule::PI_KIND, "PI_KIND", 2},
    {DeclRule::PI_EQ, "PI_EQ", 2},
    {DeclRule::LAM, "LAM", 1},
    {DeclRule::LAM_EQ, "LAM_EQ", 2},
    {DeclRule::APP, "APP", 2},
    {DeclRule::APP_EQ, "APP_EQ", 2},
    {DeclRule::BETA, "BETA", 2},
    {DeclRule::ETA, "ETA", 1},
    {DeclRule::RTYPE_KIND, "RTYPE_KIND", 1},
    {DeclRule::RTYPEL_KIND, "RTYPEL_KIND", 1},
    {DeclRule::RTYPE_SUB, "RTYPE_SUB", 1},
    {DeclRule::RTYPE_FORGET, "RTYPE_FORGET", 1},
    {DeclRule::RTYPE_TYPE, "RTYPE_TYPE", 1},
    {DeclRule::FORM_EMPTY, "FORM_EMPTY", 1},
    {DeclRule::FORM_EXT, "FORM_EXT", 2},
    {DeclRule::INTRO_EMPTY, "INTRO_EMPTY", 1},
    {DeclRule::INTRO_EXT, "INTRO_EXT", 3},
    {DeclRule::ELIM_RESTR, "ELIM_RESTR", 1},
    {DeclRule::ELIM_SEL, "ELIM_SEL", 1},
    {DeclRule::ELIM_SEL2, "ELIM_SEL2", 2},
    {DeclRule::COMP_RESTR, "COMP_RESTR", 1},
    {DeclRule::COMP_SEL, "COMP_SEL", 1},
    {DeclRule::COMP_SEL2, "COMP_SEL2", 2},
    {DeclRule::RCDT_EQ_EMPTY, "RCDT_EQ_EMPTY", 1},
    {DeclRule::RCDT_EQ_EXT, "RCDT_EQ_EXT", 2},
    {DeclRule::RCD_EQ_EMPTY, "RCD_EQ_EMPTY", 1},
    {DeclRule::RCD_EQ_EXT, "RCD_EQ_EXT", 4},
    {DeclRule::RESTR_EQ, "RESTR_EQ", 1},
    {DeclRule::SEL_EQ, "SEL_EQ", 1},
}};

const RuleInfo& info(DeclRule r) { return kRules[static_cast<std::size_t>(r)]; }

}  // namespace

std::string_view rule_name(DeclRule r) { return info(r).name; }

std::optional<DeclRule> rule_from_name(std::string_view name) {
  for (const auto& ri : kRules) {
    if (ri.name == name) return ri.rule;
  }
  return std::nullopt;
}

std::size_t rule_arity(DeclRule r) { return info(r).arity; }

bool is_substitution_rule(DeclRule r) {
  return r >= DeclRule::SUBST_CTX && r <= DeclRule::SUBST_TERMEQ;
}

bool is_record_rule(DeclRule r) { return r >= DeclRule::RTYPE_KIND; }

std::vector<DeclRule> all_decl_rules() {
  std::vector<DeclRule> out;
  for (const auto& ri : kRules) out.push_back(ri.rule);
  return out;
}

DerivPtr make_deriv(DeclRule rule, Judgement conclusion, std::vector<DerivPtr> premises,
                    std::string side) {
  auto d = std::make_shared<DeclDerivation>();
  d->rule = rule;
  d->conclusion = std::move(conclusion);
  d->premises = std::move(premises);
  d->side = std::move(side);
  return d;
}

namespace {

template <class F>
std::size_t memo_fold(const DeclDerivation& d, std::unordered_map<const DeclDerivation*, std::size_t>& memo,
                      F combine) {
  if (auto it = memo.find(&d); it != memo.end()) return it->second;
  std::vector<std::size_t> kids;
  for (const auto& p : d.premises) kids.push_back(memo_fold(*p, memo, combine));
  std::size_t v = combine(kids);
  memo.emplace(&d, v);
  return v;
}

}  // namespace

std::size_t derivation_height(const DeclDerivation& d) {
  std::unordered_map<const DeclDerivation*, std::size_t> memo;
  return memo_fold(d, memo, [](const std::vector<std::size_t>& ks) {
    std::size_t m = 0;
    for (auto k : ks) m = std::max(m, k);
    return m + 1;
  });
}

std::size_t derivation_nodes(const DeclDerivation& d) {
  std::unordered_map<const DeclDerivation*, std::size_t> seen;
  std::vector<const DeclDerivation*> stack{&d};
  while (!stack.empty()) {
    const DeclDerivation* cur = stack.back();
    stack.pop_back();
    if (!seen.emplace(cur, 0).second) continue;
    for (const auto& p : cur->premises) stack.push_back(p.get());
  }
  return seen.size();
}

}  // namespace idrt
