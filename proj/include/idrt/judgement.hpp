#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idrt/syntax.hpp"

// Declarative judgements and derivation trees.

namespace idrt {

enum class JudgementForm { CtxValid, KindWf, KindEq, HasKind, TermEq };

struct Judgement {
  JudgementForm form = JudgementForm::CtxValid;
  Context ctx;
  Kind k1, k2;  // KindWf: k1. KindEq: k1 = k2. HasKind/TermEq: k1 is the classifier.
  Term t1, t2;  // HasKind: t1. TermEq: t1 = t2.

  static Judgement ctx_valid(Context g);
  static Judgement kind_wf(Context g, Kind k);
  static Judgement kind_eq(Context g, Kind a, Kind b);
  static Judgement has_kind(Context g, Term t, Kind k);
  static Judgement term_eq(Context g, Term a, Term b, Kind k);
};

bool alpha_eq(const Judgement& a, const Judgement& b);

enum class DeclRule {
  // Contexts and assumptions
  CTX_EMPTY,
  CTX_EXT,
  VAR,
  // General equality
  KEQ_REFL,
  KEQ_SYM,
  KEQ_TRANS,
  EQ_REFL,
  EQ_SYM,
  EQ_TRANS,
  // Equality typing
  CONV,
  CONV_EQ,
  // Substitution
  SUBST_CTX,
  SUBST_KIND,
  SUBST_KIND_EQARG,
  SUBST_TERM,
  SUBST_TERM_EQARG,
  SUBST_KINDEQ,
  SUBST_TERMEQ,
  // The kind Type
  TYPE_KIND,
  EL_KIND,
  EL_EQ,
  // Dependent product kinds
  PI_KIND,
  PI_EQ,
  LAM,
  LAM_EQ,
  APP,
  APP_EQ,
  BETA,
  ETA,
  // Record kinds
  RTYPE_KIND,
  RTYPEL_KIND,
  RTYPE_SUB,
  RTYPE_FORGET,
  RTYPE_TYPE,
  // Record types and records
  FORM_EMPTY,
  FORM_EXT,
  INTRO_EMPTY,
  INTRO_EXT,
  ELIM_RESTR,
  ELIM_SEL,
  ELIM_SEL2,
  COMP_RESTR,
  COMP_SEL,
  COMP_SEL2,
  RCDT_EQ_EMPTY,
  RCDT_EQ_EXT,
  RCD_EQ_EMPTY,
  RCD_EQ_EXT,
  RESTR_EQ,
  SEL_EQ,
};

inline constexpr std::size_t kDeclRuleCount = static_cast<std::size_t>(DeclRule::SEL_EQ) + 1;

std::string_view rule_name(DeclRule r);
std::optional<DeclRule> rule_from_name(std::string_view name);
std::size_t rule_arity(DeclRule r);
bool is_substitution_rule(DeclRule r);
// Rules introduced for record kinds, record types and records.
bool is_record_rule(DeclRule r);
std::vector<DeclRule> all_decl_rules();

struct DeclDerivation;
using DerivPtr = std::shared_ptr<const DeclDerivation>;

struct DeclDerivation {
  DeclRule rule{};
  Judgement conclusion;
  std::vector<DerivPtr> premises;
  // Optional free-form witness for side conditions; informative only.
  std::string side;
};

DerivPtr make_deriv(DeclRule rule, Judgement conclusion, std::vector<DerivPtr> premises = {},
                    std::string side = {});

std::size_t derivation_height(const DeclDerivation& d);
std::size_t derivation_nodes(const DeclDerivation& d);

}  // namespace idrt
