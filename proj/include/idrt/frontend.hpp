#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idrt/judgement.hpp"
#include "idrt/syntax.hpp"

// Concrete syntax: printing, parsing, record sugar and derivation scripts.
//
//   kind  := "Type" | "RType" ["[" [label {"," label}] "]"] | "El" "(" term ")"
//          | "(" IDENT ":" kind ")" kind | "(" kind ")" kind | term
//   term  := atom { "(" term ")" | "." label }
//   atom  := IDENT | "[" IDENT ":" kind "]" term | "[" term "]" | "(" term ")"
//          | "<" ">" | "<" term "," label ":" term ">"
//          | "<" term "," label "=" term [":" term] ">"
//          | "<" label ":" term {"," label ":" term} ">"     record type sugar
//          | "<" label "=" term {"," label "=" term} ">"     record sugar
//
// A bare term in kind position means El(term). "_" binds nothing. "--" starts
// a comment. The Unicode brackets U+27E8/U+27E9 are accepted for < and >.

namespace idrt {

struct SourcePos {
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t offset = 0;
};

struct Span {
  SourcePos begin;
  SourcePos end;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourcePos pos);
  const SourcePos& pos() const { return pos_; }
  const std::string& detail() const { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
};

std::string print_term(const Term& t);
std::string print_kind(const Kind& k);
std::string print_context(const Context& g);
std::string print_judgement(const Judgement& j);
// Printing relative to a context avoids binder names that clash with it.
std::string print_term(const Term& t, const NameSet& avoid);
std::string print_kind(const Kind& k, const NameSet& avoid);

Term parse_term(std::string_view text);
Kind parse_kind(std::string_view text);
Context parse_context(std::string_view text);
Judgement parse_judgement(std::string_view text);

// Each field type may mention earlier labels as free variables.
Term desugar_record_type(const std::vector<std::pair<Label, Term>>& fields);

// Fill omitted pair-record families from the expected kind, which must be in
// normal form (El of a record type). Throws std::invalid_argument on mismatch.
Term fill_families(const Term& t, const Kind& expected_nf);

enum class DirectiveKind { Declare, Check, Eq, Normalize };

struct Directive {
  DirectiveKind what = DirectiveKind::Declare;
  Name name;        // Declare
  Kind classifier;  // Declare, Check, Eq
  Term lhs;         // Check, Eq, Normalize
  Term rhs;         // Eq
  Span span;
};

struct SourceFile {
  std::vector<Directive> directives;
};

SourceFile parse_file(std::string_view text);

enum class Expectation { Valid, Invalid };

struct ScriptEntry {
  Expectation expect = Expectation::Valid;
  DerivPtr deriv;
  Span span;
};

// Derivation scripts:
//   script := { "def" IDENT "=" deriv ";" | "derive" deriv ";" | "refute" deriv ";" }
//   deriv  := "(" RULE "{" judgement "}" { deriv } ")" | "@" IDENT
//   judgement := ctx "valid" | ctx "|-" kind "kind" | ctx "|-" kind "=" kind
//              | ctx "|-" term ":" kind | ctx "|-" term "=" term ":" kind
//   ctx := "()" | [IDENT ":" kind {"," IDENT ":" kind}]
struct Script {
  std::map<std::string, DerivPtr> defs;
  std::vector<ScriptEntry> entries;
};

Script parse_script(std::string_view text);
std::string print_derivation(const DeclDerivation& d);
// A complete script (`def` for shared subtrees, then one `derive`).
std::string print_derivation_script(const DeclDerivation& d);

}  // namespace idrt
