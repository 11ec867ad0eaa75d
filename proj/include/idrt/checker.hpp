#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idrt/frontend.hpp"
#include "idrt/judgement.hpp"
#include "idrt/syntax.hpp"
#include "idrt/tos.hpp"

// Algorithmic checking on top of the TOS engine. Verdicts are data: none of
// the entry points throw on ill-typed input.

namespace idrt {

enum class Verdict { Accepted, Rejected };

struct CheckFailure {
  std::vector<std::string> path;  // subjects under evaluation, outermost first
  std::string reason;
  std::string rule;               // the rule that could not be applied
};

struct CheckReport {
  Verdict verdict = Verdict::Rejected;
  std::optional<Kind> kind;     // inferred kind, normal
  std::optional<Term> whnf;
  std::optional<Term> nf;
  std::optional<Context> context;  // normal context
  std::optional<CheckFailure> failure;
  std::optional<TosTrace> trace;

  bool accepted() const { return verdict == Verdict::Accepted; }
  std::string to_text() const;
};

// Kind inclusion on normal kinds: RType[L] <= RType[L'] for L a subset of L',
// RType[L] <= RType <= Type, and alpha-equality otherwise.
bool subkind(const Kind& sub, const Kind& sup);

class Checker {
 public:
  explicit Checker(EngineOptions opts = {});

  CheckReport check_context(const Context& g);
  CheckReport check_kind(const Context& g, const Kind& k);
  // Demand defaults to a value; `<>` alone is then the empty record.
  CheckReport infer(const Context& g, const Term& m, Demand d = Demand::Value);
  // Omitted pair-record families in m are filled from k.
  CheckReport check(const Context& g, const Term& m, const Kind& k);
  CheckReport equal(const Context& g, const Term& m, const Term& n, const Kind& k);
  CheckReport kind_equal(const Context& g, const Kind& a, const Kind& b);
  CheckReport check_judgement(const Judgement& j);

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
};

struct DirectiveResult {
  Directive directive;
  Context ctx;  // the context the directive was checked in
  CheckReport report;
};

struct FileResult {
  std::vector<DirectiveResult> results;
  bool ok() const;
};

// Runs the directives in order. A declaration extends the context only when
// the extended context is valid; later directives still run after a failure.
FileResult check_file(const SourceFile& f, EngineOptions opts = {});

}  // namespace idrt
