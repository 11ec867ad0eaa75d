#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "idrt/syntax.hpp"

// Typed operational semantics: a syntax-directed evaluator for the judgements
//   |= G -> D            (context normalisation)
//   G |= K -> B          (kind normalisation)
//   G |= M -> N -> P : A (weak-head normal form, normal form and kind)

namespace idrt {

enum class TosRule : std::uint8_t {
  EMP,
  WEAK,
  TYPE,
  EL,
  PI,
  VAR,
  LAM,
  ETA,
  BASE,
  BETA,
  RTYPE,
  RTYPE_L,
  EMP_RCDT,
  RCDT,
  EMP_RCD,
  RCD,
  BASE_RESTR,
  RESTR,
  BASE_FLDSEL,
  FLDSEL,
  FLDSL_PRIME,
};

inline constexpr std::size_t kTosRuleCount = static_cast<std::size_t>(TosRule::FLDSL_PRIME) + 1;

// Printed names: RTYPE_L is "RTYPE[L]" and FLDSL_PRIME is "FLDSL'".
std::string_view tos_rule_name(TosRule r);
std::optional<TosRule> tos_rule_from_name(std::string_view s);

// What the surrounding derivation needs: the overloaded <> is the empty record
// type where a record type is demanded and the empty record otherwise.
enum class Demand { Value, RecordType };

// Demand implied by a classifier: terms classified by Type or a record kind
// are types, terms classified by El(..) are values.
Demand demand_of(const Kind& k);

struct EvalResult {
  Term whnf;
  Term nf;
  Kind kind;
};

enum class TraceForm { Context, Kind, Term };

struct TosTrace {
  TosRule rule = TosRule::EMP;
  TraceForm form = TraceForm::Term;
  Context ctx;
  Term subject;
  Kind subject_kind;
  Context ctx_nf;  // Context form
  Kind kind_nf;    // Kind form: result; Term form: the kind
  Term whnf, nf;
  std::vector<TosTrace> premises;

  std::string conclusion() const;
  std::string to_text() const;
};

class NotDerivable : public std::runtime_error {
 public:
  NotDerivable(std::string subject, std::string reason, std::vector<std::string> path);
  const std::string& subject() const { return subject_; }
  const std::string& reason() const { return reason_; }
  // Subjects under evaluation, outermost first.
  const std::vector<std::string>& path() const { return path_; }
  const std::string& rule() const { return rule_; }
  void set_rule(std::string r) { rule_ = std::move(r); }

 private:
  std::string subject_;
  std::string reason_;
  std::vector<std::string> path_;
  std::string rule_;
};

class FuelExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineOptions {
  std::size_t fuel = 1'000'000;
  bool trace = false;
  bool memo = false;
};

using RuleCounts = std::array<std::uint64_t, kTosRuleCount>;

std::size_t default_fuel();  // honours IDRT_FUEL

class Engine {
 public:
  explicit Engine(EngineOptions opts = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Each call throws NotDerivable or FuelExhausted on failure. Fuel is per call.
  Context eval_context(const Context& g);
  Kind eval_kind(const Context& g, const Kind& k);
  EvalResult eval_term(const Context& g, const Term& m, Demand d = Demand::Value);

  // Trace of the most recent successful call when tracing is on.
  const std::optional<TosTrace>& last_trace() const;

  const RuleCounts& counts() const;
  void reset_counts();
  const EngineOptions& options() const;
  void set_trace(bool on);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace idrt
