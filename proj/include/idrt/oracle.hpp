#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idrt/declarative.hpp"
#include "idrt/frontend.hpp"
#include "idrt/syntax.hpp"
#include "idrt/tos.hpp"

// Bounded enumeration and the executable property suites.

namespace idrt {

struct EnumConfig {
  std::size_t max_term_size = 8;
  std::size_t max_context_len = 4;
  LabelSet base_labels{Label("k"), Label("l"), Label("m")};
  std::size_t base_types = 2;
  std::uint64_t seed = 0;
  // Seeded random well-typed terms beyond max_term_size.
  std::size_t random_samples = 200;
  std::size_t random_max_size = 14;
  std::size_t graph_fuel = 5000;
  std::size_t eval_fuel = 200000;

  void validate() const;  // throws std::invalid_argument
};

// The base contexts: opaque types, constants, type families and record-typed
// variables, each of length at most cfg.max_context_len.
std::vector<Context> base_contexts(const EnumConfig& cfg);

// Every raw term of size <= cfg.max_term_size over g, including ill-typed
// ones, in a fixed order. The callback returns false to stop early.
void enumerate_raw(const EnumConfig& cfg, const Context& g, std::size_t max_size,
                   const std::function<bool(const Term&)>& yield);

// Whether enumerate_raw(cfg, g, size(t)) produces t (the raw grammar closure).
bool raw_enumerable(const EnumConfig& cfg, const Context& g, const Term& t);

struct CorpusItem {
  Context ctx;
  Term term;
  Demand demand = Demand::Value;
  EvalResult result;
};

// Accepted terms, built bottom-up from accepted subterms; the random
// supplement is appended when cfg.random_samples > 0.
struct Corpus {
  std::vector<CorpusItem> items;
  std::size_t enumerated = 0;  // from exhaustive enumeration
  std::size_t sampled = 0;     // from the random supplement
  RuleCounts tos_counts{};
};

Corpus build_corpus(const EnumConfig& cfg);
// Accepted terms of exactly the given size in one context (no sampling).
std::vector<CorpusItem> typed_terms(const EnumConfig& cfg, const Context& g, std::size_t size);

enum class Property {
  Determinacy,
  AdequacyReduction,
  AdequacyForms,
  PSR,
  SubjectReduction,
  ChurchRosser,
  StrongNormalization,
  SoundnessBridge,
  CompletenessBridge,
  Weakening,
  Strengthening,
  ContextValidity,
};

inline constexpr std::size_t kPropertyCount = 12;

std::string_view property_name(Property p);
std::optional<Property> property_from_name(std::string_view s);
std::vector<Property> all_properties();

struct PropertyFailure {
  std::string input;
  std::string expected;
  std::string got;
};

struct PropertyReport {
  std::string property;
  std::size_t instances_checked = 0;
  std::vector<PropertyFailure> failures;

  bool passed() const { return failures.empty(); }
};

std::string report_table(const std::vector<PropertyReport>& rs);

// Shared state for several property runs over one corpus.
class Oracle {
 public:
  explicit Oracle(EnumConfig cfg);

  const EnumConfig& config() const { return cfg_; }
  const Corpus& corpus();

  PropertyReport run(Property p);
  // Weakening, Strengthening (with its negative control) and ContextValidity.
  std::vector<PropertyReport> structural_suite();

  struct Coverage {
    RuleCounts tos{};
    DeclRuleCounts decl{};
    std::vector<std::string> missing;
  };
  // Rules exercised by evaluation of the corpus and by checking the bridge
  // derivations (derive_auto output plus substitution-rule instances).
  Coverage coverage();

 private:
  EnumConfig cfg_;
  std::optional<Corpus> corpus_;
  DeclRuleCounts decl_counts_{};
  std::vector<std::optional<PropertyReport>> reports_;

  void graph_pass();
  void run_bridges();
  void structural_pass();
};

PropertyReport run_property(Property p, const EnumConfig& cfg);
std::vector<PropertyReport> structural_suite(const EnumConfig& cfg);

// Agreement between the declarative checker and the algorithmic checker on
// derivation scripts: each `derive` entry must pass check_derivation and its
// conclusion must be accepted by the checker; each `refute` entry must fail
// check_derivation. Reported as SoundnessBridge.
struct NamedScript {
  std::string name;
  Script script;
};
PropertyReport script_agreement(const std::vector<NamedScript>& scripts, SystemVariant v);

}  // namespace idrt
