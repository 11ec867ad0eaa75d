#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idrt/judgement.hpp"
#include "idrt/tos.hpp"

// Proof checking for explicit derivation trees, and a derivation generator
// driven by the typed operational semantics.

namespace idrt {

enum class SystemVariant { Full, Minus };

std::string_view variant_name(SystemVariant v);
std::optional<SystemVariant> variant_from_name(std::string_view s);

struct DeclDiagnostic {
  std::vector<std::size_t> path;  // premise indices from the root
  std::string rule;
  std::string slot;     // the schema position that failed
  std::string message;

  std::string to_text() const;
};

using DeclRuleCounts = std::array<std::uint64_t, kDeclRuleCount>;

struct DeclCheckResult {
  bool ok = false;
  std::optional<DeclDiagnostic> diagnostic;
  std::size_t nodes_checked = 0;
  DeclRuleCounts rule_counts{};
};

// Checks every node; shared subtrees are checked once.
DeclCheckResult check_derivation(const DeclDerivation& d, SystemVariant v);

// Checks the rule instance at the root against the conclusions of its
// premises, without descending. Returns the failure, if any.
std::optional<DeclDiagnostic> check_node(const DeclDerivation& d, SystemVariant v);

struct DeriveOptions {
  SystemVariant variant = SystemVariant::Minus;
  std::size_t depth = 20;
  // Context-validity subtrees are shared by every axiom; when false they do
  // not count towards the depth bound.
  bool count_context_depth = false;
  std::size_t fuel = 1'000'000;
};

struct DeriveResult {
  DerivPtr deriv;       // null when nothing was found
  std::string reason;   // why, when deriv is null
  std::size_t height = 0;
};

// Builds a derivation of j by translating the TOS evaluation of its subjects.
// Absence is not evidence of underivability.
DeriveResult derive_auto(const Judgement& j, const DeriveOptions& opts = {});

// Reuses context derivations and their validation across calls; results
// are the same as derive_auto.
class DeriveSession {
 public:
  explicit DeriveSession(DeriveOptions opts = {});
  ~DeriveSession();
  DeriveSession(const DeriveSession&) = delete;
  DeriveSession& operator=(const DeriveSession&) = delete;

  DeriveResult derive(const Judgement& j);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Height that ignores context-validity premises.
std::size_t derivation_height_sans_context(const DeclDerivation& d);

}  // namespace idrt
