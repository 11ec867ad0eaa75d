#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "idrt/syntax.hpp"

// Untyped reduction: beta, eta, the two projections and the skip rule, closed
// under every immediate subterm position (including kind annotations and
// field families).

namespace idrt {

enum class StepKind { Beta, Eta, Pi1, Pi2, Pi2Prime };

std::string_view step_name(StepKind k);
std::optional<StepKind> step_from_name(std::string_view s);
// Beta and the three record rules.
bool is_beta_r(StepKind k);

struct Step {
  StepKind kind;
  Term result;
};

std::optional<Step> root_redex(const Term& t);
// All one-step reducts, without duplicates (up to alpha and step kind).
std::vector<Step> one_step(const Term& t);
std::vector<std::pair<StepKind, Kind>> one_step(const Kind& k);

enum class Strategy { LeftmostOutermost, RightmostInnermost };

struct NormalizeResult {
  Term term;
  bool exhausted = false;
  std::size_t steps = 0;
};

// Contracts one redex chosen by the strategy; absent when t is normal.
std::optional<Step> strategy_step(const Term& t, Strategy s);
NormalizeResult normalize_untyped(const Term& t, std::size_t fuel,
                                  Strategy s = Strategy::LeftmostOutermost);

bool is_whnf(const Term& t);
bool is_normal(const Term& t);
bool is_normal(const Kind& k);
// Root eta-redex test: [x:K]f(x) with x not free in f.
bool is_eta_redex(const Term& t);

std::vector<Term> parallel_reducts(const Term& t);
std::vector<Kind> parallel_reducts(const Kind& k);

struct GraphEdge {
  std::size_t src;
  StepKind kind;
  std::size_t dst;
};

struct ReductionGraph {
  std::vector<Term> nodes;  // nodes[0] is the root
  std::vector<GraphEdge> edges;
  bool truncated = false;

  std::size_t root() const { return 0; }
  std::optional<std::size_t> find(const Term& t) const;
  // Successor lists, edges deduplicated by target.
  std::vector<std::vector<std::size_t>> successors() const;
  bool acyclic() const;
  // Nodes reachable from `from` (including itself) using only edges whose kind
  // satisfies the filter.
  std::vector<bool> reachable(std::size_t from, bool (*filter)(StepKind) = nullptr) const;
  // Every pair of nodes has a common reduct.
  bool joinable() const;
  // Nodes without successors.
  std::vector<std::size_t> normal_nodes() const;

  std::string to_text() const;

 private:
  mutable std::unordered_map<Term, std::size_t, TermHash, TermAlphaEq> index_;
  friend ReductionGraph reduction_graph(const Term& t, std::size_t node_fuel);
};

ReductionGraph reduction_graph(const Term& t, std::size_t node_fuel);

}  // namespace idrt
