#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xguard/pattern.hpp"
#include "xguard/tree.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

struct AnalysisBudget {
  // W: extensions are explored up to W+1 per descendant edge. The effective
  // bound is never below the longest wildcard chain of the right-hand sides.
  std::optional<std::size_t> star_bound;
  // Largest canonical instance (in nodes) the procedures may build; 0 = no cap.
  std::size_t size_bound = 0;
  // Cap on the number of extensions explored by one containment check.
  std::uint64_t max_expansions = 1'000'000;
  unsigned threads = 1;
};

// First of z, z1, z2, ... not in `used`.
std::string fresh_label(const std::set<std::string>& used);

struct ContainmentResult {
  bool contained = false;
  std::optional<MarkedTree> counterexample;  // canonical instance of the left side
  std::uint64_t instances_explored = 0;
  std::size_t star_bound = 0;  // W used
};

ContainmentResult check_containment(const PathExpr& p, const PathExpr& q, const AnalysisBudget& budget = {});
bool contains(const PathExpr& p, const PathExpr& q, const AnalysisBudget& budget = {});

struct ContainmentProblem {
  PathExpr left;
  std::vector<PathExpr> rights;
};

enum class UnionStrategy { Decomposition, Expansion };

struct UnionContainmentResult {
  bool contained = false;
  UnionStrategy strategy = UnionStrategy::Decomposition;
  std::optional<MarkedTree> counterexample;
  std::uint64_t instances_explored = 0;
  std::size_t star_bound = 0;
  std::string fresh;  // label substituted for wildcards
};

UnionContainmentResult check_union_containment(const ContainmentProblem& prob, const AnalysisBudget& budget = {});
bool contains_union(const ContainmentProblem& prob, const AnalysisBudget& budget = {});

// Pattern-level form. `avoid` lists extra labels the fresh label must avoid.
UnionContainmentResult check_union_containment(const TreePattern& left, const std::vector<TreePattern>& rights,
                                               const AnalysisBudget& budget = {},
                                               const std::set<std::string>& avoid = {});

// A marked tree selected by both paths, or none when they are disjoint.
std::optional<MarkedTree> overlaps(const PathExpr& p, const PathExpr& q, const AnalysisBudget& budget = {});
std::optional<MarkedTree> overlaps(const TreePattern& p, const TreePattern& q);

// Exact intersection for descendant-free paths.
std::optional<PathExpr> intersect_paths(const PathExpr& p, const PathExpr& q);

}  // namespace xguard
