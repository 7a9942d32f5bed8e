#pragma once

// Brute-force ground truth over all small trees.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xguard/forest.hpp"
#include "xguard/policy.hpp"
#include "xguard/tree.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

struct EnumSpec {
  std::set<std::string> alphabet;
  std::size_t max_nodes = 1;
  std::optional<std::size_t> max_depth;  // edges from the root
};

// Every canonical element tree within the bounds exactly once, ascending by
// node count. ContractError on an empty alphabet or max_nodes == 0.
std::vector<Tree> enumerate_trees(const EnumSpec& spec);
// Stops early when `visit` returns false.
void for_each_tree(const EnumSpec& spec, const std::function<bool(const Tree&)>& visit);
// Counted by generating functions, without building trees.
std::uint64_t count_trees(const EnumSpec& spec);

bool oracle_contains(const PathExpr& p, const PathExpr& p2, const EnumSpec& spec);
// First (t, n) in enumeration order with n selected by p and not by p2.
std::optional<MarkedTree> oracle_containment_counterexample(const PathExpr& p, const PathExpr& p2,
                                                            const EnumSpec& spec);
// Same, against a union of right-hand sides.
std::optional<MarkedTree> oracle_union_counterexample(const PathExpr& p, const std::vector<PathExpr>& rights,
                                                      const EnumSpec& spec);

struct ClosureWitness {
  OpKind kind = OpKind::Delete;
  std::optional<Label> payload;
  MarkedTree allowed_tree;  // update allowed here
  MarkedTree denied_tree;   // and denied on this image
  NodeMapping mapping;
};

struct ClosureResult {
  bool closed = true;
  std::optional<ClosureWitness> witness;
};

// Every marked homomorphism factors into merging two equally labelled
// siblings and adding a leaf, without leaving the size bound, so checking
// those single steps decides closure over all pairs within the spec. The
// step table is built once and shared across policies.
class HomClosureOracle {
 public:
  explicit HomClosureOracle(const EnumSpec& spec);

  ClosureResult check(const Policy& p) const;

  const std::vector<Tree>& trees() const noexcept { return trees_; }
  std::size_t step_count() const noexcept { return steps_.size(); }

 private:
  struct StepEdge {
    std::uint32_t from;
    std::uint32_t to;
    std::uint32_t map_offset;  // into maps_, one entry per node of `from`
  };

  EnumSpec spec_;
  std::vector<Tree> trees_;
  Forest forest_;
  std::vector<StepEdge> steps_;
  std::vector<NodeId> maps_;
};

ClosureResult oracle_hom_closed(const Policy& p, const EnumSpec& spec);

// Allowed atomic updates on t: deletes by target, inserts and updates by
// (target, payload root label) with labels from alphabet and text(). Sorted
// by kind, then target, then payload label.
std::vector<AtomicUpdate> oracle_allowed_set(const Policy& p, const Tree& t, const std::set<std::string>& alphabet);

}  // namespace xguard
