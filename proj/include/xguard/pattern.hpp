#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xguard/tree.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

enum class EdgeKind : std::uint8_t { Child, Descendant };

struct PatternNode {
  std::optional<std::string> label;  // nullopt is the wildcard
  EdgeKind edge = EdgeKind::Child;   // incoming edge; for the root, from the document
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
};

// Nodes are stored in pre-order, so parents precede children and descendant
// edges are indexed in pre-order.
struct TreePattern {
  std::vector<PatternNode> nodes;
  NodeId mark = 0;

  NodeId add(NodeId parent, std::optional<std::string> label, EdgeKind edge);
  std::size_t size() const noexcept { return nodes.size(); }
  NodeId root() const noexcept { return 0; }
  std::vector<NodeId> spine() const;
  std::vector<NodeId> descendant_edges() const;
  std::size_t descendant_count() const { return descendant_edges().size(); }
  std::set<std::string> labels() const;
  // Longest chain of wildcard nodes joined by child edges, filters included.
  std::size_t star_chain() const;
  bool has_side_branches() const;
};

TreePattern path_to_pattern(const PathExpr& p);
PathExpr pattern_to_path(const TreePattern& p);
// Root-to-mark branch only.
TreePattern spine_of(const TreePattern& p);

bool pattern_matches(const TreePattern& p, const MarkedTree& t);
// Image of every pattern node under some embedding, if one exists.
std::optional<std::vector<NodeId>> find_embedding(const TreePattern& p, const MarkedTree& t);

struct Extension {
  std::vector<std::size_t> lengths;
};

TreePattern extend(const TreePattern& p, const Extension& e);
// Wildcards become `fresh`; descendant edges are read as child edges.
MarkedTree instantiate(const TreePattern& p, const std::string& fresh);
MarkedTree instantiate(const TreePattern& p, const Extension& e, const std::string& fresh);

// Visits every extension with lengths in [0, k], by increasing maximum length
// and lexicographically within one maximum. Stops when `visit` returns false.
void for_each_extension(std::size_t arity, std::size_t k,
                        const std::function<bool(const Extension&)>& visit);

std::vector<MarkedTree> canonical_instances(const PathExpr& p, std::size_t k, const std::string& z);

// Patterns whose union is the intersection of the two inputs: the spines are
// interleaved, nodes that coincide take the meet of their labels, and side
// branches of both inputs stay attached to their spine nodes.
std::vector<TreePattern> merge_patterns(const TreePattern& a, const TreePattern& b);

// Filter-path shaped marked trees are glued along equal spines.
std::optional<MarkedTree> intersect_marked(const MarkedTree& a, const MarkedTree& b);

// Filter path of a marked tree: the root-to-mark spine as child steps, with
// every other element subtree as a filter.
PathExpr filter_path_of(const MarkedTree& t);
// Root-to-mark label path.
PathExpr linear_path_of(const MarkedTree& t);

std::vector<PathExpr> lp_enumerate(const PathExpr& p, std::size_t max_len, const std::set<std::string>& alphabet);
std::vector<PathExpr> fp_enumerate(const PathExpr& p, std::size_t max_size, const std::set<std::string>& alphabet);

}  // namespace xguard
