#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xguard {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class LabelKind : std::uint8_t { Element, Attribute, Text };

struct Label {
  LabelKind kind = LabelKind::Element;
  std::string name;   // element or attribute name, empty for text
  std::string value;  // attribute or text value, empty for elements

  static Label element(std::string name);
  static Label attribute(std::string name, std::string value);
  static Label text(std::string value);

  bool is_element() const noexcept { return kind == LabelKind::Element; }
  bool is_attribute() const noexcept { return kind == LabelKind::Attribute; }
  bool is_text() const noexcept { return kind == LabelKind::Text; }

  friend bool operator==(const Label&, const Label&) = default;
  friend std::strong_ordering operator<=>(const Label&, const Label&) = default;
};

std::string to_string(const Label& label);

// Rooted unordered tree. Node ids index the internal arrays; they carry no
// meaning beyond identity within one tree.
class Tree {
 public:
  explicit Tree(Label root_label);

  // Builds a tree from node labels and parent->child edges. Throws
  // StructuralError when the edges do not form a tree rooted at `root`.
  static Tree from_edges(std::vector<Label> labels,
                         const std::vector<std::pair<NodeId, NodeId>>& edges, NodeId root);

  NodeId add_child(NodeId parent, Label label);

  NodeId root() const noexcept { return root_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(NodeId n) const noexcept { return n < labels_.size(); }

  const Label& label(NodeId n) const { return labels_.at(n); }
  NodeId parent(NodeId n) const { return parent_.at(n); }
  std::span<const NodeId> children(NodeId n) const { return children_.at(n); }

  std::size_t depth(NodeId n) const;
  // Nodes from the root down to n, inclusive.
  std::vector<NodeId> path_from_root(NodeId n) const;
  bool is_ancestor(NodeId ancestor, NodeId n) const;  // strict
  // Element names occurring in the tree.
  std::set<std::string> element_names() const;

 private:
  Tree() = default;
  void check_attach(NodeId parent, const Label& label) const;

  std::vector<Label> labels_;
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  NodeId root_ = 0;
};

struct CanonicalForm {
  Tree tree;
  std::vector<NodeId> node_map;  // original id -> canonical id
};

// Canonical trees are numbered in pre-order with sorted children, so the root
// is 0 and every parent id is smaller than its children's ids.
CanonicalForm canonical_form(const Tree& t);
Tree canonicalize(const Tree& t);
bool is_canonical(const Tree& t);

// Term syntax: element := NAME ("(" child ("," child)* ")")?,
// child := element | "@" NAME "=" STRING | STRING.
std::string to_term(const Tree& t);
std::string subtree_term(const Tree& t, NodeId n);
Tree parse_tree(std::string_view text);

bool isomorphic(const Tree& a, const Tree& b);

// Root-to-node path such as /a[1]/b[2], /a[1]/@f or /a[1]/text()[1]. Indices
// count same-label siblings in canonical order, starting at 1.
std::string node_path(const Tree& t, NodeId n);
NodeId resolve_node_path(const Tree& t, std::string_view path);

struct MarkedTree {
  Tree tree;
  NodeId mark = 0;
};

struct DoublyMarkedTree {
  Tree tree;
  NodeId first = 0;
  NodeId second = 0;
};

MarkedTree canonicalize(const MarkedTree& t);
// Tree term with the mark appended, e.g. "a(z(b)) @ /a[1]/z[1]/b[1]".
std::string to_string(const MarkedTree& t);
bool operator==(const MarkedTree& a, const MarkedTree& b);

struct NodeMapping {
  Tree source;
  Tree target;
  std::vector<NodeId> map;  // indexed by source id
};

bool is_homomorphism(const NodeMapping& h);
// All homomorphisms from src.tree to dst.tree sending src.mark to dst.mark.
std::vector<NodeMapping> marked_homomorphisms(const MarkedTree& src, const MarkedTree& dst);
bool has_marked_homomorphism(const MarkedTree& src, const MarkedTree& dst);
// second ∘ first
NodeMapping compose(const NodeMapping& second, const NodeMapping& first);

class Relabeling {
 public:
  Relabeling() = default;
  explicit Relabeling(std::map<std::string, std::string> table) : table_(std::move(table)) {}

  const std::string& operator()(const std::string& name) const;
  bool fixes(const std::set<std::string>& names) const;
  const std::map<std::string, std::string>& table() const noexcept { return table_; }

 private:
  std::map<std::string, std::string> table_;
};

Tree apply_relabeling(const Relabeling& r, const Tree& t);

}  // namespace xguard
