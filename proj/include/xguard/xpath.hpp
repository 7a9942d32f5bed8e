#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xguard/tree.hpp"

namespace xguard {

enum class Axis : std::uint8_t { Self, Child, Descendant, Attribute };

struct NodeTest {
  enum class Kind : std::uint8_t { ElementName, Wildcard, AttributeName, Text };
  Kind kind = Kind::Wildcard;
  std::string name;  // element or attribute name

  static NodeTest element(std::string name) { return {Kind::ElementName, std::move(name)}; }
  static NodeTest wildcard() { return {Kind::Wildcard, {}}; }
  static NodeTest attribute(std::string name) { return {Kind::AttributeName, std::move(name)}; }
  static NodeTest text() { return {Kind::Text, {}}; }

  bool is_element() const noexcept { return kind == Kind::ElementName; }
  bool is_wildcard() const noexcept { return kind == Kind::Wildcard; }
  bool is_text() const noexcept { return kind == Kind::Text; }

  // Wildcards match element nodes only; text() matches text nodes.
  bool matches(const Label& label) const;

  friend bool operator==(const NodeTest&, const NodeTest&) = default;
  friend auto operator<=>(const NodeTest&, const NodeTest&) = default;
};

struct PathExpr;
struct FilterExpr;
using PathPtr = std::shared_ptr<const PathExpr>;
using FilterPtr = std::shared_ptr<const FilterExpr>;

struct Step {
  Axis axis;
  NodeTest test;
};
struct Seq {
  PathPtr head;
  PathPtr tail;
};
struct Filtered {
  PathPtr path;
  FilterPtr cond;
};

struct PathExpr {
  std::variant<Step, Seq, Filtered> node;
};

struct Exists {
  PathPtr path;
};
struct And {
  FilterPtr left;
  FilterPtr right;
};
struct AttrEq {
  std::string name;
  std::string value;
};
struct True {};

struct FilterExpr {
  std::variant<Exists, And, AttrEq, True> node;
};

bool operator==(const PathExpr& a, const PathExpr& b);
bool operator==(const FilterExpr& a, const FilterExpr& b);

PathExpr step(Axis axis, NodeTest test);
PathExpr seq(PathExpr head, PathExpr tail);
PathExpr filtered(PathExpr path, FilterExpr cond);
FilterExpr exists(PathExpr path);
FilterExpr conj(FilterExpr left, FilterExpr right);
FilterExpr attr_eq(std::string name, std::string value);
FilterExpr always();

// Abbreviated syntax: "/" child, "//" descendant, "@f" attribute, "*" and
// "text()" tests, "[...]" filters with "and", "@f=\"v\"", "@f=$param" and
// "true()". Explicit axes ("child::a") and parenthesised groups are accepted.
PathExpr parse_path(std::string_view text);
NodeTest parse_node_test(std::string_view text);

std::string to_string(const PathExpr& p);
std::string to_string(const FilterExpr& q);
std::string to_string(const NodeTest& t);
std::string to_string(Axis a);

// Right-associates Seq and moves filters onto the last step they constrain.
PathExpr normalize(const PathExpr& p);

// Nodes selected from the document; the evaluation context is a document
// node whose only child is the tree root, so "/a" selects an a-labelled root.
std::vector<NodeId> eval(const PathExpr& p, const Tree& t);
bool selects(const PathExpr& p, const Tree& t, NodeId n);
// Pairs (v, w) of tree nodes related by p.
std::vector<std::pair<NodeId, NodeId>> eval_pairs(const PathExpr& p, const Tree& t);
// As eval_pairs, with kNoNode standing for the document node as a source.
std::vector<std::pair<NodeId, NodeId>> eval_pairs_from_document(const PathExpr& p, const Tree& t);
bool filter_holds(const FilterExpr& q, const Tree& t, NodeId n);

std::set<std::string> labels(const PathExpr& p);
std::set<std::string> labels(const FilterExpr& q);
std::size_t star_length(const PathExpr& p);
std::size_t descendant_count(const PathExpr& p);
// Number of Step nodes, filter steps included.
std::size_t step_count(const PathExpr& p);

class FragmentId {
 public:
  enum Feature : unsigned {
    Child = 1u << 0,
    Descendant = 1u << 1,
    Wildcard = 1u << 2,
    Filter = 1u << 3,
    AttrEquality = 1u << 4,
    AttributeAxis = 1u << 5,
  };

  constexpr FragmentId() = default;
  constexpr explicit FragmentId(unsigned features) : features_(features) {}

  static constexpr FragmentId linear() { return FragmentId(Child); }
  static constexpr FragmentId filter_paths() { return FragmentId(Child | Filter); }
  static constexpr FragmentId patterns() { return FragmentId(Child | Descendant | Wildcard | Filter); }
  static constexpr FragmentId filter_free() { return FragmentId(Child | Descendant | Wildcard); }

  constexpr unsigned features() const noexcept { return features_; }
  constexpr bool has(Feature f) const noexcept { return (features_ & f) != 0; }
  constexpr bool subset_of(FragmentId other) const noexcept {
    return (features_ & ~other.features_) == 0;
  }
  std::string to_string() const;

  friend constexpr bool operator==(FragmentId, FragmentId) = default;

 private:
  unsigned features_ = 0;
};

FragmentId fragment_of(const PathExpr& p);
FragmentId fragment_of(const FilterExpr& q);

// Element-only downward paths: no attribute features, no self axis, no text().
bool is_pattern_path(const PathExpr& p);

}  // namespace xguard
