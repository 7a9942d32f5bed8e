#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "xguard/tree.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

// A set of trees evaluated together. Each tree occupies a block of slots: a
// document slot followed by its nodes in pre-order, so a parent slot always
// precedes its children.
class Forest {
 public:
  using Set = std::vector<std::uint8_t>;  // indexed by slot

  Forest() = default;
  explicit Forest(const Tree& t) { add(t); }

  // Returns the index of the added tree.
  std::size_t add(const Tree& t);

  std::size_t slot_count() const noexcept { return parent_.size(); }
  std::size_t tree_count() const noexcept { return doc_slot_.size(); }
  std::size_t document_slot(std::size_t tree) const { return doc_slot_.at(tree); }
  std::size_t slot(std::size_t tree, NodeId n) const { return slot_of_.at(slot_base_.at(tree) + n); }
  bool is_document(std::size_t slot) const { return kind_[slot] == kDocument; }
  std::size_t tree_of(std::size_t slot) const { return tree_of_[slot]; }
  NodeId node_of(std::size_t slot) const { return node_of_[slot]; }

  Set empty_set() const { return Set(slot_count(), 0); }
  Set documents() const;

  Set image(const PathExpr& p, const Set& from) const;
  Set preimage(const PathExpr& p, const Set& to) const;
  Set filter_set(const FilterExpr& q) const;
  // Nodes selected by p from each tree's document slot.
  Set select(const PathExpr& p) const { return image(p, documents()); }

 private:
  static constexpr std::uint8_t kDocument = 3;
  static constexpr std::uint32_t kNone = 0xffffffffu;

  int symbol(const std::string& s) const;
  int intern(const std::string& s);
  bool test_matches(const NodeTest& t, int name_id, std::size_t slot) const;
  int test_symbol(const NodeTest& t) const;

  Set image_step(const Step& s, const Set& from) const;
  Set preimage_step(const Step& s, const Set& to) const;

  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> kind_;  // LabelKind or kDocument
  std::vector<int> name_;           // element/attribute name symbol, -1 otherwise
  std::vector<int> value_;          // attribute value symbol, -1 otherwise
  std::vector<std::size_t> doc_slot_;
  std::vector<std::size_t> slot_base_;
  std::vector<std::uint32_t> slot_of_;
  std::vector<std::uint32_t> tree_of_;
  std::vector<NodeId> node_of_;
  std::unordered_map<std::string, int> symbols_;
};

}  // namespace xguard
