#include <algorithm>

#include "xguard/errors.hpp"
#include "xguard/forest.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

namespace {

std::vector<NodeId> collect(const Forest& f, const Forest::Set& s) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] && !f.is_document(i)) out.push_back(f.node_of(i));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<NodeId, NodeId>> pairs(const PathExpr& p, const Tree& t, bool with_document) {
  Forest f(t);
  std::vector<std::pair<NodeId, NodeId>> out;
  auto from_slot = [&](std::size_t slot, NodeId source) {
    Forest::Set src = f.empty_set();
    src[slot] = 1;
    for (NodeId w : collect(f, f.image(p, src))) out.emplace_back(source, w);
  };
  if (with_document) from_slot(f.document_slot(0), kNoNode);
  for (NodeId v = 0; v < t.size(); ++v) from_slot(f.slot(0, v), v);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<NodeId> eval(const PathExpr& p, const Tree& t) {
  Forest f(t);
  return collect(f, f.select(p));
}

bool selects(const PathExpr& p, const Tree& t, NodeId n) {
  if (!t.contains(n)) throw ContractError("node " + std::to_string(n) + " is not in the tree");
  Forest f(t);
  return f.select(p)[f.slot(0, n)] != 0;
}

std::vector<std::pair<NodeId, NodeId>> eval_pairs(const PathExpr& p, const Tree& t) {
  return pairs(p, t, false);
}

std::vector<std::pair<NodeId, NodeId>> eval_pairs_from_document(const PathExpr& p, const Tree& t) {
  return pairs(p, t, true);
}

bool filter_holds(const FilterExpr& q, const Tree& t, NodeId n) {
  if (!t.contains(n)) throw ContractError("node " + std::to_string(n) + " is not in the tree");
  Forest f(t);
  return f.filter_set(q)[f.slot(0, n)] != 0;
}

}  // namespace xguard
