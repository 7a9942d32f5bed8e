#include "xguard/forest.hpp"

#include <algorithm>

namespace xguard {

int Forest::symbol(const std::string& s) const {
  auto it = symbols_.find(s);
  return it == symbols_.end() ? -2 : it->second;
}

int Forest::intern(const std::string& s) {
  auto [it, inserted] = symbols_.emplace(s, static_cast<int>(symbols_.size()));
  return it->second;
}

std::size_t Forest::add(const Tree& t) {
  const std::size_t index = doc_slot_.size();
  const std::size_t doc = parent_.size();
  doc_slot_.push_back(doc);
  slot_base_.push_back(slot_of_.size());
  slot_of_.resize(slot_of_.size() + t.size(), kNone);

  parent_.push_back(kNone);
  kind_.push_back(kDocument);
  name_.push_back(-1);
  value_.push_back(-1);
  tree_of_.push_back(static_cast<std::uint32_t>(index));
  node_of_.push_back(kNoNode);

  std::vector<std::pair<NodeId, std::uint32_t>> stack{{t.root(), static_cast<std::uint32_t>(doc)}};
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    stack.pop_back();
    auto s = static_cast<std::uint32_t>(parent_.size());
    slot_of_[slot_base_[index] + v] = s;
    const Label& l = t.label(v);
    parent_.push_back(par);
    kind_.push_back(static_cast<std::uint8_t>(l.kind));
    name_.push_back(l.is_text() ? -1 : intern(l.name));
    value_.push_back(l.is_attribute() ? intern(l.value) : -1);
    tree_of_.push_back(static_cast<std::uint32_t>(index));
    node_of_.push_back(v);
    auto kids = t.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, s});
  }
  return index;
}

Forest::Set Forest::documents() const {
  Set s = empty_set();
  for (std::size_t d : doc_slot_) s[d] = 1;
  return s;
}

int Forest::test_symbol(const NodeTest& t) const {
  if (t.kind == NodeTest::Kind::ElementName || t.kind == NodeTest::Kind::AttributeName) return symbol(t.name);
  return -1;
}

bool Forest::test_matches(const NodeTest& t, int name_id, std::size_t slot) const {
  std::uint8_t k = kind_[slot];
  switch (t.kind) {
    case NodeTest::Kind::ElementName:
      return k == static_cast<std::uint8_t>(LabelKind::Element) && name_[slot] == name_id;
    case NodeTest::Kind::Wildcard: return k == static_cast<std::uint8_t>(LabelKind::Element);
    case NodeTest::Kind::AttributeName:
      return k == static_cast<std::uint8_t>(LabelKind::Attribute) && name_[slot] == name_id;
    case NodeTest::Kind::Text: return k == static_cast<std::uint8_t>(LabelKind::Text);
  }
  return false;
}

Forest::Set Forest::image_step(const Step& s, const Set& from) const {
  const std::size_t n = slot_count();
  const int id = test_symbol(s.test);
  Set out(n, 0);
  switch (s.axis) {
    case Axis::Self:
      for (std::size_t i = 0; i < n; ++i) out[i] = from[i] && test_matches(s.test, id, i);
      break;
    case Axis::Child:
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t p = parent_[i];
        out[i] = p != kNone && from[p] && test_matches(s.test, id, i);
      }
      break;
    case Axis::Attribute:
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t p = parent_[i];
        out[i] = p != kNone && from[p] && kind_[i] == static_cast<std::uint8_t>(LabelKind::Attribute) &&
                 test_matches(s.test, id, i);
      }
      break;
    case Axis::Descendant: {
      // below[i]: some proper ancestor of i is in `from`.
      Set below(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t p = parent_[i];
        if (p == kNone) continue;
        below[i] = below[p] || from[p];
        out[i] = below[i] && test_matches(s.test, id, i);
      }
      break;
    }
  }
  return out;
}

Forest::Set Forest::preimage_step(const Step& s, const Set& to) const {
  const std::size_t n = slot_count();
  const int id = test_symbol(s.test);
  Set out(n, 0);
  switch (s.axis) {
    case Axis::Self:
      for (std::size_t i = 0; i < n; ++i) out[i] = to[i] && test_matches(s.test, id, i);
      break;
    case Axis::Child:
    case Axis::Attribute: {
      const bool attr = s.axis == Axis::Attribute;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t p = parent_[i];
        if (p == kNone || !to[i]) continue;
        bool is_attr = kind_[i] == static_cast<std::uint8_t>(LabelKind::Attribute);
        if ((is_attr || !attr) && test_matches(s.test, id, i)) out[p] = 1;
      }
      break;
    }
    case Axis::Descendant: {
      for (std::size_t i = n; i-- > 0;) {
        std::uint32_t p = parent_[i];
        if (p == kNone) continue;
        bool hit = to[i] && test_matches(s.test, id, i);
        if (hit || out[i]) out[p] = 1;
      }
      break;
    }
  }
  return out;
}

Forest::Set Forest::image(const PathExpr& p, const Set& from) const {
  if (auto* s = std::get_if<Step>(&p.node)) return image_step(*s, from);
  if (auto* q = std::get_if<Seq>(&p.node)) return image(*q->tail, image(*q->head, from));
  const auto& f = std::get<Filtered>(p.node);
  Set out = image(*f.path, from);
  Set keep = filter_set(*f.cond);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] && keep[i];
  return out;
}

Forest::Set Forest::preimage(const PathExpr& p, const Set& to) const {
  if (auto* s = std::get_if<Step>(&p.node)) return preimage_step(*s, to);
  if (auto* q = std::get_if<Seq>(&p.node)) return preimage(*q->head, preimage(*q->tail, to));
  const auto& f = std::get<Filtered>(p.node);
  Set keep = filter_set(*f.cond);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = keep[i] && to[i];
  return preimage(*f.path, keep);
}

Forest::Set Forest::filter_set(const FilterExpr& q) const {
  const std::size_t n = slot_count();
  if (auto* e = std::get_if<Exists>(&q.node)) {
    Set all(n, 1);
    return preimage(*e->path, all);
  }
  if (auto* a = std::get_if<And>(&q.node)) {
    Set l = filter_set(*a->left);
    Set r = filter_set(*a->right);
    for (std::size_t i = 0; i < n; ++i) l[i] = l[i] && r[i];
    return l;
  }
  if (auto* eq = std::get_if<AttrEq>(&q.node)) {
    Set out(n, 0);
    const int name = symbol(eq->name);
    const int value = symbol(eq->value);
    if (name < 0 || value < 0) return out;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t p = parent_[i];
      if (p != kNone && kind_[i] == static_cast<std::uint8_t>(LabelKind::Attribute) && name_[i] == name &&
          value_[i] == value)
        out[p] = 1;
    }
    return out;
  }
  return Set(n, 1);
}

}  // namespace xguard
