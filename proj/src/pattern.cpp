#include "xguard/pattern.hpp"

#include <algorithm>
#include <map>

#include "kernel.hpp"
#include "xguard/errors.hpp"

namespace xguard {

NodeId TreePattern::add(NodeId parent, std::optional<std::string> label, EdgeKind edge) {
  auto id = static_cast<NodeId>(nodes.size());
  nodes.push_back(PatternNode{std::move(label), edge, parent, {}});
  if (parent != kNoNode) nodes.at(parent).children.push_back(id);
  return id;
}

std::vector<NodeId> TreePattern::spine() const {
  std::vector<NodeId> out;
  for (NodeId v = mark; v != kNoNode; v = nodes[v].parent) out.push_back(v);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<NodeId> TreePattern::descendant_edges() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < nodes.size(); ++v)
    if (nodes[v].edge == EdgeKind::Descendant) out.push_back(v);
  return out;
}

std::set<std::string> TreePattern::labels() const {
  std::set<std::string> out;
  for (const auto& n : nodes)
    if (n.label) out.insert(*n.label);
  return out;
}

std::size_t TreePattern::star_chain() const {
  std::vector<std::size_t> chain(nodes.size(), 0);
  std::size_t best = 0;
  for (NodeId v = 0; v < nodes.size(); ++v) {
    const auto& n = nodes[v];
    if (n.label) continue;
    chain[v] = 1;
    if (n.parent != kNoNode && n.edge == EdgeKind::Child && !nodes[n.parent].label) chain[v] += chain[n.parent];
    best = std::max(best, chain[v]);
  }
  return best;
}

bool TreePattern::has_side_branches() const { return spine().size() != nodes.size(); }

namespace {

// Re-numbers a pattern in pre-order, keeping each node's child order.
TreePattern preorder(const TreePattern& p) {
  TreePattern out;
  std::vector<NodeId> map(p.size(), kNoNode);
  std::vector<std::pair<NodeId, NodeId>> stack{{0, kNoNode}};
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    stack.pop_back();
    map[v] = out.add(par, p.nodes[v].label, p.nodes[v].edge);
    const auto& kids = p.nodes[v].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, map[v]});
  }
  out.mark = map[p.mark];
  return out;
}

NodeId build_path(const PathExpr& p, NodeId parent, TreePattern& out);

void build_filter(const FilterExpr& q, NodeId at, TreePattern& out) {
  if (auto* e = std::get_if<Exists>(&q.node)) {
    build_path(*e->path, at, out);
  } else if (auto* a = std::get_if<And>(&q.node)) {
    build_filter(*a->left, at, out);
    build_filter(*a->right, at, out);
  }
}

NodeId build_path(const PathExpr& p, NodeId parent, TreePattern& out) {
  if (auto* s = std::get_if<Step>(&p.node)) {
    std::optional<std::string> label;
    if (s->test.is_element()) label = s->test.name;
    return out.add(parent, label, s->axis == Axis::Descendant ? EdgeKind::Descendant : EdgeKind::Child);
  }
  if (auto* q = std::get_if<Seq>(&p.node)) return build_path(*q->tail, build_path(*q->head, parent, out), out);
  const auto& f = std::get<Filtered>(p.node);
  NodeId last = build_path(*f.path, parent, out);
  build_filter(*f.cond, last, out);
  return last;
}

PathExpr node_step(const PatternNode& n) {
  NodeTest t = n.label ? NodeTest::element(*n.label) : NodeTest::wildcard();
  return step(n.edge == EdgeKind::Descendant ? Axis::Descendant : Axis::Child, std::move(t));
}

PathExpr subtree_path(const TreePattern& p, NodeId v);

std::optional<FilterExpr> side_filters(const TreePattern& p, NodeId v, NodeId skip) {
  std::optional<FilterExpr> out;
  for (NodeId c : p.nodes[v].children) {
    if (c == skip) continue;
    FilterExpr e = exists(subtree_path(p, c));
    out = out ? conj(std::move(*out), std::move(e)) : std::move(e);
  }
  return out;
}

PathExpr subtree_path(const TreePattern& p, NodeId v) {
  PathExpr s = node_step(p.nodes[v]);
  const auto& kids = p.nodes[v].children;
  if (kids.size() == 1) return seq(std::move(s), subtree_path(p, kids[0]));
  if (auto q = side_filters(p, v, kNoNode)) return filtered(std::move(s), std::move(*q));
  return s;
}

}  // namespace

TreePattern path_to_pattern(const PathExpr& p) {
  if (!is_pattern_path(p))
    throw UnsupportedFragment("path '" + to_string(p) +
                              "' is outside XP(/,//,*,[ ]) (attribute, self or text() steps)");
  TreePattern out;
  out.mark = build_path(p, kNoNode, out);
  return preorder(out);
}

PathExpr pattern_to_path(const TreePattern& p) {
  auto spine = p.spine();
  std::vector<PathExpr> parts;
  for (std::size_t i = 0; i < spine.size(); ++i) {
    NodeId skip = i + 1 < spine.size() ? spine[i + 1] : kNoNode;
    PathExpr s = node_step(p.nodes[spine[i]]);
    if (auto q = side_filters(p, spine[i], skip)) s = filtered(std::move(s), std::move(*q));
    parts.push_back(std::move(s));
  }
  PathExpr out = std::move(parts.back());
  for (std::size_t i = parts.size() - 1; i-- > 0;) out = seq(std::move(parts[i]), std::move(out));
  return out;
}

TreePattern spine_of(const TreePattern& p) {
  TreePattern out;
  NodeId prev = kNoNode;
  for (NodeId v : p.spine()) prev = out.add(prev, p.nodes[v].label, p.nodes[v].edge);
  out.mark = prev;
  return out;
}

bool pattern_matches(const TreePattern& p, const MarkedTree& t) {
  kernel::Symbols symbols;
  auto ip = kernel::intern(p, symbols);
  auto it = kernel::intern(t, symbols);
  kernel::Matcher m;
  return m.matches(ip, it);
}

std::optional<std::vector<NodeId>> find_embedding(const TreePattern& p, const MarkedTree& t) {
  kernel::Symbols symbols;
  auto ip = kernel::intern(p, symbols);
  std::vector<NodeId> origin;
  auto it = kernel::intern(t, symbols, &origin);
  kernel::Matcher m;
  auto e = m.embedding(ip, it);
  if (!e) return std::nullopt;
  std::vector<NodeId> out;
  for (int x : *e) out.push_back(origin[static_cast<std::size_t>(x)]);
  return out;
}

TreePattern extend(const TreePattern& p, const Extension& e) {
  auto edges = p.descendant_edges();
  if (e.lengths.size() != edges.size())
    throw ContractError("extension has " + std::to_string(e.lengths.size()) + " lengths but the pattern has " +
                        std::to_string(edges.size()) + " descendant edges");
  TreePattern out;
  std::vector<NodeId> map(p.size(), kNoNode);
  std::size_t next = 0;
  for (NodeId v = 0; v < p.size(); ++v) {
    const auto& n = p.nodes[v];
    NodeId attach = n.parent == kNoNode ? kNoNode : map[n.parent];
    if (n.edge == EdgeKind::Descendant) {
      for (std::size_t i = 0; i < e.lengths[next]; ++i) attach = out.add(attach, std::nullopt, EdgeKind::Child);
      ++next;
    }
    map[v] = out.add(attach, n.label, EdgeKind::Child);
  }
  out.mark = map[p.mark];
  return preorder(out);
}

MarkedTree instantiate(const TreePattern& p, const std::string& fresh) {
  kernel::Symbols symbols;
  auto ip = kernel::intern(p, symbols);
  int z = symbols.id(fresh);
  kernel::ITree t;
  kernel::instantiate(ip, {}, z, t);
  return kernel::to_marked_tree(t, symbols);
}

MarkedTree instantiate(const TreePattern& p, const Extension& e, const std::string& fresh) {
  return instantiate(extend(p, e), fresh);
}

void for_each_extension(std::size_t arity, std::size_t k, const std::function<bool(const Extension&)>& visit) {
  Extension e{std::vector<std::size_t>(arity, 0)};
  if (arity == 0) {
    visit(e);
    return;
  }
  for (std::size_t top = 0; top <= k; ++top) {
    std::fill(e.lengths.begin(), e.lengths.end(), 0);
    while (true) {
      if (std::find(e.lengths.begin(), e.lengths.end(), top) != e.lengths.end()) {
        if (!visit(e)) return;
      }
      std::size_t i = arity;
      while (i > 0 && e.lengths[i - 1] == top) e.lengths[--i] = 0;
      if (i == 0) break;
      ++e.lengths[i - 1];
    }
  }
}

std::vector<MarkedTree> canonical_instances(const PathExpr& p, std::size_t k, const std::string& z) {
  if (labels(p).count(z)) throw ContractError("fresh label '" + z + "' occurs in " + to_string(p));
  TreePattern pat = path_to_pattern(p);
  std::vector<MarkedTree> out;
  for_each_extension(pat.descendant_count(), k, [&](const Extension& e) {
    out.push_back(instantiate(pat, e, z));
    return true;
  });
  return out;
}

// ---------------------------------------------------------------- merges

namespace {

struct MergedSlot {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  std::optional<std::string> label;
  EdgeKind edge = EdgeKind::Descendant;
};

void copy_subtree(const TreePattern& src, NodeId v, NodeId parent, TreePattern& out) {
  NodeId id = out.add(parent, src.nodes[v].label, src.nodes[v].edge);
  for (NodeId c : src.nodes[v].children) copy_subtree(src, c, id, out);
}

void attach_sides(const TreePattern& src, NodeId v, NodeId skip, NodeId at, TreePattern& out) {
  for (NodeId c : src.nodes[v].children)
    if (c != skip) copy_subtree(src, c, at, out);
}

class Merger {
 public:
  Merger(const TreePattern& a, const TreePattern& b) : a_(a), b_(b), sa_(a.spine()), sb_(b.spine()) {}

  std::vector<TreePattern> run() {
    rec(0, 0, false, false);
    return std::move(out_);
  }

 private:
  // Can spine node i of x be placed at the next position?
  static bool placeable(const TreePattern& x, const std::vector<NodeId>& s, std::size_t i, bool first, bool last_x) {
    if (x.nodes[s[i]].edge == EdgeKind::Descendant) return true;
    return i == 0 ? first : last_x;
  }

  void rec(std::size_t i, std::size_t j, bool last_a, bool last_b) {
    const bool first = slots_.empty();
    const std::size_t ka = sa_.size(), kb = sb_.size();
    if (i == ka && j == kb) {
      if (last_a && last_b) emit();
      return;
    }
    const bool can_a = i < ka && placeable(a_, sa_, i, first, last_a);
    const bool can_b = j < kb && placeable(b_, sb_, j, first, last_b);
    // A pending child edge that cannot be served now never can be.
    if (i < ka && !can_a && (i > 0 || !first)) return;
    if (j < kb && !can_b && (j > 0 || !first)) return;
    if (can_a && can_b) {
      const auto& la = a_.nodes[sa_[i]].label;
      const auto& lb = b_.nodes[sb_[j]].label;
      if (!la || !lb || *la == *lb) {
        bool child = a_.nodes[sa_[i]].edge == EdgeKind::Child || b_.nodes[sb_[j]].edge == EdgeKind::Child;
        slots_.push_back({sa_[i], sb_[j], la ? la : lb, child ? EdgeKind::Child : EdgeKind::Descendant});
        rec(i + 1, j + 1, true, true);
        slots_.pop_back();
      }
    }
    // The marks must end up on the same node.
    if (can_a && i + 1 < ka) {
      slots_.push_back({sa_[i], kNoNode, a_.nodes[sa_[i]].label, a_.nodes[sa_[i]].edge});
      rec(i + 1, j, true, false);
      slots_.pop_back();
    }
    if (can_b && j + 1 < kb) {
      slots_.push_back({kNoNode, sb_[j], b_.nodes[sb_[j]].label, b_.nodes[sb_[j]].edge});
      rec(i, j + 1, false, true);
      slots_.pop_back();
    }
  }

  void emit() {
    // Side branches go before the spine continuation, left input first.
    TreePattern ordered;
    std::vector<NodeId> map(slots_.size());
    NodeId parent = kNoNode;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      const auto& s = slots_[k];
      map[k] = ordered.add(parent, s.label, s.edge);
      if (s.a != kNoNode) {
        auto next = std::find(sa_.begin(), sa_.end(), s.a) + 1;
        attach_sides(a_, s.a, next == sa_.end() ? kNoNode : *next, map[k], ordered);
      }
      if (s.b != kNoNode) {
        auto next = std::find(sb_.begin(), sb_.end(), s.b) + 1;
        attach_sides(b_, s.b, next == sb_.end() ? kNoNode : *next, map[k], ordered);
      }
      parent = map[k];
    }
    ordered.mark = map.back();
    out_.push_back(preorder(ordered));
  }

  const TreePattern& a_;
  const TreePattern& b_;
  std::vector<NodeId> sa_, sb_;
  std::vector<MergedSlot> slots_;
  std::vector<TreePattern> out_;
};

}  // namespace

std::vector<TreePattern> merge_patterns(const TreePattern& a, const TreePattern& b) { return Merger(a, b).run(); }

// ---------------------------------------------------------------- marked trees

namespace {

void graft(const Tree& src, NodeId v, NodeId parent, Tree& out) {
  NodeId id = out.add_child(parent, src.label(v));
  for (NodeId c : src.children(v)) graft(src, c, id, out);
}

}  // namespace

std::optional<MarkedTree> intersect_marked(const MarkedTree& a, const MarkedTree& b) {
  auto sa = a.tree.path_from_root(a.mark);
  auto sb = b.tree.path_from_root(b.mark);
  if (sa.size() != sb.size()) return std::nullopt;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (a.tree.label(sa[i]) != b.tree.label(sb[i])) return std::nullopt;
  Tree out(a.tree.label(sa[0]));
  std::vector<NodeId> spine{out.root()};
  for (std::size_t i = 1; i < sa.size(); ++i) spine.push_back(out.add_child(spine.back(), a.tree.label(sa[i])));
  auto add_sides = [&](const MarkedTree& t, const std::vector<NodeId>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      NodeId skip = i + 1 < s.size() ? s[i + 1] : kNoNode;
      for (NodeId c : t.tree.children(s[i])) {
        if (c == skip) continue;
        try {
          graft(t.tree, c, spine[i], out);
        } catch (const StructuralError&) {
          // Both sides carry the same attribute; keep one copy when equal.
          const Label& l = t.tree.label(c);
          bool same = false;
          for (NodeId x : out.children(spine[i])) same = same || out.label(x) == l;
          if (!same) return false;
        }
      }
    }
    return true;
  };
  if (!add_sides(a, sa) || !add_sides(b, sb)) return std::nullopt;
  return MarkedTree{std::move(out), spine.back()};
}

namespace {

TreePattern subtree_pattern(const MarkedTree& t, bool with_sides) {
  TreePattern out;
  auto spine = t.tree.path_from_root(t.mark);
  std::function<void(NodeId, NodeId)> copy = [&](NodeId v, NodeId parent) {
    NodeId id = out.add(parent, t.tree.label(v).name, EdgeKind::Child);
    for (NodeId c : t.tree.children(v))
      if (t.tree.label(c).is_element()) copy(c, id);
  };
  NodeId prev = kNoNode;
  for (std::size_t i = 0; i < spine.size(); ++i) {
    if (!t.tree.label(spine[i]).is_element())
      throw ContractError("marked branch passes through a non-element node");
    prev = out.add(prev, t.tree.label(spine[i]).name, EdgeKind::Child);
    if (!with_sides) continue;
    NodeId skip = i + 1 < spine.size() ? spine[i + 1] : kNoNode;
    for (NodeId c : t.tree.children(spine[i]))
      if (c != skip && t.tree.label(c).is_element()) copy(c, prev);
  }
  out.mark = prev;
  return preorder(out);
}

}  // namespace

PathExpr filter_path_of(const MarkedTree& t) {
  MarkedTree c = canonicalize(t);
  return pattern_to_path(subtree_pattern(c, true));
}

PathExpr linear_path_of(const MarkedTree& t) { return pattern_to_path(subtree_pattern(t, false)); }

// ---------------------------------------------------------------- LP / FP

namespace {

void require_linear(const PathExpr& p) {
  if (!is_pattern_path(p) || fragment_of(p).has(FragmentId::Filter))
    throw UnsupportedFragment("'" + to_string(p) + "' is outside XP(/,//,*)");
}

std::vector<PathExpr> sorted_unique(std::map<std::string, PathExpr>& found) {
  std::vector<PathExpr> out;
  for (auto& [k, v] : found) out.push_back(std::move(v));
  return out;
}

}  // namespace

std::vector<PathExpr> lp_enumerate(const PathExpr& p, std::size_t max_len, const std::set<std::string>& alphabet) {
  require_linear(p);
  if (alphabet.empty()) throw ContractError("alphabet must not be empty");
  TreePattern pat = path_to_pattern(p);
  auto spine = pat.spine();
  std::map<std::string, PathExpr> found;
  std::vector<std::string> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == spine.size()) {
      TreePattern lin;
      NodeId prev = kNoNode;
      for (const auto& l : cur) prev = lin.add(prev, l, EdgeKind::Child);
      lin.mark = prev;
      PathExpr e = pattern_to_path(lin);
      found.emplace(to_string(e), std::move(e));
      return;
    }
    if (cur.size() >= max_len) return;
    const auto& node = pat.nodes[spine[i]];
    auto place = [&](const std::string& l) {
      cur.push_back(l);
      rec(i + 1);
      cur.pop_back();
    };
    if (node.label) place(*node.label);
    else
      for (const auto& a : alphabet) place(a);
    if (node.edge == EdgeKind::Descendant && cur.size() + 1 < max_len) {
      // One more intermediate step before the same descendant step.
      for (const auto& a : alphabet) {
        cur.push_back(a);
        rec(i);
        cur.pop_back();
      }
    }
  };
  rec(0);
  return sorted_unique(found);
}

std::vector<PathExpr> fp_enumerate(const PathExpr& p, std::size_t max_size, const std::set<std::string>& alphabet) {
  if (alphabet.empty()) throw ContractError("alphabet must not be empty");
  TreePattern pat = path_to_pattern(p);
  std::map<std::string, PathExpr> found;
  if (pat.size() > max_size) return {};
  const std::size_t slack = max_size - pat.size();
  const std::size_t d = pat.descendant_count();
  for_each_extension(d, slack, [&](const Extension& e) {
    std::size_t extra = 0;
    for (auto u : e.lengths) extra += u;
    if (extra > slack) return true;
    TreePattern ext = extend(pat, e);
    std::vector<NodeId> holes;
    for (NodeId v = 0; v < ext.size(); ++v)
      if (!ext.nodes[v].label) holes.push_back(v);
    std::vector<std::string> letters(alphabet.begin(), alphabet.end());
    std::vector<std::size_t> pick(holes.size(), 0);
    while (true) {
      TreePattern inst = ext;
      for (std::size_t h = 0; h < holes.size(); ++h) inst.nodes[holes[h]].label = letters[pick[h]];
      PathExpr path = pattern_to_path(inst);
      found.emplace(to_string(path), std::move(path));
      std::size_t h = 0;
      while (h < pick.size() && ++pick[h] == letters.size()) pick[h++] = 0;
      if (h == pick.size()) break;
    }
    return true;
  });
  return sorted_unique(found);
}

}  // namespace xguard
