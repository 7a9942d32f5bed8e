#include "kernel.hpp"

#include <algorithm>

namespace xguard::kernel {

int Symbols::id(const std::string& name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

int Symbols::find(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? kNonElement : it->second;
}

IPattern intern(const TreePattern& p, Symbols& symbols) {
  IPattern out;
  const std::size_t n = p.size();
  out.label.resize(n);
  out.desc.resize(n);
  out.parent.resize(n);
  out.children.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const PatternNode& node = p.nodes[v];
    out.label[v] = node.label ? symbols.id(*node.label) : kWildcard;
    out.desc[v] = node.edge == EdgeKind::Descendant;
    out.parent[v] = node.parent == kNoNode ? -1 : static_cast<int>(node.parent);
    for (NodeId c : node.children) out.children[v].push_back(static_cast<int>(c));
    if (out.desc[v]) out.desc_edges.push_back(static_cast<int>(v));
  }
  out.mark = static_cast<int>(p.mark);
  return out;
}

ITree intern(const MarkedTree& t, Symbols& symbols, std::vector<NodeId>* origin) {
  ITree out;
  if (origin) origin->clear();
  std::vector<std::pair<NodeId, int>> stack{{t.tree.root(), -1}};
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    stack.pop_back();
    const Label& l = t.tree.label(v);
    int id = out.add(par, l.is_element() ? symbols.id(l.name) : kNonElement);
    if (origin) origin->push_back(v);
    if (v == t.mark) out.mark = id;
    auto kids = t.tree.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, id});
  }
  return out;
}

MarkedTree to_marked_tree(const ITree& t, const Symbols& symbols) {
  std::vector<Label> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int v = 0; v < t.size(); ++v) {
    labels.push_back(Label::element(symbols.name(t.label[v])));
    if (t.parent[v] >= 0) edges.emplace_back(static_cast<NodeId>(t.parent[v]), static_cast<NodeId>(v));
  }
  return MarkedTree{Tree::from_edges(std::move(labels), edges, 0), static_cast<NodeId>(t.mark)};
}

void instantiate(const IPattern& p, const std::vector<std::size_t>& u, int z, ITree& out, std::vector<int>* image) {
  out.clear();
  std::vector<int> local;
  std::vector<int>& at = image ? *image : local;
  at.assign(p.label.size(), -1);
  std::size_t next_desc = 0;
  for (int v = 0; v < p.size(); ++v) {
    int attach = p.parent[v] < 0 ? -1 : at[p.parent[v]];
    if (p.desc[v]) {
      std::size_t len = u.empty() ? 0 : u[next_desc];
      ++next_desc;
      for (std::size_t i = 0; i < len; ++i) attach = out.add(attach, z);
    }
    at[v] = out.add(attach, p.label[v] == kWildcard ? z : p.label[v]);
  }
  out.mark = at[p.mark];
}

bool Matcher::fill(const IPattern& p, const ITree& t) {
  const int n = t.size();
  const int m = p.size();
  n_ = n;
  sat_.assign(static_cast<std::size_t>(m) * n, 0);
  has_.resize(n);
  for (int v = m - 1; v >= 0; --v) {
    std::uint8_t* row = &sat_[static_cast<std::size_t>(v) * n];
    const int lab = p.label[v];
    bool any = false;
    for (int w = 0; w < n; ++w) {
      row[w] = lab == kWildcard ? t.label[w] != kNonElement : t.label[w] == lab;
    }
    if (v == p.mark) {
      for (int w = 0; w < n; ++w) row[w] = row[w] && w == t.mark;
    }
    for (int c : p.children[v]) {
      const std::uint8_t* crow = &sat_[static_cast<std::size_t>(c) * n];
      std::fill(has_.begin(), has_.end(), 0);
      if (p.desc[c]) {
        for (int x = n - 1; x >= 0; --x) {
          int par = t.parent[x];
          if (par >= 0 && (crow[x] || has_[x])) has_[par] = 1;
        }
      } else {
        for (int x = 0; x < n; ++x) {
          int par = t.parent[x];
          if (par >= 0 && crow[x]) has_[par] = 1;
        }
      }
      for (int w = 0; w < n; ++w) row[w] = row[w] && has_[w];
    }
    for (int w = 0; w < n && !any; ++w) any = row[w];
    if (!any) return false;
  }
  return true;
}

bool Matcher::matches(const IPattern& p, const ITree& t) {
  if (!fill(p, t)) return false;
  const std::uint8_t* root = &sat_[0];
  if (!p.desc[0]) return root[0] != 0;
  return std::any_of(root, root + t.size(), [](std::uint8_t b) { return b != 0; });
}

bool Matcher::choose(const IPattern& p, const ITree& t, int v, int w, std::vector<int>& image) const {
  image[v] = w;
  for (int c : p.children[v]) {
    const std::uint8_t* crow = &sat_[static_cast<std::size_t>(c) * n_];
    int pick = -1;
    for (int x = 0; x < t.size() && pick < 0; ++x) {
      if (!crow[x]) continue;
      if (p.desc[c]) {
        for (int a = t.parent[x]; a >= 0; a = t.parent[a])
          if (a == w) {
            pick = x;
            break;
          }
      } else if (t.parent[x] == w) {
        pick = x;
      }
    }
    if (pick < 0 || !choose(p, t, c, pick, image)) return false;
  }
  return true;
}

std::optional<std::vector<int>> Matcher::embedding(const IPattern& p, const ITree& t) {
  if (!fill(p, t)) return std::nullopt;
  std::vector<int> image(p.label.size(), -1);
  for (int w = 0; w < t.size(); ++w) {
    if (!sat_[w]) continue;
    if (!p.desc[0] && w != 0) continue;
    if (choose(p, t, 0, w, image)) return image;
  }
  return std::nullopt;
}

}  // namespace xguard::kernel
