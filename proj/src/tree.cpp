#include "xguard/tree.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "xguard/errors.hpp"

namespace xguard {

Label Label::element(std::string name) { return Label{LabelKind::Element, std::move(name), {}}; }

Label Label::attribute(std::string name, std::string value) {
  return Label{LabelKind::Attribute, std::move(name), std::move(value)};
}

Label Label::text(std::string value) { return Label{LabelKind::Text, {}, std::move(value)}; }

namespace {

std::string quote(const std::string& value) {
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_string(const Label& label) {
  switch (label.kind) {
    case LabelKind::Element: return label.name;
    case LabelKind::Attribute: return "@" + label.name + "=" + quote(label.value);
    case LabelKind::Text: return quote(label.value);
  }
  return {};
}

Tree::Tree(Label root_label) {
  labels_.push_back(std::move(root_label));
  parent_.push_back(kNoNode);
  children_.emplace_back();
}

void Tree::check_attach(NodeId parent, const Label& label) const {
  if (!contains(parent)) throw ContractError("parent node " + std::to_string(parent) + " does not exist");
  if (!labels_[parent].is_element())
    throw StructuralError("attribute and text nodes cannot have children");
  if (label.is_attribute()) {
    for (NodeId c : children_[parent]) {
      if (labels_[c].is_attribute() && labels_[c].name == label.name)
        throw StructuralError("duplicate attribute '" + label.name + "' on one element");
    }
  }
}

NodeId Tree::add_child(NodeId parent, Label label) {
  check_attach(parent, label);
  auto id = static_cast<NodeId>(labels_.size());
  labels_.push_back(std::move(label));
  parent_.push_back(parent);
  children_.emplace_back();
  children_[parent].push_back(id);
  return id;
}

Tree Tree::from_edges(std::vector<Label> labels,
                      const std::vector<std::pair<NodeId, NodeId>>& edges, NodeId root) {
  const std::size_t n = labels.size();
  if (n == 0) throw StructuralError("a tree needs at least one node");
  if (root >= n) throw StructuralError("root is not a node");
  Tree t;
  t.labels_ = std::move(labels);
  t.parent_.assign(n, kNoNode);
  t.children_.assign(n, {});
  t.root_ = root;
  for (auto [p, c] : edges) {
    if (p >= n || c >= n) throw StructuralError("edge refers to an unknown node");
    if (c == root) throw StructuralError("the root cannot have a parent");
    if (t.parent_[c] != kNoNode) throw StructuralError("node " + std::to_string(c) + " has two parents");
    t.parent_[c] = p;
    t.children_[p].push_back(c);
  }
  // Reachability from the root rules out cycles among the remaining nodes.
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{root};
  std::size_t reached = 0;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (seen[v]) throw StructuralError("cycle through node " + std::to_string(v));
    seen[v] = 1;
    ++reached;
    for (NodeId c : t.children_[v]) stack.push_back(c);
  }
  if (reached != n) throw StructuralError("edges do not form a tree (cycle or disconnected node)");
  for (NodeId v = 0; v < n; ++v) {
    if (!t.children_[v].empty() && !t.labels_[v].is_element())
      throw StructuralError("attribute and text nodes cannot have children");
    std::set<std::string> attrs;
    for (NodeId c : t.children_[v]) {
      if (t.labels_[c].is_attribute() && !attrs.insert(t.labels_[c].name).second)
        throw StructuralError("duplicate attribute '" + t.labels_[c].name + "' on one element");
    }
  }
  return t;
}

std::size_t Tree::depth(NodeId n) const {
  std::size_t d = 0;
  for (NodeId v = parent_.at(n); v != kNoNode; v = parent_[v]) ++d;
  return d;
}

std::vector<NodeId> Tree::path_from_root(NodeId n) const {
  std::vector<NodeId> path;
  for (NodeId v = n; v != kNoNode; v = parent_.at(v)) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

bool Tree::is_ancestor(NodeId ancestor, NodeId n) const {
  for (NodeId v = parent_.at(n); v != kNoNode; v = parent_[v])
    if (v == ancestor) return true;
  return false;
}

std::set<std::string> Tree::element_names() const {
  std::set<std::string> out;
  for (const auto& l : labels_)
    if (l.is_element()) out.insert(l.name);
  return out;
}

namespace {

struct Canonicalizer {
  const Tree& t;
  std::vector<std::string> term;
  std::vector<std::vector<NodeId>> sorted;

  explicit Canonicalizer(const Tree& tree) : t(tree), term(tree.size()), sorted(tree.size()) {
    // Post-order without recursion depth limits.
    std::vector<std::pair<NodeId, bool>> stack{{t.root(), false}};
    while (!stack.empty()) {
      auto [v, done] = stack.back();
      stack.pop_back();
      if (!done) {
        stack.push_back({v, true});
        for (NodeId c : t.children(v)) stack.push_back({c, false});
        continue;
      }
      auto& kids = sorted[v];
      kids.assign(t.children(v).begin(), t.children(v).end());
      std::sort(kids.begin(), kids.end(), [&](NodeId a, NodeId b) {
        const Label& la = t.label(a);
        const Label& lb = t.label(b);
        if (auto c = la <=> lb; c != 0) return c < 0;
        return term[a] < term[b];
      });
      std::string s = to_string(t.label(v));
      if (!kids.empty()) {
        s += '(';
        for (std::size_t i = 0; i < kids.size(); ++i) {
          if (i) s += ',';
          s += term[kids[i]];
        }
        s += ')';
      }
      term[v] = std::move(s);
    }
  }
};

}  // namespace

CanonicalForm canonical_form(const Tree& t) {
  Canonicalizer c(t);
  std::vector<Label> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<NodeId> map(t.size(), kNoNode);
  std::vector<NodeId> stack{t.root()};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    auto id = static_cast<NodeId>(labels.size());
    map[v] = id;
    labels.push_back(t.label(v));
    if (v != t.root()) edges.emplace_back(map[t.parent(v)], id);
    const auto& kids = c.sorted[v];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return CanonicalForm{Tree::from_edges(std::move(labels), edges, 0), std::move(map)};
}

Tree canonicalize(const Tree& t) { return canonical_form(t).tree; }

bool is_canonical(const Tree& t) {
  if (t.root() != 0) return false;
  CanonicalForm cf = canonical_form(t);
  for (NodeId v = 0; v < cf.node_map.size(); ++v)
    if (cf.node_map[v] != v) return false;
  return true;
}

std::string to_term(const Tree& t) { return Canonicalizer(t).term[t.root()]; }

std::string subtree_term(const Tree& t, NodeId n) { return Canonicalizer(t).term.at(n); }

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view text) : s_(text) {}

  Tree parse() {
    skip_ws();
    Label root = parse_label();
    Tree t(root);
    if (root.is_element()) parse_children(t, t.root());
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  static bool name_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
  static bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9'); }

  std::string parse_name() {
    if (pos_ >= s_.size() || !name_start(s_[pos_])) fail("expected a name");
    std::size_t start = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string parse_string() {
    if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected a string");
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += c;
      }
    }
    return out;
  }

  Label parse_label() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '@') {
      ++pos_;
      std::string name = parse_name();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '='");
      ++pos_;
      skip_ws();
      return Label::attribute(std::move(name), parse_string());
    }
    if (pos_ < s_.size() && s_[pos_] == '"') return Label::text(parse_string());
    return Label::element(parse_name());
  }

  void parse_children(Tree& t, NodeId parent) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '(') return;
    ++pos_;
    while (true) {
      std::size_t at = pos_;
      Label l = parse_label();
      NodeId c;
      try {
        c = t.add_child(parent, l);
      } catch (const StructuralError& e) {
        throw SyntaxError(e.what(), at);
      }
      if (l.is_element()) parse_children(t, c);
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < s_.size() && s_[pos_] == ')') {
        ++pos_;
        return;
      }
      fail("expected ',' or ')'");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Tree parse_tree(std::string_view text) { return TermParser(text).parse(); }

bool isomorphic(const Tree& a, const Tree& b) {
  return a.size() == b.size() && to_term(a) == to_term(b);
}

namespace {

std::string segment(const Tree& t, NodeId v) {
  const Label& l = t.label(v);
  if (l.is_attribute()) return "@" + l.name;
  std::size_t index = 1;
  if (v != t.root()) {
    for (NodeId s : t.children(t.parent(v))) {
      if (s == v) break;
      const Label& ls = t.label(s);
      if (ls.kind == l.kind && ls.name == l.name) ++index;
    }
  }
  std::string base = l.is_text() ? "text()" : l.name;
  return base + "[" + std::to_string(index) + "]";
}

}  // namespace

std::string node_path(const Tree& t, NodeId n) {
  if (!t.contains(n)) throw ContractError("node " + std::to_string(n) + " is not in the tree");
  CanonicalForm cf = canonical_form(t);
  std::string out;
  for (NodeId v : cf.tree.path_from_root(cf.node_map[n])) out += "/" + segment(cf.tree, v);
  return out;
}

NodeId resolve_node_path(const Tree& t, std::string_view path) {
  CanonicalForm cf = canonical_form(t);
  const Tree& c = cf.tree;
  auto fail = [&](const std::string& why) -> NodeId {
    throw ContractError("cannot resolve node path '" + std::string(path) + "': " + why);
  };
  if (path.empty() || path[0] != '/') return fail("must start with '/'");
  NodeId current = kNoNode;
  std::size_t pos = 1;
  while (pos <= path.size()) {
    std::size_t end = path.find('/', pos);
    if (end == std::string_view::npos) end = path.size();
    std::string_view seg = path.substr(pos, end - pos);
    if (seg.empty()) return fail("empty segment");
    Label want;
    std::size_t index = 1;
    if (seg[0] == '@') {
      want = Label::attribute(std::string(seg.substr(1)), {});
    } else {
      std::size_t br = seg.find('[');
      if (br == std::string_view::npos || seg.back() != ']') return fail("segment needs an index");
      std::string_view base = seg.substr(0, br);
      std::string idx(seg.substr(br + 1, seg.size() - br - 2));
      if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        return fail("bad index");
      index = std::stoul(idx);
      want = base == "text()" ? Label::text({}) : Label::element(std::string(base));
    }
    NodeId found = kNoNode;
    if (current == kNoNode) {
      const Label& rl = c.label(c.root());
      if (rl.kind == want.kind && rl.name == want.name && index == 1) found = c.root();
    } else {
      std::size_t seen = 0;
      for (NodeId ch : c.children(current)) {
        const Label& l = c.label(ch);
        if (l.kind == want.kind && l.name == want.name && ++seen == index) {
          found = ch;
          break;
        }
      }
    }
    if (found == kNoNode) return fail("no node matches '" + std::string(seg) + "'");
    current = found;
    pos = end + 1;
  }
  for (NodeId v = 0; v < cf.node_map.size(); ++v)
    if (cf.node_map[v] == current) return v;
  return fail("internal mapping error");
}

MarkedTree canonicalize(const MarkedTree& t) {
  CanonicalForm cf = canonical_form(t.tree);
  return MarkedTree{std::move(cf.tree), cf.node_map.at(t.mark)};
}

std::string to_string(const MarkedTree& t) { return to_term(t.tree) + " @ " + node_path(t.tree, t.mark); }

bool operator==(const MarkedTree& a, const MarkedTree& b) {
  return a.tree.size() == b.tree.size() && to_string(a) == to_string(b);
}

bool is_homomorphism(const NodeMapping& h) {
  const Tree& s = h.source;
  const Tree& d = h.target;
  if (h.map.size() != s.size()) throw ContractError("node mapping is not total on the source tree");
  for (NodeId m : h.map)
    if (!d.contains(m)) throw ContractError("node mapping points outside the target tree");
  if (h.map[s.root()] != d.root()) return false;
  for (NodeId v = 0; v < s.size(); ++v) {
    if (s.label(v) != d.label(h.map[v])) return false;
    if (v != s.root() && d.parent(h.map[v]) != h.map[s.parent(v)]) return false;
  }
  return true;
}

namespace {

std::vector<NodeId> preorder(const Tree& t) {
  std::vector<NodeId> order;
  std::vector<NodeId> stack{t.root()};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    auto kids = t.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

// Nodes of the marked branch, mapped to the required image for that depth.
std::vector<NodeId> forced_images(const MarkedTree& src, const MarkedTree& dst) {
  std::vector<NodeId> forced(src.tree.size(), kNoNode);
  auto sp = src.tree.path_from_root(src.mark);
  auto dp = dst.tree.path_from_root(dst.mark);
  if (sp.size() != dp.size()) return {};
  for (std::size_t i = 0; i < sp.size(); ++i) forced[sp[i]] = dp[i];
  return forced;
}

}  // namespace

std::vector<NodeMapping> marked_homomorphisms(const MarkedTree& src, const MarkedTree& dst) {
  if (!src.tree.contains(src.mark) || !dst.tree.contains(dst.mark))
    throw ContractError("mark is not a node of its tree");
  std::vector<NodeMapping> out;
  auto forced = forced_images(src, dst);
  if (forced.empty()) return out;
  const Tree& s = src.tree;
  const Tree& d = dst.tree;
  auto order = preorder(s);
  std::vector<NodeId> map(s.size(), kNoNode);
  std::function<void(std::size_t)> extend = [&](std::size_t i) {
    if (i == order.size()) {
      out.push_back(NodeMapping{s, d, map});
      return;
    }
    NodeId v = order[i];
    auto try_image = [&](NodeId w) {
      if (forced[v] != kNoNode && forced[v] != w) return;
      if (s.label(v) != d.label(w)) return;
      map[v] = w;
      extend(i + 1);
      map[v] = kNoNode;
    };
    if (v == s.root()) {
      try_image(d.root());
    } else {
      for (NodeId w : d.children(map[s.parent(v)])) try_image(w);
    }
  };
  extend(0);
  return out;
}

bool has_marked_homomorphism(const MarkedTree& src, const MarkedTree& dst) {
  auto forced = forced_images(src, dst);
  if (forced.empty()) return false;
  const Tree& s = src.tree;
  const Tree& d = dst.tree;
  std::vector<std::vector<signed char>> memo(s.size(), std::vector<signed char>(d.size(), -1));
  std::function<bool(NodeId, NodeId)> can = [&](NodeId v, NodeId w) -> bool {
    if (forced[v] != kNoNode && forced[v] != w) return false;
    auto& m = memo[v][w];
    if (m >= 0) return m;
    bool ok = s.label(v) == d.label(w);
    for (NodeId c : s.children(v)) {
      if (!ok) break;
      ok = std::any_of(d.children(w).begin(), d.children(w).end(), [&](NodeId x) { return can(c, x); });
    }
    m = ok;
    return ok;
  };
  return can(s.root(), d.root());
}

NodeMapping compose(const NodeMapping& second, const NodeMapping& first) {
  if (first.map.size() != first.source.size() || second.map.size() != second.source.size())
    throw ContractError("node mapping is not total on the source tree");
  if (first.target.size() != second.source.size())
    throw ContractError("mappings are not composable");
  NodeMapping out{first.source, second.target, std::vector<NodeId>(first.map.size())};
  for (std::size_t v = 0; v < first.map.size(); ++v) out.map[v] = second.map.at(first.map[v]);
  return out;
}

const std::string& Relabeling::operator()(const std::string& name) const {
  auto it = table_.find(name);
  return it == table_.end() ? name : it->second;
}

bool Relabeling::fixes(const std::set<std::string>& names) const {
  return std::all_of(names.begin(), names.end(), [&](const std::string& n) { return (*this)(n) == n; });
}

Tree apply_relabeling(const Relabeling& r, const Tree& t) {
  std::vector<Label> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId v = 0; v < t.size(); ++v) {
    Label l = t.label(v);
    if (l.is_element()) l.name = r(l.name);
    labels.push_back(std::move(l));
    if (v != t.root()) edges.emplace_back(t.parent(v), v);
  }
  return Tree::from_edges(std::move(labels), edges, t.root());
}

}  // namespace xguard
