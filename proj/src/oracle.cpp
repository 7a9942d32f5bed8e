#include "xguard/oracle.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "xguard/errors.hpp"

namespace xguard {

namespace {

void check_spec(const EnumSpec& spec) {
  if (spec.alphabet.empty()) throw ContractError("enumeration alphabet is empty");
  if (spec.max_nodes == 0) throw ContractError("enumeration needs max_nodes >= 1");
}

struct Shape {
  Tree tree;
  std::size_t height;
};

void copy_into(const Tree& src, NodeId v, Tree& dst, NodeId parent) {
  NodeId id = dst.add_child(parent, src.label(v));
  for (NodeId c : src.children(v)) copy_into(src, c, dst, id);
}

// Canonical subtrees by size. Trees of size n are a root label over a
// multiset of smaller subtrees; multisets are generated as non-decreasing
// index sequences, so no two results are isomorphic.
class Enumerator {
 public:
  explicit Enumerator(const EnumSpec& spec) : spec_(spec) { by_size_.resize(spec.max_nodes + 1); }

  bool run(const std::function<bool(const Tree&)>& visit) {
    for (std::size_t n = 1; n <= spec_.max_nodes; ++n) {
      build(n);
      for (std::size_t i : by_size_[n])
        if (!visit(all_[i].tree)) return false;
    }
    return true;
  }

 private:
  void build(std::size_t n) {
    std::vector<std::size_t> pool;  // all shapes smaller than n, grouped by size
    for (std::size_t s = 1; s < n; ++s) pool.insert(pool.end(), by_size_[s].begin(), by_size_[s].end());
    std::vector<Shape> fresh;
    std::vector<std::size_t> chosen;
    for (const auto& l : spec_.alphabet) {
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t from, std::size_t budget) {
        if (budget == 0) {
          Tree t(Label::element(l));
          std::size_t h = 0;
          for (std::size_t i : chosen) {
            copy_into(all_[i].tree, 0, t, 0);
            h = std::max(h, all_[i].height + 1);
          }
          if (spec_.max_depth && h > *spec_.max_depth) return;
          fresh.push_back(Shape{canonicalize(t), h});
          return;
        }
        for (std::size_t k = from; k < pool.size(); ++k) {
          std::size_t s = all_[pool[k]].tree.size();
          if (s > budget) continue;
          chosen.push_back(pool[k]);
          rec(k, budget - s);
          chosen.pop_back();
        }
      };
      rec(0, n - 1);
    }
    std::sort(fresh.begin(), fresh.end(),
              [](const Shape& a, const Shape& b) { return to_term(a.tree) < to_term(b.tree); });
    for (auto& s : fresh) {
      by_size_[n].push_back(all_.size());
      all_.push_back(std::move(s));
    }
  }

  EnumSpec spec_;
  std::vector<Shape> all_;
  std::vector<std::vector<std::size_t>> by_size_;
};

// Euler transform: number of multisets of total weight n drawn from a(1..).
std::vector<std::uint64_t> euler(const std::vector<std::uint64_t>& a, std::size_t n) {
  std::vector<std::uint64_t> c(n + 1, 0), f(n + 1, 0);
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t d = 1; d <= j; ++d)
      if (j % d == 0) c[j] += d * a[d];
  f[0] = 1;
  for (std::size_t m = 1; m <= n; ++m) {
    std::uint64_t s = 0;
    for (std::size_t j = 1; j <= m; ++j) s += c[j] * f[m - j];
    f[m] = s / m;
  }
  return f;
}

std::vector<Forest::Set> select_all(const Forest& f, const std::vector<PathExpr>& ps) {
  std::vector<Forest::Set> out;
  for (const auto& p : ps) out.push_back(f.select(p));
  return out;
}

struct Counterexample {
  std::size_t tree;
  NodeId node;
};

std::optional<Counterexample> search(const PathExpr& p, const std::vector<PathExpr>& rights, const EnumSpec& spec,
                                     std::vector<Tree>& trees) {
  trees = enumerate_trees(spec);
  Forest f;
  for (const auto& t : trees) f.add(t);
  Forest::Set left = f.select(p);
  auto right = select_all(f, rights);
  for (std::size_t s = 0; s < left.size(); ++s) {
    if (!left[s]) continue;
    bool covered = std::any_of(right.begin(), right.end(), [&](const Forest::Set& r) { return r[s] != 0; });
    if (!covered) return Counterexample{f.tree_of(s), f.node_of(s)};
  }
  return std::nullopt;
}

bool rule_applies(const UpdateCapability& c, OpKind kind, const std::optional<Label>& payload) {
  if (c.kind != kind) return false;
  if (kind == OpKind::Delete) return true;
  return c.test && payload && c.test->matches(*payload);
}

std::vector<std::optional<Label>> payload_classes(OpKind kind, const std::set<std::string>& alphabet) {
  if (kind == OpKind::Delete) return {std::nullopt};
  std::vector<std::optional<Label>> out;
  for (const auto& a : alphabet) out.push_back(Label::element(a));
  out.push_back(Label::text(""));
  return out;
}

Forest::Set combine(const Policy& p, const Forest::Set& a, const Forest::Set& d) {
  Forest::Set out(a.size(), 0);
  const bool da = p.default_sign == Sign::Allow, ca = p.conflict == Sign::Allow;
  for (std::size_t s = 0; s < a.size(); ++s) {
    bool x = a[s], y = d[s];
    if (!da && !ca) out[s] = x && !y;
    else if (!da) out[s] = x;
    else if (!ca) out[s] = !y;
    else out[s] = !(y && !x);
  }
  return out;
}

}  // namespace

void for_each_tree(const EnumSpec& spec, const std::function<bool(const Tree&)>& visit) {
  check_spec(spec);
  Enumerator(spec).run(visit);
}

std::vector<Tree> enumerate_trees(const EnumSpec& spec) {
  std::vector<Tree> out;
  for_each_tree(spec, [&](const Tree& t) {
    out.push_back(t);
    return true;
  });
  return out;
}

std::uint64_t count_trees(const EnumSpec& spec) {
  check_spec(spec);
  const std::size_t n = spec.max_nodes;
  const std::uint64_t k = spec.alphabet.size();
  // a[h][m]: trees with m nodes and height at most h.
  const std::size_t levels = spec.max_depth ? *spec.max_depth : n;
  std::vector<std::uint64_t> a(n + 1, 0);
  a[1] = k;
  for (std::size_t h = 1; h <= levels; ++h) {
    auto f = euler(a, n);
    std::vector<std::uint64_t> next(n + 1, 0);
    for (std::size_t m = 1; m <= n; ++m) next[m] = k * f[m - 1];
    a = std::move(next);
  }
  std::uint64_t total = 0;
  for (std::size_t m = 1; m <= n; ++m) total += a[m];
  return total;
}

bool oracle_contains(const PathExpr& p, const PathExpr& p2, const EnumSpec& spec) {
  return !oracle_containment_counterexample(p, p2, spec);
}

std::optional<MarkedTree> oracle_containment_counterexample(const PathExpr& p, const PathExpr& p2,
                                                            const EnumSpec& spec) {
  return oracle_union_counterexample(p, {p2}, spec);
}

std::optional<MarkedTree> oracle_union_counterexample(const PathExpr& p, const std::vector<PathExpr>& rights,
                                                      const EnumSpec& spec) {
  std::vector<Tree> trees;
  auto c = search(p, rights, spec, trees);
  if (!c) return std::nullopt;
  return MarkedTree{trees[c->tree], c->node};
}

HomClosureOracle::HomClosureOracle(const EnumSpec& spec) : spec_(spec), trees_(enumerate_trees(spec)) {
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < trees_.size(); ++i) {
    index.emplace(to_term(trees_[i]), i);
    forest_.add(trees_[i]);
  }
  auto record = [&](std::uint32_t from, const Tree& image, const std::vector<NodeId>& map) {
    CanonicalForm cf = canonical_form(image);
    auto it = index.find(to_term(cf.tree));
    if (it == index.end()) return;  // outside the bounds
    steps_.push_back(StepEdge{from, it->second, static_cast<std::uint32_t>(maps_.size())});
    for (NodeId v : map) maps_.push_back(cf.node_map[v]);
  };
  for (std::uint32_t i = 0; i < trees_.size(); ++i) {
    const Tree& t = trees_[i];
    const std::size_t n = t.size();
    std::vector<NodeId> identity(n);
    for (NodeId v = 0; v < n; ++v) identity[v] = v;
    if (n < spec_.max_nodes) {
      for (NodeId w = 0; w < n; ++w) {
        // Adding leaves to equal subtrees gives the same image; one suffices.
        if (w > 0) {
          bool twin = false;
          for (NodeId c : t.children(t.parent(w))) {
            if (c >= w) break;
            if (subtree_term(t, c) == subtree_term(t, w)) twin = true;
          }
          if (twin) continue;
        }
        for (const auto& l : spec_.alphabet) {
          Tree grown = t;
          grown.add_child(w, Label::element(l));
          record(i, grown, identity);
        }
      }
    }
    for (NodeId u = 0; u < n; ++u) {
      auto kids = t.children(u);
      for (std::size_t x = 0; x < kids.size(); ++x) {
        for (std::size_t y = x + 1; y < kids.size(); ++y) {
          NodeId a = kids[x], b = kids[y];
          if (!(t.label(a) == t.label(b))) continue;
          // Quotient identifying b with a.
          std::vector<NodeId> map(n);
          std::vector<Label> labels;
          for (NodeId v = 0; v < n; ++v) {
            if (v == b) continue;
            map[v] = static_cast<NodeId>(labels.size());
            labels.push_back(t.label(v));
          }
          map[b] = map[a];
          std::vector<std::pair<NodeId, NodeId>> edges;
          for (NodeId v = 1; v < n; ++v)
            if (v != b) edges.emplace_back(map[t.parent(v)], map[v]);
          record(i, Tree::from_edges(std::move(labels), edges, 0), map);
        }
      }
    }
  }
}

ClosureResult HomClosureOracle::check(const Policy& p) const {
  std::vector<PathExpr> paths;
  std::vector<const UpdateCapability*> rules;
  for (const auto& c : p.allowed) rules.push_back(&c);
  for (const auto& c : p.denied) rules.push_back(&c);
  for (const auto* c : rules) paths.push_back(c->path);
  auto sets = select_all(forest_, paths);

  for (OpKind kind : {OpKind::Insert, OpKind::Update, OpKind::Delete}) {
    for (const auto& payload : payload_classes(kind, spec_.alphabet)) {
      Forest::Set a = forest_.empty_set(), d = forest_.empty_set();
      for (std::size_t r = 0; r < rules.size(); ++r) {
        if (!rule_applies(*rules[r], kind, payload)) continue;
        Forest::Set& target = r < p.allowed.size() ? a : d;
        for (std::size_t s = 0; s < target.size(); ++s) target[s] |= sets[r][s];
      }
      Forest::Set ok = combine(p, a, d);
      for (const auto& e : steps_) {
        const std::size_t n = trees_[e.from].size();
        for (NodeId v = 0; v < n; ++v) {
          if (!ok[forest_.slot(e.from, v)] || ok[forest_.slot(e.to, maps_[e.map_offset + v])]) continue;
          const Tree& from = trees_[e.from];
          const Tree& to = trees_[e.to];
          std::vector<NodeId> map(maps_.begin() + e.map_offset, maps_.begin() + e.map_offset + n);
          return ClosureResult{false, ClosureWitness{kind, payload, MarkedTree{from, v},
                                                     MarkedTree{to, map[v]}, NodeMapping{from, to, map}}};
        }
      }
    }
  }
  return ClosureResult{};
}

ClosureResult oracle_hom_closed(const Policy& p, const EnumSpec& spec) { return HomClosureOracle(spec).check(p); }

std::vector<AtomicUpdate> oracle_allowed_set(const Policy& p, const Tree& t, const std::set<std::string>& alphabet) {
  std::vector<NodeId> all(t.size());
  for (NodeId v = 0; v < t.size(); ++v) all[v] = v;
  auto selected = [&](const std::vector<const UpdateCapability*>& rs) {
    std::set<NodeId> out;
    for (const auto* c : rs)
      for (NodeId v : eval(c->path, t)) out.insert(v);
    return out;
  };
  auto minus = [](const std::set<NodeId>& x, const std::set<NodeId>& y) {
    std::set<NodeId> out;
    std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::inserter(out, out.end()));
    return out;
  };

  std::vector<AtomicUpdate> out;
  for (OpKind kind : {OpKind::Delete, OpKind::Insert, OpKind::Update}) {
    const std::set<NodeId> universe(all.begin(), all.end());
    for (const auto& payload : payload_classes(kind, alphabet)) {
      std::vector<const UpdateCapability*> ar, dr;
      for (const auto& c : p.allowed)
        if (rule_applies(c, kind, payload)) ar.push_back(&c);
      for (const auto& c : p.denied)
        if (rule_applies(c, kind, payload)) dr.push_back(&c);
      std::set<NodeId> a = selected(ar), d = selected(dr);
      std::set<NodeId> ok;
      const bool da = p.default_sign == Sign::Allow, ca = p.conflict == Sign::Allow;
      if (!da && !ca) ok = minus(a, d);
      else if (!da) ok = a;
      else if (!ca) ok = minus(universe, d);
      else ok = minus(universe, minus(d, a));
      for (NodeId v : ok) {
        if (kind == OpKind::Delete) out.push_back(delete_update(v));
        else {
          Tree payload_tree(*payload);
          out.push_back(kind == OpKind::Insert ? insert_update(v, payload_tree) : update_update(v, payload_tree));
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const AtomicUpdate& x, const AtomicUpdate& y) {
    if (x.kind != y.kind) return x.kind < y.kind;
    return x.target < y.target;
  });
  return out;
}

}  // namespace xguard
