#include <algorithm>
#include <functional>

#include "kernel.hpp"
#include "xguard/errors.hpp"
#include "xguard/policy.hpp"

namespace xguard {

namespace {

bool has_attribute_features(const UpdateCapability& c) {
  if (c.test && c.test->kind == NodeTest::Kind::AttributeName) return true;
  FragmentId f = fragment_of(c.path);
  if (f.has(FragmentId::AttrEquality) || f.has(FragmentId::AttributeAxis)) return true;
  bool attr_test = false;
  std::function<void(const PathExpr&)> scan;
  std::function<void(const FilterExpr&)> scan_filter = [&](const FilterExpr& q) {
    if (auto* e = std::get_if<Exists>(&q.node)) scan(*e->path);
    if (auto* a = std::get_if<And>(&q.node)) {
      scan_filter(*a->left);
      scan_filter(*a->right);
    }
  };
  scan = [&](const PathExpr& p) {
    if (auto* s = std::get_if<Step>(&p.node)) attr_test = attr_test || s->test.kind == NodeTest::Kind::AttributeName;
    if (auto* q = std::get_if<Seq>(&p.node)) {
      scan(*q->head);
      scan(*q->tail);
    }
    if (auto* f2 = std::get_if<Filtered>(&p.node)) {
      scan(*f2->path);
      scan_filter(*f2->cond);
    }
  };
  scan(c.path);
  return attr_test;
}

void require_capability(const UpdateCapability& c, const std::string& purpose) {
  if (has_attribute_features(c)) throw UnsupportedFragment("attribute rules unsupported for " + purpose);
  if (!is_pattern_path(c.path))
    throw UnsupportedFragment("path '" + to_string(c.path) + "' is outside XP(/,//,*,[ ]) (self or text() steps)");
}

// Copies a pattern subtree as a concrete subtree, wildcards as `z`.
void graft_instance(const TreePattern& p, NodeId v, NodeId parent, const std::string& z, Tree& out) {
  const auto& n = p.nodes[v];
  NodeId id = out.add_child(parent, Label::element(n.label ? *n.label : z));
  for (NodeId c : n.children) graft_instance(p, c, id, z, out);
}

// (T, n) and T' where T' extends a copy of T; the mapping is inclusion.
FairnessCounterexample make_counterexample(const MarkedTree& small, const Tree& large, std::vector<PolicyRule> rules,
                                           OpKind kind, const std::optional<Label>& payload) {
  CanonicalForm cs = canonical_form(small.tree);
  CanonicalForm cl = canonical_form(large);
  NodeMapping mapping{cs.tree, cl.tree, std::vector<NodeId>(small.tree.size())};
  for (NodeId v = 0; v < small.tree.size(); ++v) mapping.map[cs.node_map[v]] = cl.node_map[v];
  return FairnessCounterexample{kind,
                                payload,
                                MarkedTree{cs.tree, cs.node_map[small.mark]},
                                MarkedTree{cl.tree, cl.node_map[small.mark]},
                                std::move(mapping),
                                std::move(rules)};
}

// T plus the side branches of `d`, hung below the embedding of d's spine.
Tree add_filters(const MarkedTree& t, const TreePattern& d, const std::string& z) {
  TreePattern spine = spine_of(d);
  auto emb = find_embedding(spine, t);
  if (!emb) throw ContractError("internal: spine does not embed into the witness");
  Tree out = t.tree;
  auto s = d.spine();
  for (std::size_t i = 0; i < s.size(); ++i) {
    NodeId next = i + 1 < s.size() ? s[i + 1] : kNoNode;
    for (NodeId c : d.nodes[s[i]].children)
      if (c != next) graft_instance(d, c, (*emb)[i], z, out);
  }
  return out;
}

std::size_t size_of(const FairnessCounterexample& c) { return c.allowed_tree.tree.size() + c.denied_tree.tree.size(); }

std::uint64_t power(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out = out > (~0ull) / base ? ~0ull : out * base;
  return out;
}

}  // namespace

PolicyAnalyzer::PolicyAnalyzer(Policy policy, AnalysisBudget budget) : policy_(std::move(policy)), budget_(budget) {
  auto add = [&](bool allow, const std::vector<UpdateCapability>& caps) {
    for (std::size_t i = 0; i < caps.size(); ++i) {
      Rule r{allow, i, std::nullopt};
      if (is_pattern_path(caps[i].path)) r.pattern = path_to_pattern(caps[i].path);
      auto l = labels(caps[i].path);
      labels_.insert(l.begin(), l.end());
      if (caps[i].test && caps[i].test->is_element()) labels_.insert(caps[i].test->name);
      rules_.push_back(std::move(r));
    }
  };
  add(true, policy_.allowed);
  add(false, policy_.denied);
}

const UpdateCapability& PolicyAnalyzer::cap(const Rule& r) const {
  return r.allow ? policy_.allowed[r.index] : policy_.denied[r.index];
}

void PolicyAnalyzer::require_analyzable(const std::string& purpose) const {
  for (const auto& r : rules_) require_capability(cap(r), purpose);
}

std::vector<PolicyAnalyzer::PayloadClass> PolicyAnalyzer::classes_for(OpKind kind,
                                                                      const std::optional<NodeTest>& test) const {
  if (kind == OpKind::Delete) return {PayloadClass{std::nullopt}};
  if (!test) throw ContractError(to_string(kind) + " capability needs a node test");
  switch (test->kind) {
    case NodeTest::Kind::ElementName: return {PayloadClass{Label::element(test->name)}};
    case NodeTest::Kind::Text: return {PayloadClass{Label::text("")}};
    case NodeTest::Kind::AttributeName: throw UnsupportedFragment("attribute node tests unsupported");
    case NodeTest::Kind::Wildcard: break;
  }
  // One class per element name tested by a rule of this kind, plus one for
  // every other element name.
  std::set<std::string> named;
  for (const auto& r : rules_) {
    const auto& c = cap(r);
    if (c.kind == kind && c.test && c.test->is_element()) named.insert(c.test->name);
  }
  std::vector<PayloadClass> out;
  for (const auto& n : named) out.push_back(PayloadClass{Label::element(n)});
  std::set<std::string> used = labels_;
  used.insert(named.begin(), named.end());
  out.push_back(PayloadClass{Label::element(fresh_label(used))});
  return out;
}

std::vector<const PolicyAnalyzer::Rule*> PolicyAnalyzer::applicable(OpKind kind, const PayloadClass& x,
                                                                    bool allow) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules_) {
    const auto& c = cap(r);
    if (r.allow != allow || c.kind != kind) continue;
    if (kind != OpKind::Delete && !(c.test && x.label && c.test->matches(*x.label))) continue;
    out.push_back(&r);
  }
  return out;
}

std::size_t PolicyAnalyzer::bound() const {
  std::size_t w = 0;
  std::vector<std::size_t> a, d;
  for (const auto& r : rules_) {
    w = std::max(w, star_length(cap(r).path));
    (r.allow ? a : d).push_back(step_count(cap(r).path));
  }
  if (policy_.default_sign == Sign::Allow) a.push_back(1);  // the universal path //*
  std::size_t b = 0;
  for (auto x : a)
    for (auto y : d) b = std::max(b, (x + y) * (w + 1));
  return b;
}

StaticDecision PolicyAnalyzer::check_static(const UpdateCapability& c) const {
  require_capability(c, "static analysis");
  for (const auto& r : rules_)
    if (cap(r).kind == c.kind) require_capability(cap(r), "static analysis");
  const TreePattern p = path_to_pattern(c.path);
  const bool default_allow = policy_.default_sign == Sign::Allow;
  const bool conflict_allow = policy_.conflict == Sign::Allow;

  StaticDecision out;
  auto deny = [&](std::string reason, std::optional<MarkedTree> witness, const Rule* blocking) {
    out.allowed = false;
    out.reason = std::move(reason);
    out.witness = std::move(witness);
    if (blocking) out.blocking_rule = cap(*blocking);
    return out;
  };
  auto patterns = [](const std::vector<const Rule*>& rs) {
    std::vector<TreePattern> v;
    for (const Rule* r : rs) v.push_back(*r->pattern);
    return v;
  };

  for (const auto& x : classes_for(c.kind, c.test)) {
    auto allow_rules = applicable(c.kind, x, true);
    auto deny_rules = applicable(c.kind, x, false);
    auto allow_patterns = patterns(allow_rules);
    std::string suffix = x.label ? " (payload " + to_string(*x.label) + ")" : "";
    if (x.label && x.label->is_text()) suffix = " (payload text())";

    if (!default_allow) {
      if (allow_patterns.empty())
        return deny("no allow rule applies" + suffix, canonicalize(instantiate(p, fresh_label(labels_))), nullptr);
      auto r = check_union_containment(p, allow_patterns, budget_, labels_);
      out.instances_explored += r.instances_explored;
      if (!r.contained) return deny("not contained in the allow rules" + suffix, r.counterexample, nullptr);
      if (conflict_allow) continue;  // (-,+)
    }
    if (!default_allow || !conflict_allow) {
      // (-,-) and (+,-): disjoint from every deny rule.
      for (const Rule* d : deny_rules) {
        auto w = overlaps(p, *d->pattern);
        if (w) return deny("overlaps a deny rule" + suffix, w, d);
      }
      continue;
    }
    // (+,+): every overlap with a deny rule must be re-allowed.
    for (const Rule* d : deny_rules) {
      for (const auto& m : merge_patterns(p, *d->pattern)) {
        if (allow_patterns.empty())
          return deny("overlaps a deny rule not covered by allow rules" + suffix,
                      canonicalize(instantiate(m, fresh_label(labels_))), d);
        auto r = check_union_containment(m, allow_patterns, budget_, labels_);
        out.instances_explored += r.instances_explored;
        if (!r.contained) return deny("overlaps a deny rule not covered by allow rules" + suffix, r.counterexample, d);
      }
    }
  }
  out.allowed = true;
  out.reason = "statically allowed";
  return out;
}

FairnessVerdict PolicyAnalyzer::check_fairness(FragmentId fragment, const FairnessOptions& options) const {
  if (fragment != FragmentId::linear() && fragment != FragmentId::filter_paths())
    throw UnsupportedFragment("fairness is decided only with respect to XP(/) and XP(/,[ ]); got " +
                              fragment.to_string());
  require_analyzable("fairness");
  bool all_filter_free = true, deny_filter_free = true;
  for (const auto& r : rules_) {
    bool ff = !fragment_of(cap(r).path).has(FragmentId::Filter);
    all_filter_free = all_filter_free && ff;
    if (!r.allow) deny_filter_free = deny_filter_free && ff;
  }
  FairnessVerdict v;
  v.bound = bound();
  if (fragment == FragmentId::linear() && !all_filter_free)
    throw UnsupportedFragment("fairness with respect to XP(/) needs a policy in XP(/,//,*)");
  if (!options.force_search && (fragment == FragmentId::linear() || deny_filter_free)) {
    v.fair = true;
    v.reason = FairnessVerdict::Reason::Syntactic;
    return v;
  }
  v.reason = FairnessVerdict::Reason::SearchExhausted;

  const bool default_allow = policy_.default_sign == Sign::Allow;
  const bool conflict_allow = policy_.conflict == Sign::Allow;
  if (!default_allow && conflict_allow) return v;  // the allowed set is a union of paths

  const std::string z = fresh_label(labels_);
  std::optional<FairnessCounterexample> best;
  auto offer = [&](FairnessCounterexample c) {
    if (!best || size_of(c) < size_of(*best)) best = std::move(c);
  };
  auto patterns = [](const std::vector<const Rule*>& rs) {
    std::vector<TreePattern> out;
    for (const Rule* r : rs) out.push_back(*r->pattern);
    return out;
  };

  for (OpKind kind : {OpKind::Insert, OpKind::Update, OpKind::Delete}) {
    bool present = std::any_of(rules_.begin(), rules_.end(), [&](const Rule& r) { return cap(r).kind == kind; });
    if (!present) continue;
    std::vector<PayloadClass> classes;
    if (kind == OpKind::Delete) {
      classes.push_back(PayloadClass{std::nullopt});
    } else {
      classes = classes_for(kind, NodeTest::wildcard());
      classes.push_back(PayloadClass{Label::text("")});
    }
    for (const auto& x : classes) {
      auto allow_rules = applicable(kind, x, true);
      auto deny_rules = applicable(kind, x, false);
      if (deny_rules.empty()) continue;
      auto deny_patterns = patterns(deny_rules);
      auto allow_patterns = patterns(allow_rules);

      if (!default_allow) {
        // (-,-): an allowed tree whose image gains a deny filter.
        for (const Rule* a : allow_rules) {
          for (const Rule* d : deny_rules) {
            for (const auto& m : merge_patterns(*a->pattern, spine_of(*d->pattern))) {
              auto r = check_union_containment(m, deny_patterns, budget_, labels_);
              v.instances_explored += r.instances_explored;
              if (r.contained) continue;
              Tree large = add_filters(*r.counterexample, *d->pattern, r.fresh);
              offer(make_counterexample(*r.counterexample, large, {PolicyRule{Sign::Allow, cap(*a)}, PolicyRule{Sign::Deny, cap(*d)}}, kind, x.label));
              break;
            }
          }
        }
      } else if (!conflict_allow) {
        // (+,-): a linear tree outside every deny rule that grows into one.
        for (const Rule* d : deny_rules) {
          auto r = check_union_containment(spine_of(*d->pattern), deny_patterns, budget_, labels_);
          v.instances_explored += r.instances_explored;
          if (r.contained) continue;
          Tree large = add_filters(*r.counterexample, *d->pattern, r.fresh);
          offer(make_counterexample(*r.counterexample, large, {PolicyRule{Sign::Deny, cap(*d)}}, kind, x.label));
        }
      } else {
        // (+,+): a denied, not re-allowed instance whose spine is not denied.
        kernel::Symbols symbols;
        std::vector<kernel::IPattern> ia, id;
        std::size_t w = budget_.star_bound.value_or(0);
        for (const auto& p : allow_patterns) {
          ia.push_back(kernel::intern(p, symbols));
          w = std::max(w, p.star_chain());
        }
        for (const auto& p : deny_patterns) {
          id.push_back(kernel::intern(p, symbols));
          w = std::max(w, p.star_chain());
        }
        const int zid = symbols.id(z);
        kernel::Matcher m;
        kernel::ITree inst, spine;
        for (std::size_t di = 0; di < deny_rules.size(); ++di) {
          const kernel::IPattern& dp = id[di];
          const std::size_t arity = dp.desc_edges.size();
          const std::uint64_t needed = power(w + 2, arity);
          if (needed > budget_.max_expansions)
            throw ResourceError("fairness search needs (W+2)^d extensions", needed, budget_.max_expansions);
          for_each_extension(arity, w + 1, [&](const Extension& e) {
            ++v.instances_explored;
            kernel::instantiate(dp, e.lengths, zid, inst);
            for (const auto& a : ia)
              if (m.matches(a, inst)) return true;
            spine.clear();
            std::vector<int> path;
            for (int x2 = inst.mark; x2 >= 0; x2 = inst.parent[x2]) path.push_back(x2);
            std::reverse(path.begin(), path.end());
            for (std::size_t i = 0; i < path.size(); ++i)
              spine.add(static_cast<int>(i) - 1, inst.label[path[i]]);
            spine.mark = static_cast<int>(path.size()) - 1;
            for (const auto& d : id)
              if (m.matches(d, spine)) return true;
            // Re-number the instance so that the spine comes first.
            MarkedTree small = kernel::to_marked_tree(spine, symbols);
            MarkedTree full = kernel::to_marked_tree(inst, symbols);
            std::vector<NodeId> order(path.begin(), path.end());
            std::vector<char> on(inst.size(), 0);
            for (int x2 : path) on[x2] = 1;
            for (int x2 = 0; x2 < inst.size(); ++x2)
              if (!on[x2]) order.push_back(static_cast<NodeId>(x2));
            std::vector<NodeId> pos(inst.size());
            for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<NodeId>(i);
            std::vector<Label> labs(inst.size());
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (int x2 = 0; x2 < inst.size(); ++x2) {
              labs[pos[x2]] = full.tree.label(static_cast<NodeId>(x2));
              if (inst.parent[x2] >= 0) edges.emplace_back(pos[inst.parent[x2]], pos[x2]);
            }
            Tree large = Tree::from_edges(std::move(labs), edges, pos[0]);
            offer(make_counterexample(small, large, {PolicyRule{Sign::Deny, cap(*deny_rules[di])}}, kind, x.label));
            return false;
          });
        }
      }
    }
  }
  if (best) {
    v.fair = false;
    v.counterexample = std::move(best);
  }
  return v;
}

StaticDecision check_static(const Policy& p, const UpdateCapability& c, const AnalysisBudget& budget) {
  return PolicyAnalyzer(p, budget).check_static(c);
}

bool statically_allowed(const Policy& p, const UpdateCapability& c, const AnalysisBudget& budget) {
  return check_static(p, c, budget).allowed;
}

FairnessVerdict check_fairness(const Policy& p, FragmentId fragment, const AnalysisBudget& budget,
                               const FairnessOptions& options) {
  return PolicyAnalyzer(p, budget).check_fairness(fragment, options);
}

std::optional<UpdateCapability> find_covering_capability(const PolicyAnalyzer& analyzer, const AtomicUpdate& u,
                                                         const Tree& t, FragmentId fragment) {
  if (fragment != FragmentId::linear() && fragment != FragmentId::filter_paths())
    throw UnsupportedFragment("covering capabilities are built only in XP(/) and XP(/,[ ])");
  if (!dynamically_allowed(analyzer.policy(), u, t)) throw ContractError("the update is not dynamically allowed");
  if (!t.label(u.target).is_element()) return std::nullopt;
  MarkedTree at{t, u.target};
  UpdateCapability c;
  c.kind = u.kind;
  c.path = fragment == FragmentId::filter_paths() ? filter_path_of(at) : linear_path_of(at);
  if (u.kind != OpKind::Delete) {
    const Label& root = u.payload->label(u.payload->root());
    if (root.is_element()) c.test = NodeTest::element(root.name);
    else if (root.is_text()) c.test = NodeTest::text();
    else return std::nullopt;
  }
  if (analyzer.check_static(c).allowed) return c;
  return std::nullopt;
}

std::optional<UpdateCapability> find_covering_capability(const Policy& p, const AtomicUpdate& u, const Tree& t,
                                                         FragmentId fragment, const AnalysisBudget& budget) {
  return find_covering_capability(PolicyAnalyzer(p, budget), u, t, fragment);
}

}  // namespace xguard
