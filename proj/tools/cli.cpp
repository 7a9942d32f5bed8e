#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xguard/analysis.hpp"
#include "xguard/errors.hpp"
#include "xguard/oracle.hpp"
#include "xguard/policy.hpp"

namespace xguard::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  bool json = false;
  bool timing = false;
  std::uint64_t max_expansions = AnalysisBudget{}.max_expansions;
  std::size_t max_nodes = 0;
  std::string fragment = "filter";
  unsigned threads = 1;
};

// answer + witness + stats; text lines mirror the JSON fields in order.
struct Verdict {
  bool yes = false;
  Json witness;  // null when absent
  Json stats = Json::object();
  std::vector<std::string> lines;  // human-readable body after the answer
  bool bare = false;               // listing commands print only `lines`
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

Tree read_tree(const std::string& path) { return parse_tree(trim(read_file(path))); }
Policy read_policy(const std::string& path) { return parse_policy(read_file(path)); }

FragmentId parse_fragment(const std::string& name) {
  if (name == "linear") return FragmentId::linear();
  if (name == "filter") return FragmentId::filter_paths();
  throw Error("unknown fragment '" + name + "' (expected linear or filter)");
}

AnalysisBudget budget_of(const Options& o) {
  AnalysisBudget b;
  b.max_expansions = o.max_expansions;
  b.size_bound = o.max_nodes;
  b.threads = std::max(1u, o.threads);
  return b;
}

Json marked_json(const MarkedTree& t) { return Json{{"tree", to_term(t.tree)}, {"mark", node_path(t.tree, t.mark)}}; }

std::set<std::string> policy_labels(const Policy& p) {
  std::set<std::string> out;
  for (const auto* rules : {&p.allowed, &p.denied}) {
    for (const auto& r : *rules) {
      auto l = labels(r.path);
      out.insert(l.begin(), l.end());
      if (r.test && r.test->is_element()) out.insert(r.test->name);
    }
  }
  return out;
}

std::size_t oracle_nodes(const Options& o) { return o.max_nodes ? o.max_nodes : 5; }

Verdict containment_verdict(const UnionContainmentResult& r) {
  Verdict v;
  v.yes = r.contained;
  if (r.counterexample) {
    v.witness = marked_json(*r.counterexample);
    v.lines.push_back("witness: " + to_string(*r.counterexample));
  }
  v.stats["instances-explored"] = r.instances_explored;
  v.stats["bound-used"] = r.star_bound;
  return v;
}

Verdict cmd_contains(const std::vector<std::string>& paths, const Options& o) {
  ContainmentProblem prob{parse_path(paths[0]), {}};
  for (std::size_t i = 1; i < paths.size(); ++i) prob.rights.push_back(parse_path(paths[i]));
  return containment_verdict(check_union_containment(prob, budget_of(o)));
}

Verdict cmd_overlaps(const std::string& p, const std::string& q, const Options& o) {
  auto w = overlaps(parse_path(p), parse_path(q), budget_of(o));
  Verdict v;
  v.yes = w.has_value();
  if (w) {
    v.witness = marked_json(*w);
    v.lines.push_back("witness: " + to_string(*w));
  }
  return v;
}

Verdict cmd_fairness(const std::string& file, bool force, const Options& o) {
  Policy p = read_policy(file);
  FairnessOptions fo;
  fo.force_search = force;
  auto r = check_fairness(p, parse_fragment(o.fragment), budget_of(o), fo);
  Verdict v;
  v.yes = r.fair;
  if (r.fair) {
    std::string reason = r.reason == FairnessVerdict::Reason::Syntactic ? "syntactic" : "search-exhausted";
    v.lines.push_back("reason: " + reason);
    v.lines.push_back("bound: " + std::to_string(r.bound));
    v.stats["reason"] = reason;
  } else {
    const auto& c = *r.counterexample;
    Json mapping = Json::array();
    std::string text;
    for (NodeId n = 0; n < c.mapping.map.size(); ++n) {
      std::string from = node_path(c.mapping.source, n), to = node_path(c.mapping.target, c.mapping.map[n]);
      mapping.push_back(Json{{"from", from}, {"to", to}});
      text += (n ? ", " : "") + from + " -> " + to;
    }
    Json rules = Json::array();
    v.lines.push_back("kind: " + to_string(c.kind));
    if (c.payload) v.lines.push_back("payload: " + std::string(c.payload->is_text() ? "text()" : c.payload->name));
    v.lines.push_back("allowed: " + to_string(c.allowed_tree));
    v.lines.push_back("denied: " + to_string(c.denied_tree));
    v.lines.push_back("mapping: " + text);
    for (const auto& rule : c.violated_rules) {
      rules.push_back(to_string(rule));
      v.lines.push_back("violated: " + to_string(rule));
    }
    v.witness = Json{{"kind", to_string(c.kind)},
                     {"payload", c.payload ? Json(c.payload->is_text() ? "text()" : c.payload->name) : Json()},
                     {"allowed", marked_json(c.allowed_tree)},
                     {"denied", marked_json(c.denied_tree)},
                     {"mapping", mapping},
                     {"violated", rules}};
  }
  v.stats["instances-explored"] = r.instances_explored;
  v.stats["bound-used"] = r.bound;
  return v;
}

Verdict cmd_enforce(const std::string& file, const std::string& capability, const Options& o) {
  Policy p = read_policy(file);
  auto d = check_static(p, parse_capability(capability), budget_of(o));
  Verdict v;
  v.yes = d.allowed;
  v.lines.push_back("reason: " + d.reason);
  Json w = Json::object();
  if (d.blocking_rule) {
    std::string rule = to_string(PolicyRule{Sign::Deny, *d.blocking_rule});
    w["blocking"] = rule;
    v.lines.push_back("blocking: " + rule);
  }
  if (d.witness) {
    w["overlap"] = marked_json(*d.witness);
    v.lines.push_back("witness: " + to_string(*d.witness));
  }
  if (!w.empty()) v.witness = w;
  v.stats["instances-explored"] = d.instances_explored;
  return v;
}

Verdict cmd_dynamic(const std::string& policy_file, const std::string& tree_file, const Options&) {
  Policy p = read_policy(policy_file);
  Tree t = read_tree(tree_file);
  auto alphabet = policy_labels(p);
  auto names = t.element_names();
  alphabet.insert(names.begin(), names.end());
  std::vector<std::string> lines;
  for (const auto& u : oracle_allowed_set(p, t, alphabet)) lines.push_back(to_string(u, t));
  std::sort(lines.begin(), lines.end());
  Verdict v;
  v.yes = true;
  v.bare = true;
  v.lines = lines;
  v.witness = Json(lines);
  v.stats["count"] = lines.size();
  return v;
}

Verdict cmd_cover(const std::string& policy_file, const std::string& tree_file, const std::string& update,
                  const Options& o) {
  Policy p = read_policy(policy_file);
  Tree t = read_tree(tree_file);
  AtomicUpdate u = parse_update(update, t);
  auto c = find_covering_capability(p, u, t, parse_fragment(o.fragment), budget_of(o));
  Verdict v;
  v.yes = c.has_value();
  if (c) {
    v.witness = to_string(*c);
    v.lines.push_back("capability: " + to_string(*c));
  }
  return v;
}

Verdict cmd_eval(const std::string& path, const std::string& tree_file, const Options&) {
  Tree t = read_tree(tree_file);
  std::vector<std::string> lines;
  for (NodeId n : eval(parse_path(path), t)) lines.push_back(node_path(t, n));
  std::sort(lines.begin(), lines.end());
  Verdict v;
  v.yes = true;
  v.bare = true;
  v.lines = lines;
  v.witness = Json(lines);
  v.stats["count"] = lines.size();
  return v;
}

Verdict cmd_oracle_contains(const std::string& p, const std::string& q, const Options& o) {
  PathExpr left = parse_path(p), right = parse_path(q);
  EnumSpec spec;
  spec.alphabet = labels(left);
  auto l2 = labels(right);
  spec.alphabet.insert(l2.begin(), l2.end());
  spec.alphabet.insert(fresh_label(spec.alphabet));
  spec.max_nodes = oracle_nodes(o);
  auto c = oracle_containment_counterexample(left, right, spec);
  Verdict v;
  v.yes = !c;
  if (c) {
    MarkedTree w = canonicalize(*c);
    v.witness = marked_json(w);
    v.lines.push_back("witness: " + to_string(w));
  }
  v.stats["bound-used"] = spec.max_nodes;
  return v;
}

Verdict cmd_oracle_fairness(const std::string& file, const Options& o) {
  Policy p = read_policy(file);
  EnumSpec spec;
  spec.alphabet = policy_labels(p);
  spec.alphabet.insert(fresh_label(spec.alphabet));
  spec.max_nodes = oracle_nodes(o);
  auto r = oracle_hom_closed(p, spec);
  Verdict v;
  v.yes = r.closed;
  if (r.witness) {
    const auto& w = *r.witness;
    v.lines.push_back("kind: " + to_string(w.kind));
    if (w.payload) v.lines.push_back("payload: " + std::string(w.payload->is_text() ? "text()" : w.payload->name));
    v.lines.push_back("allowed: " + to_string(w.allowed_tree));
    v.lines.push_back("denied: " + to_string(w.denied_tree));
    v.witness = Json{{"kind", to_string(w.kind)},
                     {"payload", w.payload ? Json(w.payload->is_text() ? "text()" : w.payload->name) : Json()},
                     {"allowed", marked_json(w.allowed_tree)},
                     {"denied", marked_json(w.denied_tree)}};
  }
  v.stats["bound-used"] = spec.max_nodes;
  return v;
}

void emit(const Verdict& v, const Options& o, std::ostream& out) {
  if (o.json) {
    Json j;
    j["answer"] = v.yes ? "yes" : "no";
    j["witness"] = v.witness;
    j["stats"] = v.stats;
    out << j.dump() << "\n";
    return;
  }
  if (!v.bare) out << (v.yes ? "yes" : "no") << "\n";
  for (const auto& l : v.lines) out << l << "\n";
  if (v.bare) return;
  for (const auto& [k, val] : v.stats.items()) {
    if (k == "reason") continue;
    out << k << ": " << (val.is_string() ? val.get<std::string>() : val.dump()) << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Static analysis of XPath write-access policies", "xguard"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_flag("--json", o.json, "Print one JSON object");
    sub->add_flag("--timing", o.timing, "Report elapsed-ms");
    sub->add_option("--max-expansions", o.max_expansions, "Extension cap per containment check");
    sub->add_option("--max-nodes", o.max_nodes, "Instance size cap; tree size for oracle commands");
    sub->add_option("--fragment", o.fragment, "Update fragment: linear or filter");
    sub->add_option("--threads", o.threads, "Worker threads");
  };

  std::vector<std::string> paths;
  std::string a, b, c;
  bool force = false;
  std::function<Verdict()> action;

  auto* contains = app.add_subcommand("contains", "Is the first path contained in the union of the others?");
  contains->add_option("paths", paths, "left path, then one or more right paths")->required()->expected(2, -1);
  contains->callback([&] { action = [&] { return cmd_contains(paths, o); }; });

  auto* overlap = app.add_subcommand("overlaps", "Do two paths select a common node?");
  overlap->add_option("p", a)->required();
  overlap->add_option("q", b)->required();
  overlap->callback([&] { action = [&] { return cmd_overlaps(a, b, o); }; });

  auto* fairness = app.add_subcommand("fairness", "Decide fairness of a policy file");
  fairness->add_option("policy", a)->required();
  fairness->add_flag("--search", force, "Skip the syntactic shortcuts");
  fairness->callback([&] { action = [&] { return cmd_fairness(a, force, o); }; });

  auto* enforce = app.add_subcommand("enforce", "Is a capability statically allowed?");
  enforce->add_option("policy", a)->required();
  enforce->add_option("capability", b)->required();
  enforce->callback([&] { action = [&] { return cmd_enforce(a, b, o); }; });

  auto* dynamic = app.add_subcommand("dynamic", "List the updates allowed on a tree");
  dynamic->add_option("policy", a)->required();
  dynamic->add_option("tree", b)->required();
  dynamic->callback([&] { action = [&] { return cmd_dynamic(a, b, o); }; });

  auto* cover = app.add_subcommand("cover", "Find a statically allowed capability covering an update");
  cover->add_option("policy", a)->required();
  cover->add_option("tree", b)->required();
  cover->add_option("update", c)->required();
  cover->callback([&] { action = [&] { return cmd_cover(a, b, c, o); }; });

  auto* ev = app.add_subcommand("eval", "Evaluate a path over a tree file");
  ev->add_option("path", a)->required();
  ev->add_option("tree", b)->required();
  ev->callback([&] { action = [&] { return cmd_eval(a, b, o); }; });

  auto* oc = app.add_subcommand("oracle-contains", "Containment by exhaustive search over small trees");
  oc->add_option("p", a)->required();
  oc->add_option("q", b)->required();
  oc->callback([&] { action = [&] { return cmd_oracle_contains(a, b, o); }; });

  auto* of = app.add_subcommand("oracle-fairness", "Homomorphism closure by exhaustive search");
  of->add_option("policy", a)->required();
  of->callback([&] { action = [&] { return cmd_oracle_fairness(a, o); }; });

  for (auto* sub : app.get_subcommands({})) common(sub);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    auto start = std::chrono::steady_clock::now();
    Verdict v = action();
    if (o.timing) {
      auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      v.stats["elapsed-ms"] = static_cast<std::uint64_t>(ms);
    }
    emit(v, o, out);
    return v.yes ? 0 : 1;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ResourceError& e) {
    err << "error: budget exceeded: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace xguard::cli
