#include <algorithm>
#include <sstream>

#include "xguard/errors.hpp"
#include "xguard/forest.hpp"
#include "xguard/policy.hpp"

namespace xguard {

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::Insert: return "insert";
    case OpKind::Update: return "update";
    case OpKind::Delete: return "delete";
  }
  return {};
}

UpdateCapability delete_capability(PathExpr path) { return {OpKind::Delete, std::move(path), std::nullopt}; }
UpdateCapability insert_capability(PathExpr path, NodeTest test) { return {OpKind::Insert, std::move(path), std::move(test)}; }
UpdateCapability update_capability(PathExpr path, NodeTest test) { return {OpKind::Update, std::move(path), std::move(test)}; }

AtomicUpdate delete_update(NodeId target) { return {OpKind::Delete, target, std::nullopt}; }
AtomicUpdate insert_update(NodeId target, Tree payload) { return {OpKind::Insert, target, std::move(payload)}; }
AtomicUpdate update_update(NodeId target, Tree payload) { return {OpKind::Update, target, std::move(payload)}; }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<OpKind> kind_of(std::string_view w) {
  if (w == "insert") return OpKind::Insert;
  if (w == "update") return OpKind::Update;
  if (w == "delete") return OpKind::Delete;
  return std::nullopt;
}

// Splits "kind rest" and returns the kind and the offset of rest.
std::pair<OpKind, std::size_t> split_kind(std::string_view text, std::size_t base) {
  std::size_t sp = text.find_first_of(" \t");
  std::string_view word = sp == std::string_view::npos ? text : text.substr(0, sp);
  auto k = kind_of(word);
  if (!k) throw SyntaxError("expected insert, update or delete", base);
  if (sp == std::string_view::npos) throw SyntaxError("missing path", base + text.size());
  return {*k, sp + 1};
}

UpdateCapability capability_at(std::string_view text, std::size_t base) {
  auto [kind, off] = split_kind(text, base);
  std::string_view rest = text.substr(off);
  std::size_t sep = rest.rfind(" :: ");
  std::string_view path_text = sep == std::string_view::npos ? rest : rest.substr(0, sep);
  UpdateCapability c;
  c.kind = kind;
  try {
    c.path = parse_path(path_text);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.message(), base + off + e.position());
  }
  if (sep != std::string_view::npos) {
    std::string_view test_text = rest.substr(sep + 4);
    try {
      c.test = parse_node_test(test_text);
    } catch (const SyntaxError& e) {
      throw SyntaxError(e.message(), base + off + sep + 4 + e.position());
    }
  }
  if (kind == OpKind::Delete && c.test) throw SyntaxError("delete takes no node test", base + off + sep);
  if (kind != OpKind::Delete && !c.test)
    throw SyntaxError(to_string(kind) + " needs a node test after ' :: '", base + text.size());
  return c;
}

}  // namespace

UpdateCapability parse_capability(std::string_view text) {
  std::string_view t = trim(text);
  return capability_at(t, static_cast<std::size_t>(t.data() - text.data()));
}

std::string to_string(const UpdateCapability& c) {
  std::string out = to_string(c.kind) + " " + to_string(c.path);
  if (c.test) out += " :: " + to_string(*c.test);
  return out;
}

AtomicUpdate parse_update(std::string_view text, const Tree& t) {
  std::string_view s = trim(text);
  auto [kind, off] = split_kind(s, 0);
  std::string_view rest = trim(s.substr(off));
  AtomicUpdate u;
  u.kind = kind;
  std::size_t sep = rest.find(" :: ");
  std::string_view where = sep == std::string_view::npos ? rest : trim(rest.substr(0, sep));
  u.target = resolve_node_path(t, where);
  if (kind == OpKind::Delete) {
    if (sep != std::string_view::npos) throw SyntaxError("delete takes no payload", off + sep);
    return u;
  }
  if (sep == std::string_view::npos) throw SyntaxError(to_string(kind) + " needs ' :: payload'", s.size());
  std::string_view payload = trim(rest.substr(sep + 4));
  u.payload = payload == "text()" ? Tree(Label::text("")) : parse_tree(payload);
  return u;
}

std::string to_string(const AtomicUpdate& u, const Tree& t) {
  std::string out = to_string(u.kind) + " " + node_path(t, u.target);
  if (u.payload) {
    const Tree& p = *u.payload;
    bool bare_text = p.size() == 1 && p.label(p.root()).is_text();
    out += " :: " + (bare_text ? std::string("text()") : to_term(p));
  }
  return out;
}

Policy parse_policy(std::string_view text) {
  Policy p;
  std::size_t line_start = 0;
  std::size_t line_no = 0;
  while (line_start <= text.size()) {
    std::size_t end = text.find('\n', line_start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(line_start, end - line_start);
    // Strip a comment that starts outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    std::string_view body = trim(line);
    const std::size_t base = line_start + static_cast<std::size_t>(body.data() - line.data());
    auto fail = [&](const std::string& msg, std::size_t at) -> void {
      throw SyntaxError("line " + std::to_string(line_no) + ": " + msg, at);
    };
    if (!body.empty()) {
      if (body.rfind("default:", 0) == 0 || body.rfind("conflict:", 0) == 0) {
        bool is_default = body[0] == 'd';
        std::string_view v = trim(body.substr(is_default ? 8 : 9));
        Sign s;
        if (v == "allow") s = Sign::Allow;
        else if (v == "deny") s = Sign::Deny;
        else {
          fail("expected allow or deny", base);
          s = Sign::Deny;
        }
        (is_default ? p.default_sign : p.conflict) = s;
      } else if ((body[0] == '+' || body[0] == '-') && body.size() > 2 && (body[1] == ' ' || body[1] == '\t')) {
        std::string_view rule = trim(body.substr(2));
        const std::size_t rbase = base + static_cast<std::size_t>(rule.data() - body.data());
        try {
          UpdateCapability c = capability_at(rule, rbase);
          (body[0] == '+' ? p.allowed : p.denied).push_back(std::move(c));
        } catch (const SyntaxError& e) {
          fail(e.message(), e.position());
        }
      } else {
        fail("expected 'default:', 'conflict:' or a rule starting with '+ ' or '- '", base);
      }
    }
    line_start = end + 1;
  }
  return p;
}

std::string mode_string(const Policy& p) {
  auto sign = [](Sign s) { return s == Sign::Allow ? "+" : "-"; };
  return std::string("(") + sign(p.default_sign) + "," + sign(p.conflict) + ")";
}

std::string to_string(const PolicyRule& r) {
  return std::string(r.sign == Sign::Allow ? "+ " : "- ") + to_string(r.capability);
}

std::string to_string(const Policy& p) {
  std::ostringstream out;
  out << "default: " << (p.default_sign == Sign::Allow ? "allow" : "deny") << "\n";
  out << "conflict: " << (p.conflict == Sign::Allow ? "allow" : "deny") << "\n";
  for (const auto& c : p.allowed) out << "+ " << to_string(c) << "\n";
  for (const auto& c : p.denied) out << "- " << to_string(c) << "\n";
  return out.str();
}

bool CapabilityInstances::contains(const AtomicUpdate& u) const {
  if (u.kind != kind) return false;
  if (!std::binary_search(targets.begin(), targets.end(), u.target)) return false;
  if (kind == OpKind::Delete) return true;
  if (!u.payload || !test) return false;
  return test->matches(u.payload->label(u.payload->root()));
}

CapabilityInstances capability_instances(const UpdateCapability& c, const Tree& t) {
  return CapabilityInstances{c.kind, eval(c.path, t), c.test};
}

namespace {

bool member(const std::vector<UpdateCapability>& rules, const AtomicUpdate& u, const Forest& f, const Forest::Set* docs) {
  for (const auto& r : rules) {
    if (r.kind != u.kind) continue;
    if (u.kind != OpKind::Delete && !(r.test && u.payload && r.test->matches(u.payload->label(u.payload->root()))))
      continue;
    if (f.image(r.path, *docs)[f.slot(0, u.target)]) return true;
  }
  return false;
}

}  // namespace

bool dynamically_allowed(const Policy& p, const AtomicUpdate& u, const Tree& t) {
  if (!t.contains(u.target)) throw ContractError("update target " + std::to_string(u.target) + " is not in the tree");
  if ((u.kind == OpKind::Delete) == u.payload.has_value())
    throw ContractError("payload must be present exactly for inserts and updates");
  Forest f(t);
  Forest::Set docs = f.documents();
  const bool in_a = member(p.allowed, u, f, &docs);
  const bool in_d = member(p.denied, u, f, &docs);
  if (p.default_sign == Sign::Deny) return p.conflict == Sign::Deny ? in_a && !in_d : in_a;
  return p.conflict == Sign::Deny ? !in_d : !(in_d && !in_a);
}

}  // namespace xguard
