#include "xguard/xpath.hpp"

#include <algorithm>
#include <functional>

#include "xguard/errors.hpp"

namespace xguard {

bool NodeTest::matches(const Label& label) const {
  switch (kind) {
    case Kind::ElementName: return label.is_element() && label.name == name;
    case Kind::Wildcard: return label.is_element();
    case Kind::AttributeName: return label.is_attribute() && label.name == name;
    case Kind::Text: return label.is_text();
  }
  return false;
}

bool operator==(const PathExpr& a, const PathExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* s = std::get_if<Step>(&a.node)) {
    const auto& o = std::get<Step>(b.node);
    return s->axis == o.axis && s->test == o.test;
  }
  if (auto* s = std::get_if<Seq>(&a.node)) {
    const auto& o = std::get<Seq>(b.node);
    return *s->head == *o.head && *s->tail == *o.tail;
  }
  const auto& f = std::get<Filtered>(a.node);
  const auto& o = std::get<Filtered>(b.node);
  return *f.path == *o.path && *f.cond == *o.cond;
}

bool operator==(const FilterExpr& a, const FilterExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (auto* e = std::get_if<Exists>(&a.node)) return *e->path == *std::get<Exists>(b.node).path;
  if (auto* c = std::get_if<And>(&a.node)) {
    const auto& o = std::get<And>(b.node);
    return *c->left == *o.left && *c->right == *o.right;
  }
  if (auto* q = std::get_if<AttrEq>(&a.node)) {
    const auto& o = std::get<AttrEq>(b.node);
    return q->name == o.name && q->value == o.value;
  }
  return true;
}

PathExpr step(Axis axis, NodeTest test) { return PathExpr{Step{axis, std::move(test)}}; }

PathExpr seq(PathExpr head, PathExpr tail) {
  return PathExpr{Seq{std::make_shared<const PathExpr>(std::move(head)),
                      std::make_shared<const PathExpr>(std::move(tail))}};
}

PathExpr filtered(PathExpr path, FilterExpr cond) {
  return PathExpr{Filtered{std::make_shared<const PathExpr>(std::move(path)),
                           std::make_shared<const FilterExpr>(std::move(cond))}};
}

FilterExpr exists(PathExpr path) { return FilterExpr{Exists{std::make_shared<const PathExpr>(std::move(path))}}; }

FilterExpr conj(FilterExpr left, FilterExpr right) {
  return FilterExpr{And{std::make_shared<const FilterExpr>(std::move(left)),
                        std::make_shared<const FilterExpr>(std::move(right))}};
}

FilterExpr attr_eq(std::string name, std::string value) {
  return FilterExpr{AttrEq{std::move(name), std::move(value)}};
}

FilterExpr always() { return FilterExpr{True{}}; }

// ---------------------------------------------------------------- parsing

namespace {

class PathParser {
 public:
  explicit PathParser(std::string_view text) : s_(text) {}

  PathExpr parse_top() {
    skip_ws();
    if (at_end() || s_.substr(pos_) == "/" || s_.substr(pos_) == "//") fail("empty path");
    PathExpr p = parse_path();
    skip_ws();
    if (!at_end()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

  NodeTest parse_test_top() {
    skip_ws();
    NodeTest t = parse_test(Axis::Child);
    skip_ws();
    if (!at_end()) fail("unexpected input after node test");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }
  bool looking_at(std::string_view w) const { return s_.substr(pos_, w.size()) == w; }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  static bool name_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
  static bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9'); }

  std::string parse_name() {
    skip_ws();
    if (!name_start(peek())) fail("expected a name");
    std::size_t start = pos_;
    while (name_char(peek())) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  bool keyword_ahead(std::string_view w) const {
    return looking_at(w) && !name_char(peek(w.size()));
  }

  PathExpr parse_path() {
    skip_ws();
    bool desc = false;
    if (looking_at("//")) {
      pos_ += 2;
      desc = true;
    } else if (peek() == '/') {
      ++pos_;
    }
    std::vector<PathExpr> parts;
    parts.push_back(parse_step_expr(desc));
    while (true) {
      skip_ws();
      if (looking_at("//")) {
        pos_ += 2;
        parts.push_back(parse_step_expr(true));
      } else if (peek() == '/') {
        ++pos_;
        parts.push_back(parse_step_expr(false));
      } else {
        break;
      }
    }
    PathExpr out = std::move(parts.back());
    for (std::size_t i = parts.size() - 1; i-- > 0;) out = seq(std::move(parts[i]), std::move(out));
    return out;
  }

  PathExpr parse_step_expr(bool desc) {
    skip_ws();
    PathExpr base = step(Axis::Self, NodeTest::wildcard());
    if (peek() == '(') {
      if (desc) fail("'//' cannot precede a parenthesised path");
      ++pos_;
      base = parse_path();
      expect(')');
    } else {
      base = parse_axis_step(desc);
    }
    while (true) {
      skip_ws();
      if (peek() != '[') break;
      ++pos_;
      FilterExpr q = parse_filter();
      expect(']');
      base = filtered(std::move(base), std::move(q));
    }
    return base;
  }

  NodeTest parse_test(Axis axis) {
    skip_ws();
    if (peek() == '*') {
      ++pos_;
      return NodeTest::wildcard();
    }
    if (peek() == '@') {
      ++pos_;
      return NodeTest::attribute(parse_name());
    }
    std::string name = parse_name();
    if (name == "text" && looking_at("()")) {
      pos_ += 2;
      return NodeTest::text();
    }
    if (axis == Axis::Attribute) return NodeTest::attribute(std::move(name));
    return NodeTest::element(std::move(name));
  }

  PathExpr parse_axis_step(bool desc) {
    skip_ws();
    if (at_end()) fail("expected a step");
    if (peek() == '@') {
      if (desc) fail("'//' cannot precede an attribute step");
      ++pos_;
      if (peek() == '*') {
        ++pos_;
        return step(Axis::Attribute, NodeTest::wildcard());
      }
      return step(Axis::Attribute, NodeTest::attribute(parse_name()));
    }
    if (peek() == '*') {
      ++pos_;
      return step(desc ? Axis::Descendant : Axis::Child, NodeTest::wildcard());
    }
    std::size_t start = pos_;
    std::string name = parse_name();
    skip_ws();
    if (looking_at("::")) {
      if (desc) fail("'//' cannot precede an explicit axis");
      Axis axis;
      if (name == "self") axis = Axis::Self;
      else if (name == "child") axis = Axis::Child;
      else if (name == "descendant") axis = Axis::Descendant;
      else if (name == "attribute") axis = Axis::Attribute;
      else {
        pos_ = start;
        fail("unknown axis '" + name + "'");
      }
      pos_ += 2;
      return step(axis, parse_test(axis));
    }
    Axis axis = desc ? Axis::Descendant : Axis::Child;
    if (name == "text" && looking_at("()")) {
      pos_ += 2;
      return step(axis, NodeTest::text());
    }
    return step(axis, NodeTest::element(std::move(name)));
  }

  std::string parse_value() {
    skip_ws();
    if (peek() == '$') {
      ++pos_;
      return "$" + parse_name();
    }
    char q = peek();
    if (q != '"' && q != '\'') fail("expected a quoted value or $parameter");
    ++pos_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      char c = s_[pos_++];
      if (c == q) break;
      if (c == '\\' && q == '"') {
        if (at_end()) fail("unterminated escape");
        char e = s_[pos_++];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += c;
      }
    }
    return out;
  }

  FilterExpr parse_filter() {
    FilterExpr left = parse_filter_atom();
    while (true) {
      skip_ws();
      if (!keyword_ahead("and")) break;
      pos_ += 3;
      left = conj(std::move(left), parse_filter_atom());
    }
    return left;
  }

  FilterExpr parse_filter_atom() {
    skip_ws();
    if (keyword_ahead("true")) {
      std::size_t save = pos_;
      pos_ += 4;
      skip_ws();
      if (looking_at("()")) {
        pos_ += 2;
        return always();
      }
      pos_ = save;
    }
    if (peek() == '@') {
      std::size_t save = pos_;
      ++pos_;
      if (name_start(peek())) {
        std::string name = parse_name();
        skip_ws();
        if (peek() == '=') {
          ++pos_;
          return attr_eq(std::move(name), parse_value());
        }
      }
      pos_ = save;
    }
    if (peek() == '(') {
      // A parenthesised filter, unless the group turns out to be a path.
      std::size_t save = pos_;
      try {
        ++pos_;
        FilterExpr q = parse_filter();
        expect(')');
        skip_ws();
        if (peek() != '/' && peek() != '[') return q;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
    }
    return exists(parse_path());
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

PathExpr parse_path(std::string_view text) { return PathParser(text).parse_top(); }

NodeTest parse_node_test(std::string_view text) { return PathParser(text).parse_test_top(); }

// ---------------------------------------------------------------- printing

std::string to_string(Axis a) {
  switch (a) {
    case Axis::Self: return "self";
    case Axis::Child: return "child";
    case Axis::Descendant: return "descendant";
    case Axis::Attribute: return "attribute";
  }
  return {};
}

std::string to_string(const NodeTest& t) {
  switch (t.kind) {
    case NodeTest::Kind::ElementName: return t.name;
    case NodeTest::Kind::Wildcard: return "*";
    case NodeTest::Kind::AttributeName: return "@" + t.name;
    case NodeTest::Kind::Text: return "text()";
  }
  return {};
}

namespace {

std::string quote_value(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string print_step(const Step& s) {
  const NodeTest& t = s.test;
  switch (s.axis) {
    case Axis::Child:
      if (t.kind == NodeTest::Kind::AttributeName) return "child::" + to_string(t);
      return to_string(t);
    case Axis::Descendant:
      if (t.kind == NodeTest::Kind::AttributeName) return "descendant::" + to_string(t);
      return "//" + to_string(t);
    case Axis::Attribute:
      if (t.kind == NodeTest::Kind::AttributeName) return "@" + t.name;
      if (t.kind == NodeTest::Kind::Wildcard) return "@*";
      return "attribute::" + to_string(t);
    case Axis::Self: return "self::" + to_string(t);
  }
  return {};
}

std::string print_rel(const PathExpr& p);

std::string print_filter(const FilterExpr& q) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Exists>) {
          return print_rel(*n.path);
        } else if constexpr (std::is_same_v<T, And>) {
          std::string r = print_filter(*n.right);
          if (std::holds_alternative<And>(n.right->node)) r = "(" + r + ")";
          return print_filter(*n.left) + " and " + r;
        } else if constexpr (std::is_same_v<T, AttrEq>) {
          return "@" + n.name + "=" + quote_value(n.value);
        } else {
          return "true()";
        }
      },
      q.node);
}

std::string print_rel(const PathExpr& p) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Step>) {
          return print_step(n);
        } else if constexpr (std::is_same_v<T, Seq>) {
          std::string h = print_rel(*n.head);
          if (std::holds_alternative<Seq>(n.head->node)) h = "(" + h + ")";
          std::string t = print_rel(*n.tail);
          if (t.rfind("//", 0) == 0) return h + t;
          return h + "/" + t;
        } else {
          std::string b = print_rel(*n.path);
          if (std::holds_alternative<Seq>(n.path->node)) b = "(" + b + ")";
          return b + "[" + print_filter(*n.cond) + "]";
        }
      },
      p.node);
}

}  // namespace

std::string to_string(const PathExpr& p) {
  std::string s = print_rel(p);
  if (s.rfind("//", 0) == 0) return s;
  return "/" + s;
}

std::string to_string(const FilterExpr& q) { return print_filter(q); }

// ---------------------------------------------------------------- normalize

namespace {

struct FilteredStep {
  Step step;
  std::vector<FilterExpr> filters;
};

FilterExpr normalize_filter(const FilterExpr& q);

void flatten(const PathExpr& p, std::vector<FilteredStep>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Step>) {
          out.push_back({n, {}});
        } else if constexpr (std::is_same_v<T, Seq>) {
          flatten(*n.head, out);
          flatten(*n.tail, out);
        } else {
          flatten(*n.path, out);
          out.back().filters.push_back(normalize_filter(*n.cond));
        }
      },
      p.node);
}

FilterExpr normalize_filter(const FilterExpr& q) {
  if (auto* e = std::get_if<Exists>(&q.node)) return exists(normalize(*e->path));
  if (auto* a = std::get_if<And>(&q.node)) return conj(normalize_filter(*a->left), normalize_filter(*a->right));
  return q;
}

}  // namespace

PathExpr normalize(const PathExpr& p) {
  std::vector<FilteredStep> steps;
  flatten(p, steps);
  auto build = [](const FilteredStep& s) {
    PathExpr e = PathExpr{s.step};
    for (const auto& q : s.filters) e = filtered(std::move(e), q);
    return e;
  };
  PathExpr out = build(steps.back());
  for (std::size_t i = steps.size() - 1; i-- > 0;) out = seq(build(steps[i]), std::move(out));
  return out;
}

// ---------------------------------------------------------------- measures

namespace {

template <typename StepFn, typename FilterFn>
void walk(const PathExpr& p, StepFn&& on_step, FilterFn&& on_filter);

template <typename StepFn, typename FilterFn>
void walk_filter(const FilterExpr& q, StepFn&& on_step, FilterFn&& on_filter) {
  on_filter(q);
  if (auto* e = std::get_if<Exists>(&q.node)) walk(*e->path, on_step, on_filter);
  if (auto* a = std::get_if<And>(&q.node)) {
    walk_filter(*a->left, on_step, on_filter);
    walk_filter(*a->right, on_step, on_filter);
  }
}

template <typename StepFn, typename FilterFn>
void walk(const PathExpr& p, StepFn&& on_step, FilterFn&& on_filter) {
  if (auto* s = std::get_if<Step>(&p.node)) {
    on_step(*s);
  } else if (auto* q = std::get_if<Seq>(&p.node)) {
    walk(*q->head, on_step, on_filter);
    walk(*q->tail, on_step, on_filter);
  } else {
    const auto& f = std::get<Filtered>(p.node);
    walk(*f.path, on_step, on_filter);
    walk_filter(*f.cond, on_step, on_filter);
  }
}

void collect_labels(const PathExpr& p, std::set<std::string>& out) {
  walk(
      p,
      [&](const Step& s) {
        if (s.test.is_element()) out.insert(s.test.name);
      },
      [](const FilterExpr&) {});
}

std::size_t filter_star_length(const FilterExpr& q);

// Runs are counted per step sequence: along the spine and separately inside
// each filter path.
std::size_t path_star_length(const PathExpr& p) {
  std::vector<FilteredStep> steps;
  flatten(p, steps);
  std::size_t best = 0, run = 0;
  for (const auto& s : steps) {
    if (s.step.axis == Axis::Child && s.step.test.is_wildcard()) {
      best = std::max(best, ++run);
    } else {
      run = 0;
    }
    for (const auto& q : s.filters) best = std::max(best, filter_star_length(q));
  }
  return best;
}

std::size_t filter_star_length(const FilterExpr& q) {
  if (auto* e = std::get_if<Exists>(&q.node)) return path_star_length(*e->path);
  if (auto* a = std::get_if<And>(&q.node))
    return std::max(filter_star_length(*a->left), filter_star_length(*a->right));
  return 0;
}

}  // namespace

std::set<std::string> labels(const PathExpr& p) {
  std::set<std::string> out;
  collect_labels(p, out);
  return out;
}

std::set<std::string> labels(const FilterExpr& q) {
  std::set<std::string> out;
  walk_filter(
      q,
      [&](const Step& s) {
        if (s.test.is_element()) out.insert(s.test.name);
      },
      [](const FilterExpr&) {});
  return out;
}

std::size_t star_length(const PathExpr& p) { return path_star_length(p); }

std::size_t descendant_count(const PathExpr& p) {
  std::size_t n = 0;
  walk(p, [&](const Step& s) { n += s.axis == Axis::Descendant; }, [](const FilterExpr&) {});
  return n;
}

std::size_t step_count(const PathExpr& p) {
  std::size_t n = 0;
  walk(p, [&](const Step&) { ++n; }, [](const FilterExpr&) {});
  return n;
}

std::string FragmentId::to_string() const {
  std::vector<std::string> parts;
  if (has(Child)) parts.emplace_back("/");
  if (has(Descendant)) parts.emplace_back("//");
  if (has(Wildcard)) parts.emplace_back("*");
  if (has(Filter)) parts.emplace_back("[ ]");
  if (has(AttrEquality)) parts.emplace_back("=");
  if (has(AttributeAxis)) parts.emplace_back("@");
  std::string out = "XP(";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out + ")";
}

namespace {

void add_features(const PathExpr& p, unsigned& f) {
  walk(
      p,
      [&](const Step& s) {
        if (s.axis == Axis::Child) f |= FragmentId::Child;
        if (s.axis == Axis::Descendant) f |= FragmentId::Descendant;
        if (s.axis == Axis::Attribute) f |= FragmentId::AttributeAxis;
        if (s.test.is_wildcard()) f |= FragmentId::Wildcard;
      },
      [&](const FilterExpr& q) {
        if (std::holds_alternative<AttrEq>(q.node)) f |= FragmentId::AttrEquality | FragmentId::AttributeAxis;
      });
  // Every Filtered node contributes the filter feature.
  std::function<void(const PathExpr&)> mark_filters = [&](const PathExpr& e) {
    if (auto* q = std::get_if<Seq>(&e.node)) {
      mark_filters(*q->head);
      mark_filters(*q->tail);
    } else if (auto* fl = std::get_if<Filtered>(&e.node)) {
      f |= FragmentId::Filter;
      mark_filters(*fl->path);
    }
  };
  mark_filters(p);
}

}  // namespace

FragmentId fragment_of(const PathExpr& p) {
  unsigned f = 0;
  add_features(p, f);
  return FragmentId(f);
}

FragmentId fragment_of(const FilterExpr& q) {
  unsigned f = FragmentId::Filter;
  walk_filter(
      q,
      [&](const Step& s) {
        if (s.axis == Axis::Child) f |= FragmentId::Child;
        if (s.axis == Axis::Descendant) f |= FragmentId::Descendant;
        if (s.axis == Axis::Attribute) f |= FragmentId::AttributeAxis;
        if (s.test.is_wildcard()) f |= FragmentId::Wildcard;
      },
      [&](const FilterExpr& sub) {
        if (std::holds_alternative<AttrEq>(sub.node)) f |= FragmentId::AttrEquality | FragmentId::AttributeAxis;
      });
  return FragmentId(f);
}

bool is_pattern_path(const PathExpr& p) {
  bool ok = true;
  walk(
      p,
      [&](const Step& s) {
        if (s.axis != Axis::Child && s.axis != Axis::Descendant) ok = false;
        if (!s.test.is_element() && !s.test.is_wildcard()) ok = false;
      },
      [&](const FilterExpr& q) {
        if (std::holds_alternative<AttrEq>(q.node)) ok = false;
      });
  return ok;
}

}  // namespace xguard
