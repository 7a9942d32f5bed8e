#include <doctest.h>

#include <algorithm>

#include "corpus.hpp"
#include "xguard/errors.hpp"
#include "xguard/oracle.hpp"
#include "xguard/xpath.hpp"

using namespace xguard;

namespace {

Relabeling R(std::map<std::string, std::string> m) { return Relabeling(std::move(m)); }

PathExpr P(const char* s) { return parse_path(s); }

PathExpr child(const char* n) { return step(Axis::Child, NodeTest::element(n)); }

std::vector<NodeId> sorted(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Paths outside the test corpus: attributes, text(), self, conjunctions.
const std::vector<std::string> kExtra = {
    "/a/@f",          "/a[@f=\"x\"]",        "//a[@f='y' and b]", "/a/text()",      "//*/self::b",
    "/a[b and c and d]", "/a[(b and c) and d]", "/a[true()]",       "/a[b[c]/d]",     "(a/b)/c",
    "/a[@id=$wn]/b",  "child::a/descendant::b", "/a/*/@*",           "//text()",       "/a[b//c][d]"};

}  // namespace

TEST_CASE("parse expands abbreviations") {
  PathExpr expected = seq(child("a"), filtered(step(Axis::Descendant, NodeTest::element("b")),
                                               exists(seq(step(Axis::Child, NodeTest::wildcard()),
                                                          step(Axis::Attribute, NodeTest::attribute("d"))))));
  CHECK(normalize(P("/a//b[*/@d]")) == expected);
  CHECK(P("/a") == child("a"));
  CHECK(P("a") == child("a"));
  CHECK(P("a[b and c]") == filtered(child("a"), conj(exists(child("b")), exists(child("c")))));
  CHECK(P("child::a/descendant::b") == P("/a//b"));
  CHECK(P("/a[@id=$wn]") == filtered(child("a"), attr_eq("id", "$wn")));
}

TEST_CASE("parse errors carry positions") {
  try {
    P("/a[");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.position() == 3);
  }
  CHECK_THROWS_WITH_AS(P("/foo::a"), doctest::Contains("unknown axis 'foo'"), SyntaxError);
  CHECK_THROWS_WITH_AS(P(""), doctest::Contains("empty path"), SyntaxError);
  CHECK_THROWS_AS(P("/a]"), SyntaxError);
  CHECK_THROWS_AS(P("/a[b and]"), SyntaxError);
  CHECK_THROWS_AS(P("///a"), SyntaxError);
}

TEST_CASE("printing round trips") {
  for (const auto& s : testing::path_corpus()) {
    PathExpr p = P(s.c_str());
    REQUIRE(parse_path(to_string(p)) == p);
  }
  for (const auto& s : kExtra) {
    PathExpr p = P(s.c_str());
    INFO(s);
    REQUIRE(parse_path(to_string(p)) == p);
  }
  CHECK(to_string(P("a[b and c]")) == "/a[b and c]");
  CHECK(to_string(P("//a[//b]")) == "//a[//b]");
}

TEST_CASE("eval follows the semantics table") {
  Tree ab = parse_tree("a(b)");
  CHECK(eval(P("/a[b]"), ab) == std::vector<NodeId>{0});
  CHECK(eval(P("/a[b]"), parse_tree("a(c)")).empty());
  Tree abc = parse_tree("a(b(c))");
  CHECK(sorted(eval(P("//*"), abc)) == std::vector<NodeId>{0, 1, 2});
  CHECK(eval(P("/b"), ab).empty());
  Tree attrs = parse_tree("a(@f=\"1\",b(@f=\"2\"),\"t\")");
  CHECK(eval(P("/a[@f=\"1\"]"), attrs) == std::vector<NodeId>{0});
  CHECK(eval(P("/a[@f=\"2\"]"), attrs).empty());
  CHECK(eval(P("//b[@f=\"2\"]"), attrs).size() == 1);
  CHECK(eval(P("/a/@f"), attrs).size() == 1);
  CHECK(eval(P("//*/@f"), attrs).size() == 2);
  CHECK_THROWS_AS(P("//@f"), SyntaxError);
  CHECK(eval(P("/a/text()"), attrs).size() == 1);
  // Wildcards match elements only.
  CHECK(eval(P("/a/*"), attrs).size() == 1);
}

TEST_CASE("eval agrees with a naive recursive evaluator") {
  // Descendant-only wildcard paths: //* selects every element.
  for (const auto& t : enumerate_trees(EnumSpec{{"a", "b"}, 5, {}})) {
    REQUIRE(eval(P("//*"), t).size() == t.size());
    std::vector<NodeId> deep;
    for (NodeId v = 0; v < t.size(); ++v)
      if (t.depth(v) >= 1) deep.push_back(v);
    REQUIRE(sorted(eval(P("/*//*"), t)) == deep);
  }
}

TEST_CASE("eval_pairs") {
  using Pairs = std::vector<std::pair<NodeId, NodeId>>;
  auto sorted_pairs = [](Pairs v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(eval_pairs(P("child::b"), parse_tree("a(b)")) == Pairs{{0, 1}});
  CHECK(sorted_pairs(eval_pairs(P("descendant::c"), parse_tree("a(b(c))"))) == Pairs{{0, 2}, {1, 2}});
  CHECK(eval_pairs(P("self::*"), parse_tree("a")) == Pairs{{0, 0}});
}

TEST_CASE("pair semantics agree with node semantics from the document") {
  auto trees = enumerate_trees(EnumSpec{{"a", "b"}, 4, {}});
  auto corpus = testing::path_corpus();
  for (std::size_t i = 0; i < corpus.size(); i += 7) {
    PathExpr p = P(corpus[i].c_str());
    for (const auto& t : trees) {
      std::vector<NodeId> from_pairs;
      for (auto [v, w] : eval_pairs_from_document(p, t))
        if (v == kNoNode) from_pairs.push_back(w);
      REQUIRE(sorted(from_pairs) == sorted(eval(p, t)));
    }
  }
}

TEST_CASE("eval is monotone under adding leaves") {
  auto trees = enumerate_trees(EnumSpec{{"a", "b"}, 3, {}});
  auto corpus = testing::path_corpus();
  for (std::size_t i = 0; i < corpus.size(); i += 3) {
    PathExpr p = P(corpus[i].c_str());
    for (const auto& t : trees) {
      auto before = eval(p, t);
      for (NodeId v = 0; v < t.size(); ++v) {
        for (const char* l : {"a", "b"}) {
          Tree bigger = t;
          bigger.add_child(v, Label::element(l));
          auto after = eval(p, bigger);
          for (NodeId n : before) REQUIRE(std::find(after.begin(), after.end(), n) != after.end());
        }
      }
    }
  }
}

TEST_CASE("eval is invariant under relabelings fixing the path labels") {
  auto trees = enumerate_trees(EnumSpec{{"a", "b", "c"}, 4, {}});
  auto corpus = testing::path_corpus();
  std::vector<Relabeling> rs = {R({{"c", "d"}}), R({{"a", "c"}}), R({{"b", "c"}}),
                                R({{"a", "b"}, {"b", "a"}})};
  for (std::size_t i = 0; i < corpus.size(); i += 11) {
    PathExpr p = P(corpus[i].c_str());
    auto ls = labels(p);
    for (const auto& r : rs) {
      if (!r.fixes(ls)) continue;
      for (const auto& t : trees) {
        auto after = eval(p, apply_relabeling(r, t));
        for (NodeId n : eval(p, t)) REQUIRE(std::find(after.begin(), after.end(), n) != after.end());
      }
    }
  }
}

TEST_CASE("labels") {
  CHECK(labels(P("/a//*/b[c]")) == std::set<std::string>{"a", "b", "c"});
  CHECK(labels(P("//*")).empty());
  CHECK(labels(P("a[b and @f=\"x\"]")) == std::set<std::string>{"a", "b"});
}

TEST_CASE("star_length") {
  CHECK(star_length(P("/a/*/*/b")) == 2);
  CHECK(star_length(P("/a/b")) == 0);
  CHECK(star_length(P("/*/a/*[*/*]")) == 2);
  CHECK(star_length(P("//*/*")) == 1);
  CHECK(star_length(P("/*/*/*")) == 3);
}

TEST_CASE("descendant_count") {
  CHECK(descendant_count(P("/a//b")) == 1);
  CHECK(descendant_count(P("/a/b")) == 0);
  CHECK(descendant_count(P("//a[//b]//c")) == 3);
}

TEST_CASE("fragment_of") {
  using F = FragmentId;
  CHECK(fragment_of(P("/a/b")) == F(F::Child));
  CHECK(fragment_of(P("/a//b[*]")) == F(F::Child | F::Descendant | F::Wildcard | F::Filter));
  CHECK(fragment_of(P("/a/b[@c=\"foo\"]")) == F(F::Child | F::Filter | F::AttrEquality | F::AttributeAxis));
  CHECK(F::linear().subset_of(F::filter_paths()));
  CHECK(F::filter_paths().subset_of(F::patterns()));
  CHECK_FALSE(F::patterns().subset_of(F::filter_paths()));
  CHECK(F::patterns().to_string() == "XP(/,//,*,[ ])");
  CHECK(is_pattern_path(P("//a[b//*]")));
  CHECK_FALSE(is_pattern_path(P("/a/@f")));
  CHECK_FALSE(is_pattern_path(P("/a/text()")));
}
