#include <doctest.h>

#include <random>

#include "corpus.hpp"
#include "xguard/errors.hpp"
#include "xguard/oracle.hpp"
#include "xguard/policy.hpp"

using namespace xguard;

namespace {

PathExpr P(const char* s) { return parse_path(s); }

Policy pol(const char* text) { return parse_policy(text); }

const char* kUnfair = "default: deny\nconflict: deny\n+ delete /a\n- delete /a[b]\n";
const char* kHospital =
    "default: deny\nconflict: deny\n+ insert //patient//* :: *\n- insert //* :: treatment\n- update //treatment :: *\n";

}  // namespace

TEST_CASE("policy syntax") {
  Policy p = pol("# comment\ndefault: allow\nconflict: deny\n+ delete /a\n\n- insert //b :: c\n- update /a :: text()\n");
  CHECK(p.default_sign == Sign::Allow);
  CHECK(p.conflict == Sign::Deny);
  REQUIRE(p.allowed.size() == 1);
  REQUIRE(p.denied.size() == 2);
  CHECK(p.denied[0].kind == OpKind::Insert);
  CHECK(p.denied[0].test == NodeTest::element("c"));
  CHECK(p.denied[1].test == NodeTest::text());
  CHECK(mode_string(p) == "(+,-)");
  CHECK(parse_policy(to_string(p)).denied.size() == 2);
  CHECK(to_string(parse_capability("insert //b :: c")) == "insert //b :: c");

  CHECK_THROWS_AS(pol("default: maybe\n"), SyntaxError);
  CHECK_THROWS_AS(pol("+ remove /a\n"), SyntaxError);
  CHECK_THROWS_AS(pol("+ delete /a :: b\n"), SyntaxError);
  CHECK_THROWS_AS(pol("+ insert /a\n"), SyntaxError);
  CHECK_THROWS_AS(pol("+ delete /a[\n"), SyntaxError);
}

TEST_CASE("atomic update syntax") {
  Tree t = parse_tree("a(b,c(a))");
  AtomicUpdate d = parse_update("delete /a[1]/c[1]/a[1]", t);
  CHECK(d.kind == OpKind::Delete);
  CHECK(t.label(d.target).name == "a");
  CHECK(to_string(d, t) == "delete /a[1]/c[1]/a[1]");
  AtomicUpdate i = parse_update("insert /a[1] :: x(y)", t);
  REQUIRE(i.payload);
  CHECK(to_term(*i.payload) == "x(y)");
  CHECK_THROWS_AS(parse_update("delete /a[1] :: x", t), SyntaxError);
  CHECK_THROWS_AS(parse_update("insert /a[1]", t), SyntaxError);
}

TEST_CASE("capability instances") {
  Tree t = parse_tree("a(b,c(b))");
  auto d = capability_instances(delete_capability(P("//b")), t);
  CHECK(d.targets.size() == 2);
  CHECK(d.contains(delete_update(1)));
  CHECK_FALSE(d.contains(delete_update(0)));
  auto ins = capability_instances(insert_capability(P("/a"), NodeTest::element("x")), t);
  CHECK(ins.contains(insert_update(0, parse_tree("x(y)"))));
  CHECK_FALSE(ins.contains(insert_update(0, parse_tree("y"))));
  CHECK_FALSE(ins.contains(delete_update(0)));
  auto any = capability_instances(update_capability(P("/a"), NodeTest::wildcard()), t);
  CHECK(any.contains(update_update(0, parse_tree("q"))));
  CHECK_FALSE(any.contains(update_update(0, Tree(Label::text("q")))));
}

TEST_CASE("dynamic decisions follow the mode table") {
  Tree t = parse_tree("a(b)");
  const std::string rules = "+ delete /a\n- delete //*\n";
  auto decide = [&](const char* mode, NodeId n) {
    return dynamically_allowed(pol((std::string(mode) + rules).c_str()), delete_update(n), t);
  };
  // Root: in both A and D. Child: only in D.
  CHECK_FALSE(decide("default: deny\nconflict: deny\n", 0));
  CHECK(decide("default: deny\nconflict: allow\n", 0));
  CHECK_FALSE(decide("default: allow\nconflict: deny\n", 0));
  CHECK(decide("default: allow\nconflict: allow\n", 0));
  CHECK_FALSE(decide("default: allow\nconflict: allow\n", 1));
  CHECK(dynamically_allowed(pol("default: allow\nconflict: deny\n"), delete_update(1), t));
  CHECK_FALSE(dynamically_allowed(pol("default: deny\nconflict: deny\n"), delete_update(1), t));
  CHECK_THROWS_AS(dynamically_allowed(pol(kUnfair), delete_update(7), t), ContractError);
}

TEST_CASE("static enforcement examples") {
  Policy p = pol("default: deny\nconflict: deny\n+ delete //a\n- delete //b\n");
  CHECK(statically_allowed(p, delete_capability(P("/a"))));
  CHECK(statically_allowed(p, delete_capability(P("//c/a"))));
  auto d = check_static(p, delete_capability(P("//*")));
  CHECK_FALSE(d.allowed);
  REQUIRE(d.witness);
  CHECK_FALSE(statically_allowed(p, delete_capability(P("/b"))));

  auto u = check_static(pol(kUnfair), delete_capability(P("/a")));
  CHECK_FALSE(u.allowed);
  REQUIRE(u.blocking_rule);
  CHECK(to_string(*u.blocking_rule) == "delete /a[b]");
  CHECK(statically_allowed(pol(kUnfair), delete_capability(P("/a[c]"))) == false);

  Policy h = pol(kHospital);
  CHECK(statically_allowed(h, insert_capability(P("/hospital/patient/name"), NodeTest::element("x"))));
  CHECK_FALSE(statically_allowed(h, insert_capability(P("//patient/name"), NodeTest::element("treatment"))));
  CHECK_FALSE(statically_allowed(h, insert_capability(P("//patient/name"), NodeTest::wildcard())));
  CHECK_FALSE(statically_allowed(h, update_capability(P("//patient/name"), NodeTest::element("x"))));
}

TEST_CASE("static decisions are sound on small trees") {
  std::mt19937_64 rng(7);
  auto corpus = testing::path_corpus();
  auto trees = enumerate_trees(EnumSpec{{"a", "b", "z"}, 4, {}});
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  for (int i = 0; i < 40; ++i) {
    testing::PolicyShape shape{static_cast<Sign>(i % 2), static_cast<Sign>((i / 2) % 2), testing::Kinds::DeleteOnly};
    Policy p = testing::random_policy(rng, shape, corpus);
    PolicyAnalyzer an(p);
    for (int j = 0; j < 20; ++j) {
      auto c = delete_capability(P(corpus[pick(rng)].c_str()));
      if (!an.check_static(c).allowed) continue;
      for (const auto& t : trees)
        for (NodeId n : eval(c.path, t)) REQUIRE(dynamically_allowed(p, delete_update(n), t));
    }
  }
}

TEST_CASE("fairness examples") {
  auto v = check_fairness(pol(kUnfair), FragmentId::filter_paths());
  CHECK_FALSE(v.fair);
  REQUIRE(v.counterexample);
  const auto& c = *v.counterexample;
  CHECK(to_string(c.allowed_tree) == "a @ /a[1]");
  CHECK(to_string(c.denied_tree) == "a(b) @ /a[1]");
  CHECK(is_homomorphism(c.mapping));
  REQUIRE(c.violated_rules.size() == 2);
  CHECK(to_string(c.violated_rules[0]) == "+ delete /a");
  CHECK(to_string(c.violated_rules[1]) == "- delete /a[b]");

  auto s = check_fairness(pol("default: deny\nconflict: deny\n+ delete /a\n- delete /a[b]\n- delete //*\n"),
                          FragmentId::filter_paths());
  CHECK(s.fair);
  CHECK(s.reason == FairnessVerdict::Reason::SearchExhausted);

  auto h = check_fairness(pol(kHospital), FragmentId::filter_paths());
  CHECK(h.fair);
  CHECK(h.reason == FairnessVerdict::Reason::Syntactic);
  auto hs = check_fairness(pol(kHospital), FragmentId::filter_paths(), {}, FairnessOptions{true});
  CHECK(hs.fair);
  CHECK(hs.reason == FairnessVerdict::Reason::SearchExhausted);

  CHECK(check_fairness(pol("default: deny\nconflict: deny\n+ delete //a\n- delete //b\n"), FragmentId::linear()).fair);
}

TEST_CASE("fairness errors") {
  CHECK_THROWS_AS(check_fairness(pol(kUnfair), FragmentId::patterns()), UnsupportedFragment);
  CHECK_THROWS_AS(check_fairness(pol(kUnfair), FragmentId::linear()), UnsupportedFragment);
  CHECK_THROWS_AS(check_fairness(pol("default: deny\nconflict: deny\n+ delete /a[@b=\"c\"]\n"),
                                 FragmentId::filter_paths()),
                  UnsupportedFragment);
}

TEST_CASE("degenerate modes") {
  // (-,+): deny rules lose every conflict and the default denies.
  auto v = check_fairness(pol("default: deny\nconflict: allow\n+ delete /a\n- delete /a[b]\n"), FragmentId::filter_paths(),
                          {}, FairnessOptions{true});
  CHECK(v.fair);
  // No rules: the default decides alone.
  for (const char* m : {"default: deny\nconflict: deny\n", "default: allow\nconflict: allow\n"}) {
    auto e = check_fairness(pol(m), FragmentId::filter_paths(), {}, FairnessOptions{true});
    CHECK(e.fair);
    CHECK(e.bound == 0);
  }
  // Allow by default with only an allow rule behaves like an open policy.
  CHECK(statically_allowed(pol("default: allow\nconflict: deny\n+ delete /a\n"), delete_capability(P("//*"))));
  CHECK_FALSE(statically_allowed(pol("default: allow\nconflict: deny\n- delete /a\n"), delete_capability(P("//*"))));
}

TEST_CASE("fairness counterexamples are valid") {
  std::mt19937_64 rng(11);
  auto corpus = testing::path_corpus();
  std::size_t unfair = 0;
  for (int i = 0; i < 120; ++i) {
    testing::PolicyShape shape{static_cast<Sign>(i % 2), static_cast<Sign>((i / 2) % 2), testing::Kinds::Mixed};
    Policy p = testing::random_policy(rng, shape, corpus);
    auto v = check_fairness(p, FragmentId::filter_paths());
    if (v.fair) continue;
    ++unfair;
    REQUIRE(v.counterexample);
    const auto& c = *v.counterexample;
    REQUIRE(is_homomorphism(c.mapping));
    REQUIRE(c.mapping.map[c.allowed_tree.mark] == c.denied_tree.mark);
    auto payload = [&]() { return Tree(*c.payload); };
    auto update = [&](NodeId n) {
      return c.kind == OpKind::Delete   ? delete_update(n)
             : c.kind == OpKind::Insert ? insert_update(n, payload())
                                        : update_update(n, payload());
    };
    REQUIRE(dynamically_allowed(p, update(c.allowed_tree.mark), c.allowed_tree.tree));
    REQUIRE_FALSE(dynamically_allowed(p, update(c.denied_tree.mark), c.denied_tree.tree));
  }
  CHECK(unfair > 0);
}

TEST_CASE("fairness matches closure on small policies") {
  std::mt19937_64 rng(3);
  std::vector<std::string> small;
  for (const auto& s : testing::path_corpus())
    if (step_count(P(s.c_str())) <= 2) small.push_back(s);
  HomClosureOracle oracle(EnumSpec{{"a", "b", "z"}, 6, {}});
  for (int i = 0; i < 60; ++i) {
    testing::PolicyShape shape{Sign::Deny, Sign::Deny, testing::Kinds::DeleteOnly, 2};
    Policy p = testing::random_policy(rng, shape, small);
    auto v = check_fairness(p, FragmentId::filter_paths(), {}, FairnessOptions{true});
    if (v.bound > 6) continue;
    INFO(to_string(p));
    REQUIRE(v.fair == oracle.check(p).closed);
  }
}

TEST_CASE("covering capabilities") {
  Policy p = pol("default: deny\nconflict: deny\n+ delete //a\n- delete //b\n");
  Tree t = parse_tree("a(b,c(a))");
  auto u = parse_update("delete /a[1]/c[1]/a[1]", t);
  auto c = find_covering_capability(p, u, t, FragmentId::filter_paths());
  REQUIRE(c);
  CHECK(capability_instances(*c, t).contains(u));
  CHECK(statically_allowed(p, *c));
  auto l = find_covering_capability(p, u, t, FragmentId::linear());
  REQUIRE(l);
  CHECK(to_string(*l) == "delete /a/c/a");
  CHECK_THROWS_AS(find_covering_capability(p, parse_update("delete /a[1]/b[1]", t), t, FragmentId::filter_paths()),
                  ContractError);
  CHECK_THROWS_AS(find_covering_capability(p, u, t, FragmentId::patterns()), UnsupportedFragment);

  Policy h = pol(kHospital);
  Tree ht = parse_tree("hospital(patients(patient(name,treatment)))");
  auto ins = parse_update("insert /hospital[1]/patients[1]/patient[1] :: name", ht);
  // patient itself is not below a patient.
  CHECK_THROWS_AS(find_covering_capability(h, ins, ht, FragmentId::filter_paths()), ContractError);
  auto deeper = parse_update("insert /hospital[1]/patients[1]/patient[1]/name[1] :: note", ht);
  auto dc = find_covering_capability(h, deeper, ht, FragmentId::filter_paths());
  REQUIRE(dc);
  CHECK(capability_instances(*dc, ht).contains(deeper));
}
