#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = xguard::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(XGUARD_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("contains") {
  auto no = run({"contains", "/a//b", "/a/b"});
  CHECK(no.code == 1);
  CHECK(no.out.rfind("no\n", 0) == 0);
  CHECK(no.out.find("witness: a(z(b)) @ /a[1]/z[1]/b[1]") != std::string::npos);
  CHECK(no.out.find("elapsed-ms") == std::string::npos);
  CHECK(run({"contains", "/a//b", "/a/b", "/a/*//b"}).code == 0);
  CHECK(run({"contains", "/a/b", "/a//b", "--timing"}).out.find("elapsed-ms") != std::string::npos);
}

TEST_CASE("errors exit with 2") {
  auto bad = run({"contains", "/a[", "/a"});
  CHECK(bad.code == 2);
  CHECK(bad.err.rfind("error: ", 0) == 0);
  auto budget = run({"contains", "//a//b//c//d", "/a/b", "--max-expansions", "5"});
  CHECK(budget.code == 2);
  CHECK(budget.err.find("budget exceeded") != std::string::npos);
  CHECK(run({"fairness", "/nonexistent.policy"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("fairness text output") {
  auto r = run({"fairness", data("unfair.policy")});
  CHECK(r.code == 1);
  CHECK(r.out.find("allowed: a @ /a[1]") != std::string::npos);
  CHECK(r.out.find("denied: a(b) @ /a[1]") != std::string::npos);
  CHECK(r.out.find("violated: + delete /a") != std::string::npos);
  CHECK(run({"fairness", data("subsumed.policy"), "--search"}).code == 0);
  CHECK(run({"fairness", data("attribute.policy")}).code == 2);
}

TEST_CASE("dynamic lists every allowed update") {
  auto r = run({"dynamic", data("filter_free.policy"), data("small.tree")});
  CHECK(r.code == 0);
  CHECK(r.out == "delete /a[1]\ndelete /a[1]/c[1]/a[1]\n");
  // (+,-) with no rules allows everything: 4 deletes plus inserts and updates
  // on 4 nodes for the classes a, b, c and text().
  std::string open = "/tmp/xguard_unit_open.policy";
  {
    std::ofstream f(open);
    f << "default: allow\nconflict: deny\n";
  }
  auto all = run({"dynamic", open, data("small.tree")});
  CHECK(std::count(all.out.begin(), all.out.end(), '\n') == 36);
}

TEST_CASE("json output") {
  auto r = run({"contains", "/a//b", "/a/b", "--json"});
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.contains("answer"));
  CHECK(j.contains("witness"));
  CHECK(j.contains("stats"));
  CHECK(j["answer"] == "no");
  auto f = nlohmann::json::parse(run({"fairness", data("unfair.policy"), "--json"}).out);
  CHECK(f["answer"] == "no");
  CHECK(f["witness"].contains("mapping"));
}

TEST_CASE("enforce and cover") {
  CHECK(run({"enforce", data("unfair.policy"), "delete /a"}).code == 1);
  auto e = run({"enforce", data("unfair.policy"), "delete /a"});
  CHECK(e.out.find("blocking: - delete /a[b]") != std::string::npos);
  CHECK(run({"enforce", data("filter_free.policy"), "delete /a"}).code == 0);
  auto c = run({"cover", data("filter_free.policy"), data("small.tree"), "delete /a[1]/c[1]/a[1]"});
  CHECK(c.code == 0);
}

TEST_CASE("eval and oracle commands") {
  auto e = run({"eval", "//*", data("small.tree")});
  CHECK(e.code == 0);
  CHECK(std::count(e.out.begin(), e.out.end(), '\n') == 4);
  CHECK(run({"oracle-contains", "/a//b", "/a/b", "--max-nodes", "4"}).code == 1);
  CHECK(run({"oracle-contains", "/a//b", "/a/b", "--max-nodes", "2"}).code == 0);
  CHECK(run({"oracle-fairness", data("unfair.policy"), "--max-nodes", "3"}).code == 1);
}
