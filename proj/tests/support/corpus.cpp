#include "corpus.hpp"

#include <algorithm>
#include <bit>

namespace xguard::testing {

namespace {

const std::vector<std::string> kSteps = {"/a", "/b", "/*", "//a", "//b", "//*"};

// Relative filter bodies of n steps.
std::vector<std::string> filters(std::size_t n) {
  std::vector<std::string> out = {""};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> next;
    for (const auto& prefix : out)
      for (const auto& s : kSteps) next.push_back(prefix + s);
    out = std::move(next);
  }
  for (auto& f : out)
    if (f.rfind("//", 0) != 0) f = f.substr(1);
  return out;
}

}  // namespace

std::vector<std::string> path_corpus() {
  std::vector<std::string> out;
  // (main steps, steps left for one filter)
  for (std::size_t m = 1; m <= 3; ++m) {
    std::vector<std::string> mains = {""};
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::string> next;
      for (const auto& prefix : mains)
        for (const auto& s : kSteps) next.push_back(prefix + s);
      mains = std::move(next);
    }
    for (const auto& main : mains) out.push_back(main);
    for (std::size_t f = 1; m + f <= 3; ++f) {
      for (const auto& main : mains) {
        // Attach the filter after step `at`.
        std::vector<std::size_t> ends;
        for (std::size_t i = 1; i <= main.size(); ++i)
          if (i == main.size() || (main[i] == '/' && main[i - 1] != '/')) ends.push_back(i);
        for (std::size_t at : ends)
          for (const auto& body : filters(f)) out.push_back(main.substr(0, at) + "[" + body + "]" + main.substr(at));
      }
    }
  }
  return out;
}

std::vector<std::string> filter_free_corpus() {
  std::vector<std::string> out;
  for (auto& p : path_corpus())
    if (p.find('[') == std::string::npos) out.push_back(p);
  return out;
}

Bits::Bits(const Forest::Set& s) : words_((s.size() + 63) / 64, 0), size_(s.size()) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) words_[i / 64] |= std::uint64_t{1} << (i % 64);
}

bool Bits::subset_of(const Bits& other) const {
  for (std::size_t w = 0; w < words_.size(); ++w)
    if (words_[w] & ~other.words_[w]) return false;
  return true;
}

std::size_t Bits::first_outside(const Bits& other) const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t x = words_[w] & ~other.words_[w];
    if (x) return w * 64 + static_cast<std::size_t>(std::countr_zero(x));
  }
  return npos;
}

std::vector<NodeTest> rule_tests() {
  return {NodeTest::element("a"), NodeTest::element("b"), NodeTest::wildcard(), NodeTest::text()};
}

Policy random_policy(std::mt19937_64& rng, const PolicyShape& shape, const std::vector<std::string>& paths) {
  Policy p;
  p.default_sign = shape.default_sign;
  p.conflict = shape.conflict;
  std::uniform_int_distribution<std::size_t> count(1, shape.max_rules);
  std::uniform_int_distribution<std::size_t> pick(0, paths.size() - 1);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<std::size_t> test(0, rule_tests().size() - 1);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    bool allow = n >= 2 ? i % 2 == 0 : rng() % 2 == 0;
    UpdateCapability c;
    c.path = parse_path(paths[pick(rng)]);
    c.kind = shape.kinds == Kinds::DeleteOnly ? OpKind::Delete : static_cast<OpKind>(kind(rng));
    if (c.kind != OpKind::Delete) c.test = rule_tests()[test(rng)];
    (allow ? p.allowed : p.denied).push_back(std::move(c));
  }
  return p;
}

}  // namespace xguard::testing
