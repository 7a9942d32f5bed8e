#include "xguard/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "kernel.hpp"
#include "xguard/errors.hpp"

namespace xguard {

std::string fresh_label(const std::set<std::string>& used) {
  if (!used.count("z")) return "z";
  for (std::size_t i = 1;; ++i) {
    std::string candidate = "z" + std::to_string(i);
    if (!used.count(candidate)) return candidate;
  }
}

namespace {

std::uint64_t saturating_power(std::uint64_t base, std::size_t exp) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / base) return std::numeric_limits<std::uint64_t>::max();
    out *= base;
  }
  return out;
}

struct UnionChecker {
  kernel::Symbols symbols;
  kernel::IPattern left;
  std::vector<kernel::IPattern> rights;
  int z = 0;

  // True when the instance for `u` is selected by some right-hand side.
  bool covered(const std::vector<std::size_t>& u, kernel::Matcher& m, kernel::ITree& buf) const {
    kernel::instantiate(left, u, z, buf);
    return std::any_of(rights.begin(), rights.end(), [&](const kernel::IPattern& r) { return m.matches(r, buf); });
  }
};

}  // namespace

UnionContainmentResult check_union_containment(const TreePattern& left, const std::vector<TreePattern>& rights,
                                               const AnalysisBudget& budget, const std::set<std::string>& avoid) {
  if (rights.empty()) throw ContractError("union containment needs at least one right-hand side");
  std::set<std::string> used = left.labels();
  std::size_t chain = 0;
  for (const auto& r : rights) {
    auto l = r.labels();
    used.insert(l.begin(), l.end());
    chain = std::max(chain, r.star_chain());
  }
  used.insert(avoid.begin(), avoid.end());

  UnionContainmentResult result;
  result.fresh = fresh_label(used);
  result.star_bound = std::max(budget.star_bound.value_or(0), chain);
  const std::size_t d = left.descendant_count();
  const std::size_t k = result.star_bound + 1;
  result.strategy = d == 0 ? UnionStrategy::Decomposition : UnionStrategy::Expansion;

  const std::uint64_t needed = saturating_power(k + 1, d);
  if (needed > budget.max_expansions)
    throw ResourceError("containment check needs (W+2)^d = " + std::to_string(k + 1) + "^" + std::to_string(d) +
                            " extensions",
                        needed, budget.max_expansions);
  if (budget.size_bound && left.size() + d * k > budget.size_bound)
    throw ResourceError("canonical instances exceed the size bound", left.size() + d * k, budget.size_bound);

  UnionChecker checker;
  checker.left = kernel::intern(left, checker.symbols);
  for (const auto& r : rights) checker.rights.push_back(kernel::intern(r, checker.symbols));
  checker.z = checker.symbols.id(result.fresh);

  std::optional<std::vector<std::size_t>> failing;
  if (budget.threads <= 1 || needed < 64) {
    kernel::Matcher m;
    kernel::ITree buf;
    for_each_extension(d, k, [&](const Extension& e) {
      ++result.instances_explored;
      if (checker.covered(e.lengths, m, buf)) return true;
      failing = e.lengths;
      return false;
    });
  } else {
    std::vector<std::vector<std::size_t>> all;
    for_each_extension(d, k, [&](const Extension& e) {
      all.push_back(e.lengths);
      return true;
    });
    // Each worker scans a contiguous block; the smallest failing index wins.
    std::atomic<std::size_t> best{all.size()};
    std::atomic<std::uint64_t> explored{0};
    const unsigned workers = budget.threads;
    const std::size_t block = (all.size() + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        kernel::Matcher m;
        kernel::ITree buf;
        const std::size_t begin = w * block;
        const std::size_t end = std::min(all.size(), begin + block);
        for (std::size_t i = begin; i < end && i < best.load(); ++i) {
          ++explored;
          if (!checker.covered(all[i], m, buf)) {
            std::size_t cur = best.load();
            while (i < cur && !best.compare_exchange_weak(cur, i)) {
            }
            break;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    // Report the count a sequential scan would have made.
    result.instances_explored = best.load() == all.size() ? all.size() : best.load() + 1;
    if (best.load() < all.size()) failing = all[best.load()];
  }

  result.contained = !failing.has_value();
  if (failing) {
    kernel::ITree buf;
    kernel::instantiate(checker.left, *failing, checker.z, buf);
    result.counterexample = canonicalize(kernel::to_marked_tree(buf, checker.symbols));
  }
  return result;
}

UnionContainmentResult check_union_containment(const ContainmentProblem& prob, const AnalysisBudget& budget) {
  std::vector<TreePattern> rights;
  for (const auto& r : prob.rights) rights.push_back(path_to_pattern(r));
  return check_union_containment(path_to_pattern(prob.left), rights, budget);
}

bool contains_union(const ContainmentProblem& prob, const AnalysisBudget& budget) {
  return check_union_containment(prob, budget).contained;
}

ContainmentResult check_containment(const PathExpr& p, const PathExpr& q, const AnalysisBudget& budget) {
  auto r = check_union_containment(path_to_pattern(p), {path_to_pattern(q)}, budget);
  return ContainmentResult{r.contained, std::move(r.counterexample), r.instances_explored, r.star_bound};
}

bool contains(const PathExpr& p, const PathExpr& q, const AnalysisBudget& budget) {
  return check_containment(p, q, budget).contained;
}

std::optional<MarkedTree> overlaps(const TreePattern& p, const TreePattern& q) {
  auto merged = merge_patterns(p, q);
  if (merged.empty()) return std::nullopt;
  std::set<std::string> used = p.labels();
  auto lq = q.labels();
  used.insert(lq.begin(), lq.end());
  return canonicalize(instantiate(merged.front(), fresh_label(used)));
}

std::optional<MarkedTree> overlaps(const PathExpr& p, const PathExpr& q, const AnalysisBudget&) {
  return overlaps(path_to_pattern(p), path_to_pattern(q));
}

std::optional<PathExpr> intersect_paths(const PathExpr& p, const PathExpr& q) {
  for (const PathExpr* x : {&p, &q}) {
    if (!is_pattern_path(*x) || fragment_of(*x).has(FragmentId::Descendant))
      throw UnsupportedFragment("intersection needs paths in XP(/,*,[ ]); got '" + to_string(*x) + "'");
  }
  auto merged = merge_patterns(path_to_pattern(p), path_to_pattern(q));
  if (merged.empty()) return std::nullopt;
  return pattern_to_path(merged.front());
}

}  // namespace xguard
