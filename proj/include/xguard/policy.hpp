#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xguard/analysis.hpp"
#include "xguard/pattern.hpp"
#include "xguard/tree.hpp"
#include "xguard/xpath.hpp"

namespace xguard {

enum class OpKind : std::uint8_t { Insert, Update, Delete };
enum class Sign : std::uint8_t { Deny, Allow };

std::string to_string(OpKind k);

struct UpdateCapability {
  OpKind kind = OpKind::Delete;
  PathExpr path;
  std::optional<NodeTest> test;  // absent for deletes
};

UpdateCapability delete_capability(PathExpr path);
UpdateCapability insert_capability(PathExpr path, NodeTest test);
UpdateCapability update_capability(PathExpr path, NodeTest test);

// "delete /a", "insert //b :: c"
UpdateCapability parse_capability(std::string_view text);
std::string to_string(const UpdateCapability& c);

struct AtomicUpdate {
  OpKind kind = OpKind::Delete;
  NodeId target = 0;
  std::optional<Tree> payload;  // absent for deletes
};

AtomicUpdate delete_update(NodeId target);
AtomicUpdate insert_update(NodeId target, Tree payload);
AtomicUpdate update_update(NodeId target, Tree payload);

// "delete /a[1]/b[1]" or "insert /a[1] :: c" against the node paths of `t`;
// the payload after "::" is a tree term or text().
AtomicUpdate parse_update(std::string_view text, const Tree& t);
std::string to_string(const AtomicUpdate& u, const Tree& t);

struct Policy {
  Sign default_sign = Sign::Deny;
  Sign conflict = Sign::Deny;
  std::vector<UpdateCapability> allowed;
  std::vector<UpdateCapability> denied;
};

Policy parse_policy(std::string_view text);
std::string to_string(const Policy& p);
// "(-,-)" style mode tag.
std::string mode_string(const Policy& p);

// Instances of a capability on one tree. Payloads are infinite, so insert and
// update instances are kept as (target, node test) and queried by membership.
struct CapabilityInstances {
  OpKind kind = OpKind::Delete;
  std::vector<NodeId> targets;
  std::optional<NodeTest> test;

  bool contains(const AtomicUpdate& u) const;
};

CapabilityInstances capability_instances(const UpdateCapability& c, const Tree& t);
bool dynamically_allowed(const Policy& p, const AtomicUpdate& u, const Tree& t);

struct StaticDecision {
  bool allowed = false;
  std::optional<UpdateCapability> blocking_rule;
  std::optional<MarkedTree> witness;
  std::string reason;
  std::uint64_t instances_explored = 0;
};

struct PolicyRule {
  Sign sign = Sign::Deny;
  UpdateCapability capability;
};

// "+ delete /a"
std::string to_string(const PolicyRule& r);

struct FairnessCounterexample {
  OpKind kind = OpKind::Delete;
  std::optional<Label> payload;  // root label of the payload for inserts/updates
  MarkedTree allowed_tree;       // update allowed here
  MarkedTree denied_tree;        // and denied on this homomorphic image
  NodeMapping mapping;
  std::vector<PolicyRule> violated_rules;
};

struct FairnessVerdict {
  enum class Reason { Syntactic, SearchExhausted };
  bool fair = true;
  Reason reason = Reason::Syntactic;
  std::size_t bound = 0;  // B
  std::optional<FairnessCounterexample> counterexample;
  std::uint64_t instances_explored = 0;
};

struct FairnessOptions {
  // Skip the syntactic shortcuts and always run the reduction.
  bool force_search = false;
};

// Precomputes rule patterns so that many capabilities can be checked against
// one policy cheaply.
class PolicyAnalyzer {
 public:
  explicit PolicyAnalyzer(Policy policy, AnalysisBudget budget = {});

  const Policy& policy() const noexcept { return policy_; }
  StaticDecision check_static(const UpdateCapability& c) const;
  FairnessVerdict check_fairness(FragmentId fragment, const FairnessOptions& options = {}) const;

 private:
  struct Rule {
    bool allow;
    std::size_t index;  // into policy_.allowed or policy_.denied
    std::optional<TreePattern> pattern;  // absent when outside XP(/,//,*,[ ])
  };
  struct PayloadClass {
    std::optional<Label> label;  // absent for deletes
  };

  std::vector<PayloadClass> classes_for(OpKind kind, const std::optional<NodeTest>& test) const;
  std::vector<const Rule*> applicable(OpKind kind, const PayloadClass& x, bool allow) const;
  std::size_t bound() const;
  const UpdateCapability& cap(const Rule& r) const;
  void require_analyzable(const std::string& purpose) const;

  Policy policy_;
  AnalysisBudget budget_;
  std::vector<Rule> rules_;
  std::set<std::string> labels_;
};

StaticDecision check_static(const Policy& p, const UpdateCapability& c, const AnalysisBudget& budget = {});
bool statically_allowed(const Policy& p, const UpdateCapability& c, const AnalysisBudget& budget = {});

FairnessVerdict check_fairness(const Policy& p, FragmentId fragment, const AnalysisBudget& budget = {},
                               const FairnessOptions& options = {});

// A statically allowed capability of the fragment whose instances on t include
// u, built from the marked tree (t, u.target).
std::optional<UpdateCapability> find_covering_capability(const Policy& p, const AtomicUpdate& u, const Tree& t,
                                                         FragmentId fragment, const AnalysisBudget& budget = {});
std::optional<UpdateCapability> find_covering_capability(const PolicyAnalyzer& analyzer, const AtomicUpdate& u,
                                                         const Tree& t, FragmentId fragment);

}  // namespace xguard
