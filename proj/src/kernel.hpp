#pragma once

// Interned patterns and trees for the inner loops of the decision procedures.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xguard/pattern.hpp"
#include "xguard/tree.hpp"

namespace xguard::kernel {

inline constexpr int kWildcard = -1;
inline constexpr int kNonElement = -2;

class Symbols {
 public:
  int id(const std::string& name);
  int find(const std::string& name) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

struct IPattern {
  std::vector<int> label;
  std::vector<std::uint8_t> desc;
  std::vector<int> parent;
  std::vector<std::vector<int>> children;
  std::vector<int> desc_edges;  // pre-order
  int mark = 0;

  int size() const { return static_cast<int>(label.size()); }
};

IPattern intern(const TreePattern& p, Symbols& symbols);

// Parents precede children.
struct ITree {
  std::vector<int> label;
  std::vector<int> parent;
  int mark = 0;

  int size() const { return static_cast<int>(label.size()); }
  void clear() {
    label.clear();
    parent.clear();
    mark = 0;
  }
  int add(int par, int lab) {
    label.push_back(lab);
    parent.push_back(par);
    return static_cast<int>(label.size()) - 1;
  }
};

// Non-element nodes get kNonElement.
ITree intern(const MarkedTree& t, Symbols& symbols, std::vector<NodeId>* origin = nullptr);
MarkedTree to_marked_tree(const ITree& t, const Symbols& symbols);

// s^z(p[u]); `u` empty means all zeros. `image` receives the instance node of
// every pattern node when non-null.
void instantiate(const IPattern& p, const std::vector<std::size_t>& u, int z, ITree& out,
                 std::vector<int>* image = nullptr);

class Matcher {
 public:
  bool matches(const IPattern& p, const ITree& t);
  std::optional<std::vector<int>> embedding(const IPattern& p, const ITree& t);

 private:
  bool fill(const IPattern& p, const ITree& t);
  bool choose(const IPattern& p, const ITree& t, int v, int w, std::vector<int>& image) const;

  std::vector<std::uint8_t> sat_;
  std::vector<std::uint8_t> has_;
  int n_ = 0;
};

}  // namespace xguard::kernel
