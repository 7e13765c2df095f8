#pragma once

// Rooted plane trees in arena form, and the Top / Pruned / fringe decompositions.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwpark/error.hpp"

namespace gwpark {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

/// A finite rooted plane tree. Node 0 is the root and every node is numbered
/// after its parent, so a reverse sweep over indices visits children before
/// parents. Children of each node are stored contiguously in planar order.
class Tree {
 public:
  Tree() : Tree(std::vector<std::uint32_t>{0}) {}

  /// Tree whose breadth-first degree sequence is `degrees`. Nodes are numbered
  /// in breadth-first order.
  static Tree from_bfs_degrees(std::span<const std::uint32_t> degrees) {
    return Tree(std::vector<std::uint32_t>(degrees.begin(), degrees.end()));
  }

  /// Tree from its preorder (depth-first) degree sequence, i.e. a Lukasiewicz
  /// word. Nodes are numbered in preorder.
  static Tree from_preorder_degrees(std::span<const std::uint32_t> degrees) {
    if (degrees.empty()) throw Error(ErrorKind::InvalidSpec, "empty degree sequence");
    std::vector<NodeId> parents(degrees.size(), kNoParent);
    // Stack of (node, children still to attach).
    std::vector<std::pair<NodeId, std::uint32_t>> open;
    open.emplace_back(0, degrees[0]);
    for (NodeId v = 1; v < degrees.size(); ++v) {
      while (!open.empty() && open.back().second == 0) open.pop_back();
      if (open.empty()) throw Error(ErrorKind::InvalidSpec, "degree sequence closes before its end");
      parents[v] = open.back().first;
      --open.back().second;
      open.emplace_back(v, degrees[v]);
    }
    for (const auto& [v, pending] : open)
      if (pending != 0) throw Error(ErrorKind::InvalidSpec, "degree sequence does not close");
    return from_parents(std::move(parents));
  }

  /// Tree from a parent array with parents[0] = kNoParent and parents[v] < v.
  /// Children appear in increasing index order.
  static Tree from_parents(std::vector<NodeId> parents) {
    Tree t(Uninit{});
    const std::size_t n = parents.size();
    if (n == 0 || parents[0] != kNoParent) throw Error(ErrorKind::InvalidSpec, "node 0 must be the root");
    t.child_begin_.assign(n + 1, 0);
    for (std::size_t v = 1; v < n; ++v) {
      if (parents[v] >= v) throw Error(ErrorKind::InvalidSpec, "parent must precede child");
      ++t.child_begin_[parents[v] + 1];
    }
    std::partial_sum(t.child_begin_.begin(), t.child_begin_.end(), t.child_begin_.begin());
    t.children_.resize(n - 1);
    std::vector<std::uint32_t> fill(t.child_begin_.begin(), t.child_begin_.end() - 1);
    for (std::size_t v = 1; v < n; ++v) t.children_[fill[parents[v]]++] = static_cast<NodeId>(v);
    t.parent_ = std::move(parents);
    return t;
  }

  /// Tree from explicit planar child lists, kids[v] listing children of v.
  /// Node ids are kept; they must satisfy parent < child.
  static Tree from_child_lists(const std::vector<std::vector<NodeId>>& kids) {
    std::vector<NodeId> parents(kids.size(), kNoParent);
    std::vector<std::uint32_t> begin(kids.size() + 1, 0);
    std::vector<NodeId> flat;
    flat.reserve(kids.size());
    for (NodeId v = 0; v < kids.size(); ++v) {
      for (NodeId c : kids[v]) {
        if (c >= kids.size() || c == 0 || parents[c] != kNoParent)
          throw Error(ErrorKind::InvalidSpec, "child lists do not describe a tree");
        parents[c] = v;
        flat.push_back(c);
      }
      begin[v + 1] = static_cast<std::uint32_t>(flat.size());
    }
    if (flat.size() + 1 != kids.size()) throw Error(ErrorKind::InvalidSpec, "child lists do not describe a tree");
    Tree t = from_parents(parents);
    t.children_ = std::move(flat);
    t.child_begin_ = std::move(begin);
    return t;
  }

  std::size_t size() const { return parent_.size(); }
  static constexpr NodeId root() { return 0; }
  NodeId parent(NodeId v) const { return parent_.at(v); }
  std::uint32_t degree(NodeId v) const { return child_begin_.at(v + 1) - child_begin_[v]; }
  std::span<const NodeId> children(NodeId v) const {
    return {children_.data() + child_begin_.at(v), degree(v)};
  }
  std::span<const NodeId> parents() const { return parent_; }
  bool contains(NodeId v) const { return v < size(); }

  /// Nodes in depth-first (preorder) planar order.
  std::vector<NodeId> preorder() const {
    std::vector<NodeId> out;
    out.reserve(size());
    std::vector<NodeId> stack{root()};
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      out.push_back(v);
      const auto kids = children(v);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  std::vector<std::uint32_t> depths() const {
    std::vector<std::uint32_t> d(size(), 0);
    for (NodeId v = 1; v < size(); ++v) d[v] = d[parent_[v]] + 1;
    return d;
  }

  std::uint32_t height() const {
    const auto d = depths();
    return *std::max_element(d.begin(), d.end());
  }

  /// |Top(t, v)| for every v.
  std::vector<std::uint32_t> subtree_sizes() const {
    std::vector<std::uint32_t> s(size(), 1);
    for (NodeId v = static_cast<NodeId>(size()) - 1; v > 0; --v) s[parent_[v]] += s[v];
    return s;
  }

  std::vector<std::uint32_t> preorder_degrees() const {
    std::vector<std::uint32_t> out;
    out.reserve(size());
    for (NodeId v : preorder()) out.push_back(degree(v));
    return out;
  }

  /// Same tree with the children of `v` listed in the order given by `perm`
  /// (perm[i] is the old position of the new i-th child). Node ids are kept.
  Tree with_children_permuted(NodeId v, std::span<const std::uint32_t> perm) const {
    if (!contains(v)) throw Error(ErrorKind::BadNode, "node out of range");
    if (perm.size() != degree(v)) throw Error(ErrorKind::BadPermutation, "permutation size mismatch");
    Tree t = *this;
    const auto old = children(v);
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] >= perm.size() || seen[perm[i]]) throw Error(ErrorKind::BadPermutation, "not a permutation");
      seen[perm[i]] = true;
      t.children_[t.child_begin_[v] + i] = old[perm[i]];
    }
    return t;
  }

  /// Moves child `c` of its parent to planar position `pos`.
  void move_child_to(NodeId c, std::uint32_t pos) {
    const NodeId p = parent(c);
    auto first = children_.begin() + child_begin_[p];
    auto last = children_.begin() + child_begin_[p + 1];
    auto it = std::find(first, last, c);
    if (pos >= static_cast<std::uint32_t>(last - first)) throw Error(ErrorKind::BadNode, "position out of range");
    auto target = first + pos;
    if (target < it) {
      std::rotate(target, it, it + 1);
    } else {
      std::rotate(it, it + 1, target + 1);
    }
  }

  friend bool operator==(const Tree& a, const Tree& b) {
    return a.preorder_degrees() == b.preorder_degrees();
  }

 private:
  struct Uninit {};
  explicit Tree(Uninit) {}

  explicit Tree(std::vector<std::uint32_t> bfs_degrees) {
    const std::size_t n = bfs_degrees.size();
    if (n == 0) throw Error(ErrorKind::InvalidSpec, "empty degree sequence");
    parent_.assign(n, kNoParent);
    child_begin_.assign(n + 1, 0);
    std::uint64_t next = 1;
    for (std::size_t v = 0; v < n; ++v) {
      if (v > 0 && next <= v) throw Error(ErrorKind::InvalidSpec, "degree sequence closes before its end");
      child_begin_[v] = static_cast<std::uint32_t>(next - 1);
      for (std::uint32_t j = 0; j < bfs_degrees[v]; ++j) {
        if (next >= n) throw Error(ErrorKind::InvalidSpec, "degree sequence does not close");
        parent_[next++] = static_cast<NodeId>(v);
      }
    }
    if (next != n) throw Error(ErrorKind::InvalidSpec, "degree sequence does not close");
    child_begin_[n] = static_cast<std::uint32_t>(n - 1);
    children_.resize(n - 1);
    std::iota(children_.begin(), children_.end(), NodeId{1});
  }

  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> child_begin_;
  std::vector<NodeId> children_;
};

/// A tree with a distinguished vertex.
struct PointedTree {
  Tree tree;
  NodeId point = 0;
};

/// Height-truncated Kesten tree: spine[i] is the spine vertex at height i.
struct SpineTree {
  Tree tree;
  std::vector<NodeId> spine;
  std::uint32_t height = 0;
  /// Grafted subtrees discarded and redrawn because they exceeded the cap.
  std::uint64_t resampled_grafts = 0;
};

/// Top(t, v): the descendants of v, rooted at v, planar order preserved.
/// Returned nodes are numbered in breadth-first order from v.
inline Tree top(const Tree& t, NodeId v) {
  if (!t.contains(v)) throw Error(ErrorKind::BadNode, "node out of range");
  std::vector<std::uint32_t> degrees;
  std::vector<NodeId> queue{v};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto kids = t.children(queue[i]);
    degrees.push_back(static_cast<std::uint32_t>(kids.size()));
    queue.insert(queue.end(), kids.begin(), kids.end());
  }
  return Tree::from_bfs_degrees(degrees);
}

/// Pruned(t, v): t with Top(t, v) \ {v} removed, pointed at v.
inline PointedTree pruned(const Tree& t, NodeId v) {
  if (!t.contains(v)) throw Error(ErrorKind::BadNode, "node out of range");
  std::vector<std::uint32_t> degrees;
  std::vector<NodeId> queue{Tree::root()};
  NodeId point = 0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const NodeId u = queue[i];
    if (u == v) {
      point = static_cast<NodeId>(i);
      degrees.push_back(0);
      continue;
    }
    const auto kids = t.children(u);
    degrees.push_back(static_cast<std::uint32_t>(kids.size()));
    queue.insert(queue.end(), kids.begin(), kids.end());
  }
  return {Tree::from_bfs_degrees(degrees), point};
}

inline constexpr std::string_view kOtherShape = "other";
inline constexpr std::size_t kMaxShapeSize = 9;

/// Canonical code of a plane tree: its preorder degree sequence, one decimal
/// digit per vertex. Only defined for trees with at most kMaxShapeSize vertices.
inline std::string shape_code(const Tree& t) {
  if (t.size() > kMaxShapeSize) throw Error(ErrorKind::TooLarge, "tree too large for a shape code");
  std::string code;
  for (std::uint32_t d : t.preorder_degrees()) code.push_back(static_cast<char>('0' + d));
  return code;
}

inline Tree tree_from_shape_code(std::string_view code) {
  std::vector<std::uint32_t> degrees;
  for (char c : code) {
    if (c < '0' || c > '9') throw Error(ErrorKind::InvalidSpec, "bad shape code");
    degrees.push_back(static_cast<std::uint32_t>(c - '0'));
  }
  return Tree::from_preorder_degrees(degrees);
}

/// Empirical law of Top(t, x) over all vertices x, restricted to shapes with at
/// most `max_size` vertices; larger fringe trees go to the "other" bucket.
inline std::map<std::string, double> fringe_histogram(const Tree& t, std::size_t max_size) {
  if (max_size > kMaxShapeSize) throw Error(ErrorKind::TooLarge, "max_size above shape-code limit");
  const auto sizes = t.subtree_sizes();
  std::vector<std::string> code(t.size());
  std::map<std::string, double> hist;
  const double w = 1.0 / static_cast<double>(t.size());
  for (NodeId v = static_cast<NodeId>(t.size()); v-- > 0;) {
    if (sizes[v] > max_size) {
      hist[std::string(kOtherShape)] += w;
      continue;
    }
    std::string& c = code[v];
    c.push_back(static_cast<char>('0' + t.degree(v)));
    for (NodeId k : t.children(v)) c += code[k];
    hist[c] += w;
  }
  return hist;
}

/// Debug dump: one line `id parent child-count` per node in preorder, ids being
/// preorder ranks and the root's parent written as -1.
inline void dump_tree(std::ostream& os, const Tree& t) {
  const auto order = t.preorder();
  std::vector<std::uint32_t> rank(t.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  for (NodeId v : order) {
    os << rank[v] << ' ';
    if (v == Tree::root()) {
      os << -1;
    } else {
      os << rank[t.parent(v)];
    }
    os << ' ' << t.degree(v) << '\n';
  }
}

}  // namespace gwpark
