#pragma once

// Random plane trees: Galton-Watson trees, trees conditioned on their size,
// and height-truncated Kesten trees. Also an exhaustive enumerator of small
// trees, used as an exactness oracle for the samplers.

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "gwpark/distributions.hpp"
#include "gwpark/error.hpp"
#include "gwpark/rng.hpp"
#include "gwpark/tree.hpp"

namespace gwpark {

/// Returned instead of a tree when generation exceeds its vertex cap.
struct OverflowMark {
  std::uint64_t partial_count = 0;
};

template <class T>
using OrOverflow = std::variant<T, OverflowMark>;

inline constexpr std::uint64_t kDefaultRejectionBudget = 10'000'000;

/// Throws unless `offspring` is a valid critical offspring law.
inline void require_critical_offspring(const LawHandle& offspring) {
  const auto report = check_offspring(offspring);
  if (!report.is_critical)
    throw Error(ErrorKind::NotCritical, offspring.name() + " has mean " + std::to_string(report.mean));
  if (report.is_delta1) throw Error(ErrorKind::Delta1Offspring, "offspring law is delta_1");
}

/// Breadth-first degree sequence of a GW tree, written to `degrees`.
/// Returns false (with `degrees` holding the partial sequence) once more than
/// `cap` vertices have been created.
inline bool sample_gw_degrees(const LawHandle& offspring, RngStream& rng, std::uint64_t cap,
                              std::vector<std::uint32_t>& degrees, std::uint64_t* created = nullptr) {
  degrees.clear();
  std::uint64_t total = 1;
  for (std::uint64_t v = 0; v < total; ++v) {
    const std::uint64_t c = offspring.sample(rng);
    degrees.push_back(static_cast<std::uint32_t>(c));
    total += c;
    if (total > cap) {
      if (created) *created = total;
      return false;
    }
  }
  if (created) *created = total;
  return true;
}

/// Unconditioned Galton-Watson tree, nodes in breadth-first order.
inline OrOverflow<Tree> sample_gw(const LawHandle& offspring, RngStream& rng, std::uint64_t cap) {
  require_critical_offspring(offspring);
  std::vector<std::uint32_t> degrees;
  std::uint64_t created = 0;
  if (!sample_gw_degrees(offspring, rng, cap, degrees, &created)) return OverflowMark{created};
  return Tree::from_bfs_degrees(degrees);
}

/// Whether a tree with n vertices has positive probability: n - 1 must be a sum
/// of n values from the support.
inline bool is_admissible(const LawHandle& offspring, std::uint64_t n) {
  if (n == 0) return false;
  if (n == 1) return offspring.pmf(0) > 0.0;
  const std::uint64_t target = n - 1;
  const auto support = offspring.finite_positive_support();
  if (!support) {
    // Unbounded support of a critical law always contains some k >= 2 and, for
    // the built-in families, 1 as well unless periodic.
    return target % offspring.positive_support_gcd() == 0;
  }
  // At most n - 1 non-zero values are used, each >= 1, so the count constraint
  // is automatic: plain coin-change reachability.
  std::vector<bool> reach(target + 1, false);
  reach[0] = true;
  for (std::uint64_t s = 1; s <= target; ++s)
    for (std::uint64_t k : *support)
      if (k <= s && reach[s - k]) {
        reach[s] = true;
        break;
      }
  return reach[target];
}

/// Rotation of a Lukasiewicz word (increments degree - 1, summing to -1) that
/// makes it a first-passage excursion: start right after the first time the
/// walk reaches its minimum. This is the unique valid rotation (cycle lemma).
inline std::size_t cycle_lemma_shift(std::span<const std::uint32_t> degrees) {
  std::int64_t walk = 0, lowest = 0;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    walk += static_cast<std::int64_t>(degrees[i]) - 1;
    if (walk < lowest) {
      lowest = walk;
      argmin = i + 1;
    }
  }
  return argmin % degrees.size();
}

struct ConditionedOptions {
  std::uint64_t budget = kDefaultRejectionBudget;
  /// Draw Poisson and geometric degree sequences directly from their exact
  /// conditional law instead of by rejection on the sum.
  bool allow_shortcut = true;
};

/// Diagnostics of the degree-sequence draw of the last conditioned sample.
struct ConditionedDiagnostics {
  std::uint64_t attempts = 0;
  bool used_exchangeable_shortcut = false;
};

namespace detail {

// n i.i.d. offspring values conditioned on summing to n - 1.
inline std::vector<std::uint32_t> conditioned_degrees(const LawHandle& offspring, std::uint64_t n,
                                                      RngStream& rng, const ConditionedOptions& options,
                                                      ConditionedDiagnostics& diag) {
  const std::uint64_t target = n - 1;
  const std::uint64_t budget = options.budget;
  std::vector<std::uint32_t> deg(n, 0);
  const DistSpec* spec = options.allow_shortcut ? offspring.spec() : nullptr;
  // i.i.d. Poisson values given their sum are multinomial with equal cells.
  if (spec && std::holds_alternative<family::Poisson>(*spec)) {
    diag.used_exchangeable_shortcut = true;
    diag.attempts = 1;
    for (std::uint64_t ball = 0; ball < target; ++ball) ++deg[rng.below(n)];
    return deg;
  }
  // i.i.d. geometric values given their sum are a uniform weak composition:
  // place target stars among target + n - 1 slots, the rest being bars.
  if (spec && std::holds_alternative<family::Geometric>(*spec)) {
    diag.used_exchangeable_shortcut = true;
    diag.attempts = 1;
    const std::uint64_t slots = target + n - 1;
    std::uint64_t stars_left = target, cell = 0;
    for (std::uint64_t s = 0; s < slots; ++s) {
      if (rng.below(slots - s) < stars_left) {
        --stars_left;
        ++deg[cell];
      } else {
        ++cell;
      }
    }
    return deg;
  }
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    std::uint64_t sum = 0;
    bool over = false;
    for (std::uint64_t i = 0; i < n; ++i) {
      deg[i] = static_cast<std::uint32_t>(offspring.sample(rng));
      sum += deg[i];
      if (sum > target) {
        over = true;
        break;
      }
    }
    if (!over && sum == target) {
      diag.attempts = attempt;
      return deg;
    }
  }
  diag.attempts = budget;
  throw Error(ErrorKind::RejectionBudgetExceeded,
              "no degree sequence summing to " + std::to_string(target) + " after " +
                  std::to_string(budget) + " attempts (n=" + std::to_string(n) + ")");
}

}  // namespace detail

/// Exact sample of the GW tree conditioned to have n vertices: n i.i.d.
/// offspring values conditioned on their sum, rotated by the cycle lemma, read
/// as a preorder degree sequence. Nodes are numbered in preorder.
inline Tree sample_gw_conditioned(const LawHandle& offspring, std::uint64_t n, RngStream& rng,
                                  const ConditionedOptions& options = {},
                                  ConditionedDiagnostics* diagnostics = nullptr) {
  require_critical_offspring(offspring);
  if (n > std::numeric_limits<NodeId>::max() / 2) throw Error(ErrorKind::TooLarge, "n too large");
  if (!is_admissible(offspring, n))
    throw Error(ErrorKind::Inadmissible, "no tree with " + std::to_string(n) + " vertices");
  ConditionedDiagnostics diag;
  auto deg = detail::conditioned_degrees(offspring, n, rng, options, diag);
  if (diagnostics) *diagnostics = diag;
  std::rotate(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(cycle_lemma_shift(deg)), deg.end());
  return Tree::from_preorder_degrees(deg);
}

enum class OverflowPolicy {
  /// Any excess over `cap` total vertices returns an OverflowMark.
  Mark,
  /// `cap` applies to each grafted subtree; an oversized graft is discarded and
  /// redrawn, which samples the grafts conditioned on |T| <= cap.
  ResampleGrafts,
};

struct KestenOptions {
  std::uint64_t cap = 1'000'000;
  OverflowPolicy policy = OverflowPolicy::Mark;
};

/// Kesten's tree cut at spine height H: spine S_0..S_H; each S_i receives
/// Y - 1 grafted GW trees with Y size-biased, the spine child (if any) taking
/// a uniform position among the Y children.
///
/// Nodes are numbered in construction order (S_0, its grafts, S_1, ...), so
/// the tree for H is a prefix of the tree for H' > H under the same stream.
inline OrOverflow<SpineTree> sample_kesten_truncated(const LawHandle& offspring, const LawHandle& biased,
                                                     std::uint32_t height, RngStream& rng,
                                                     const KestenOptions& options = {}) {
  std::vector<NodeId> parents;
  std::vector<NodeId> spine;
  std::vector<std::uint32_t> spine_slot;
  std::vector<std::uint32_t> degrees;
  std::uint64_t resampled = 0;
  parents.push_back(kNoParent);
  spine.push_back(0);
  for (std::uint32_t i = 0; i <= height; ++i) {
    const NodeId s = spine.back();
    const std::uint64_t y = biased.sample(rng);
    spine_slot.push_back(static_cast<std::uint32_t>(rng.below(y)));
    for (std::uint64_t g = 1; g < y; ++g) {
      for (;;) {
        const std::uint64_t room = options.policy == OverflowPolicy::Mark
                                       ? (options.cap > parents.size() ? options.cap - parents.size() : 0)
                                       : options.cap;
        std::uint64_t created = 0;
        if (sample_gw_degrees(offspring, rng, room, degrees, &created)) break;
        if (options.policy == OverflowPolicy::Mark) return OverflowMark{parents.size() + created};
        ++resampled;
      }
      // Append the graft, breadth-first, under s.
      const auto base = static_cast<NodeId>(parents.size());
      parents.push_back(s);
      for (std::size_t v = 0; v < degrees.size(); ++v)
        parents.insert(parents.end(), degrees[v], base + static_cast<NodeId>(v));
    }
    if (i < height) {
      spine.push_back(static_cast<NodeId>(parents.size()));
      parents.push_back(s);
      if (options.policy == OverflowPolicy::Mark && parents.size() > options.cap)
        return OverflowMark{parents.size()};
    }
  }
  SpineTree out;
  out.tree = Tree::from_parents(std::move(parents));
  for (std::uint32_t i = 0; i < height; ++i) out.tree.move_child_to(spine[i + 1], spine_slot[i]);
  out.spine = std::move(spine);
  out.height = height;
  out.resampled_grafts = resampled;
  return out;
}

inline OrOverflow<SpineTree> sample_kesten_truncated(const LawHandle& offspring, std::uint32_t height,
                                                     RngStream& rng, const KestenOptions& options = {}) {
  require_critical_offspring(offspring);
  return sample_kesten_truncated(offspring, size_biased(offspring), height, rng, options);
}

struct WeightedTree {
  Tree tree;
  std::string code;
  double probability = 0.0;
};

inline constexpr std::size_t kMaxEnumerationSize = 8;

/// All plane trees with exactly n vertices whose degrees have positive mass,
/// each with its GW probability prod_x nu(c_x).
inline std::vector<WeightedTree> enumerate_trees(const LawHandle& offspring, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidSpec, "n must be positive");
  if (n > kMaxEnumerationSize) throw Error(ErrorKind::TooLarge, "enumeration limited to n <= 8");
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = offspring.pmf(k);
  std::vector<WeightedTree> out;
  std::vector<std::uint32_t> word;
  // Depth-first over Lukasiewicz words: `open` counts pending child slots.
  auto rec = [&](auto&& self, std::size_t open, double weight) -> void {
    if (word.size() == n) {
      if (open == 0) {
        Tree t = Tree::from_preorder_degrees(word);
        std::string code = shape_code(t);
        out.push_back({std::move(t), std::move(code), weight});
      }
      return;
    }
    if (open == 0) return;
    const std::size_t remaining = n - word.size();
    for (std::uint32_t d = 0; d < n; ++d) {
      if (p[d] <= 0.0) continue;
      const std::size_t next_open = open - 1 + d;
      if (next_open > remaining - 1) break;
      word.push_back(d);
      self(self, next_open, weight * p[d]);
      word.pop_back();
    }
  };
  rec(rec, 1, 1.0);
  return out;
}

}  // namespace gwpark
