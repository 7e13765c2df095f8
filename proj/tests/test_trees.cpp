#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <sstream>

#include "gwpark/tree.hpp"
#include "gwpark/tree_sampling.hpp"
#include "test_support.hpp"

using namespace gwpark;

namespace {

// Root with children a, b; a has one child c. Preorder degrees 2,1,0,0.
Tree small_tree() { return Tree::from_preorder_degrees(std::vector<std::uint32_t>{2, 1, 0, 0}); }

}  // namespace

TEST(Tree, ConstructionsAgree) {
  const Tree pre = small_tree();
  const Tree bfs = Tree::from_bfs_degrees(std::vector<std::uint32_t>{2, 1, 0, 0});
  const Tree par = Tree::from_parents({kNoParent, 0, 1, 0});
  const Tree kids = Tree::from_child_lists({{1, 3}, {2}, {}, {}});
  EXPECT_EQ(pre, bfs);
  EXPECT_EQ(pre, par);
  EXPECT_EQ(pre, kids);
  EXPECT_EQ(pre.size(), 4u);
  EXPECT_EQ(pre.height(), 2u);
  EXPECT_EQ(pre.subtree_sizes(), (std::vector<std::uint32_t>{4, 2, 1, 1}));
  EXPECT_EQ(pre.depths(), (std::vector<std::uint32_t>{0, 1, 2, 1}));
  EXPECT_EQ(Tree().size(), 1u);
}

TEST(Tree, RejectsMalformedInput) {
  EXPECT_THROW(Tree::from_preorder_degrees(std::vector<std::uint32_t>{1, 0, 0}), Error);
  EXPECT_THROW(Tree::from_preorder_degrees(std::vector<std::uint32_t>{2, 0}), Error);
  EXPECT_THROW(Tree::from_bfs_degrees(std::vector<std::uint32_t>{}), Error);
  EXPECT_THROW(Tree::from_parents({kNoParent, 2, 0}), Error);
  EXPECT_THROW(Tree::from_child_lists({{1}, {0}}), Error);
}

TEST(Tree, ShapeCodeRoundTrip) {
  const Tree t = small_tree();
  EXPECT_EQ(shape_code(t), "2100");
  EXPECT_EQ(tree_from_shape_code("2100"), t);
  EXPECT_THROW(tree_from_shape_code("21x0"), Error);
  std::vector<std::uint32_t> path(10, 1);
  path.back() = 0;
  EXPECT_THROW(shape_code(Tree::from_preorder_degrees(path)), Error);
}

TEST(Tree, DumpFormat) {
  std::ostringstream os;
  dump_tree(os, Tree::from_bfs_degrees(std::vector<std::uint32_t>{2, 1, 0, 0}));
  EXPECT_EQ(os.str(), "0 -1 2\n1 0 1\n2 1 0\n3 0 0\n");
}

TEST(Tree, TopAndPruned) {
  const Tree t = small_tree();
  EXPECT_EQ(shape_code(top(t, 1)), "10");
  const PointedTree p = pruned(t, 1);
  EXPECT_EQ(shape_code(p.tree), "200");
  EXPECT_EQ(p.tree.depths()[p.point], 1u);
  EXPECT_THROW(top(t, 9), Error);
}

TEST(Tree, PrunedTopSizeIdentityOnRandomTrees) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng = RngStream::substream(5, i);
    const Tree t = sample_gw_conditioned(nu, 1 + i % 30, rng);
    for (NodeId x = 0; x < t.size(); ++x) {
      const PointedTree p = pruned(t, x);
      EXPECT_EQ(p.tree.size() + top(t, x).size(), t.size() + 1);
      EXPECT_EQ(p.tree.depths()[p.point], t.depths()[x]);
    }
  }
}

TEST(Tree, ChildPermutationKeepsIdsAndMovesOrder) {
  const Tree t = small_tree();
  const std::vector<std::uint32_t> swap{1, 0};
  const Tree s = t.with_children_permuted(0, swap);
  EXPECT_EQ(shape_code(s), "2010");
  EXPECT_EQ(s.parent(2), 1u);
  EXPECT_THROW(t.with_children_permuted(0, std::vector<std::uint32_t>{0, 0}), Error);
  Tree m = t;
  m.move_child_to(3, 0);
  EXPECT_EQ(shape_code(m), "2010");
}

TEST(Tree, FringeHistogramOfPath) {
  const Tree path = tree_from_shape_code("1110");
  const auto h = fringe_histogram(path, 3);
  EXPECT_DOUBLE_EQ(h.at("0"), 0.25);
  EXPECT_DOUBLE_EQ(h.at("10"), 0.25);
  EXPECT_DOUBLE_EQ(h.at("110"), 0.25);
  EXPECT_DOUBLE_EQ(h.at("other"), 0.25);
}

TEST(Tree, FringeOfLargeConditionedTreeApproachesGwLaw) {
  // P(Top = single vertex) -> nu_0 = 1/2, P(Top = "10") -> nu_1 nu_0 = 1/8.
  const LawHandle nu = make_law(family::Geometric{0.5});
  RngStream rng(17);
  const Tree t = sample_gw_conditioned(nu, 200'000, rng);
  const auto h = fringe_histogram(t, 3);
  EXPECT_NEAR(h.at("0"), 0.5, 0.01);
  EXPECT_NEAR(h.at("10"), 0.125, 0.01);
}

TEST(Sampling, CriticalityAndDelta1Checks) {
  RngStream rng(1);
  try {
    sample_gw(make_law(family::Poisson{0.5}), rng, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCritical);
  }
  try {
    sample_gw_conditioned(make_law(family::Finite{{{1, 1.0}}}), 5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Delta1Offspring);
  }
}

TEST(Sampling, OverflowIsAMarkNotAnError) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  std::uint64_t overflow = 0, total = 0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    RngStream rng = RngStream::substream(3, i);
    auto t = sample_gw(nu, rng, 10);
    if (std::holds_alternative<OverflowMark>(t)) {
      ++overflow;
      EXPECT_GT(std::get<OverflowMark>(t).partial_count, 10u);
    } else {
      EXPECT_LE(std::get<Tree>(t).size(), 10u);
    }
    ++total;
  }
  EXPECT_GT(overflow, 0u);
  EXPECT_LT(overflow, total);
}

TEST(Sampling, UnconditionedSmallTreeLaw) {
  // P(|T| = 1) = nu_0, P(|T| = 2) = nu_1 nu_0 for geometric(1/2).
  const LawHandle nu = make_law(family::Geometric{0.5});
  std::map<std::uint64_t, std::uint64_t> sizes;
  constexpr std::uint64_t kDraws = 50'000;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    RngStream rng = RngStream::substream(8, i);
    auto t = sample_gw(nu, rng, 3);
    ++sizes[std::holds_alternative<Tree>(t) ? std::get<Tree>(t).size() : 4];
  }
  // |T| = 3: shapes "200" and "110", each of probability 1/32.
  const double p1 = 0.5, p2 = 0.125, p3 = 0.0625;
  const auto chi = checks::chi_square(sizes, std::map<std::uint64_t, double>{{1, p1}, {2, p2}, {3, p3},
                                                                              {4, 1 - p1 - p2 - p3}},
                                       kDraws);
  EXPECT_TRUE(chi.passes()) << chi.statistic;
}

TEST(Sampling, Admissibility) {
  const LawHandle binary = make_law(family::Finite{{{0, 0.5}, {2, 0.5}}});
  EXPECT_TRUE(is_admissible(binary, 1));
  EXPECT_FALSE(is_admissible(binary, 2));
  EXPECT_TRUE(is_admissible(binary, 3));
  EXPECT_FALSE(is_admissible(binary, 100));
  const LawHandle ternary = make_law(family::Finite{{{0, 2.0 / 3}, {3, 1.0 / 3}}});
  EXPECT_TRUE(is_admissible(ternary, 4));
  EXPECT_FALSE(is_admissible(ternary, 5));
  EXPECT_TRUE(is_admissible(make_law(family::Geometric{0.5}), 2));
  RngStream rng(2);
  try {
    sample_gw_conditioned(binary, 4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Inadmissible);
  }
  const Tree t = sample_gw_conditioned(binary, 11, rng);
  EXPECT_EQ(t.size(), 11u);
  for (NodeId v = 0; v < t.size(); ++v) EXPECT_TRUE(t.degree(v) == 0 || t.degree(v) == 2);
}

TEST(Sampling, CycleLemmaRotatesToAnExcursion) {
  const std::vector<std::uint32_t> word{0, 0, 2, 1, 1};  // sum = n - 1
  const auto shift = cycle_lemma_shift(word);
  std::vector<std::uint32_t> rotated(word);
  std::rotate(rotated.begin(), rotated.begin() + static_cast<std::ptrdiff_t>(shift), rotated.end());
  EXPECT_EQ(rotated, (std::vector<std::uint32_t>{2, 1, 1, 0, 0}));
  EXPECT_NO_THROW(Tree::from_preorder_degrees(rotated));
}

TEST(Sampling, EnumerationWeights) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  // Catalan numbers of plane trees, each with weight 2^-(2n-1).
  const std::vector<std::size_t> catalan{1, 1, 2, 5, 14, 42};
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto trees = enumerate_trees(nu, n);
    EXPECT_EQ(trees.size(), catalan[n - 1]);
    for (const auto& w : trees) EXPECT_DOUBLE_EQ(w.probability, std::ldexp(1.0, -static_cast<int>(2 * n - 1)));
  }
  EXPECT_THROW(enumerate_trees(nu, 9), Error);
}

namespace {

void expect_conditioned_matches_enumeration(const LawHandle& nu, std::size_t n, const ConditionedOptions& opt,
                                            std::uint64_t seed) {
  const auto trees = enumerate_trees(nu, n);
  double z = 0;
  for (const auto& w : trees) z += w.probability;
  std::map<std::string, double> expected;
  for (const auto& w : trees) expected[w.code] = w.probability / z;
  std::map<std::string, std::uint64_t> observed;
  constexpr std::uint64_t kDraws = 20'000;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    RngStream rng = RngStream::substream(seed, i);
    ++observed[shape_code(sample_gw_conditioned(nu, n, rng, opt))];
  }
  const auto chi = checks::chi_square(observed, expected, kDraws);
  EXPECT_TRUE(chi.passes()) << nu.name() << " n=" << n << " chi2=" << chi.statistic << " crit=" << chi.critical;
}

}  // namespace

TEST(Sampling, ConditionedShortcutsMatchEnumeration) {
  for (std::size_t n : {3, 4, 5, 6}) {
    expect_conditioned_matches_enumeration(make_law(family::Geometric{0.5}), n, {}, 100 + n);
    expect_conditioned_matches_enumeration(make_law(family::Poisson{1.0}), n, {}, 200 + n);
  }
}

TEST(Sampling, ConditionedRejectionMatchesEnumeration) {
  ConditionedOptions rejection;
  rejection.allow_shortcut = false;
  for (std::size_t n : {4, 5}) {
    expect_conditioned_matches_enumeration(make_law(family::Geometric{0.5}), n, rejection, 300 + n);
    expect_conditioned_matches_enumeration(make_law(family::Finite{{{0, 1.0 / 3}, {1, 0.5}, {3, 1.0 / 6}}}), n,
                                           rejection, 400 + n);
  }
}

TEST(Sampling, RejectionBudgetIsEnforced) {
  ConditionedOptions tiny;
  tiny.allow_shortcut = false;
  tiny.budget = 1;
  RngStream rng(9);
  bool hit = false;
  for (int i = 0; i < 50 && !hit; ++i) {
    try {
      sample_gw_conditioned(make_law(family::Geometric{0.5}), 40, rng, tiny);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::RejectionBudgetExceeded);
      hit = true;
    }
  }
  EXPECT_TRUE(hit);
}

TEST(Sampling, LargeConditionedTreesHaveTheRequestedSize) {
  RngStream rng(4);
  EXPECT_EQ(sample_gw_conditioned(make_law(family::Poisson{1.0}), 100'000, rng).size(), 100'000u);
  EXPECT_EQ(sample_gw_conditioned(make_law(family::Geometric{0.5}), 100'000, rng).size(), 100'000u);
}

TEST(Kesten, SpineIsAPathAndGraftsHangOffIt) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream rng = RngStream::substream(6, i);
    auto sampled = sample_kesten_truncated(nu, 20, rng, {10'000, OverflowPolicy::ResampleGrafts});
    const auto& st = std::get<SpineTree>(sampled);
    ASSERT_EQ(st.spine.size(), 21u);
    EXPECT_EQ(st.spine[0], Tree::root());
    const auto depths = st.tree.depths();
    for (std::uint32_t h = 1; h <= 20; ++h) {
      EXPECT_EQ(st.tree.parent(st.spine[h]), st.spine[h - 1]);
      EXPECT_EQ(depths[st.spine[h]], h);
    }
    // Removing every grafted subtree leaves exactly the spine path.
    std::vector<bool> on_spine(st.tree.size(), false);
    for (NodeId s : st.spine) on_spine[s] = true;
    std::size_t kept = 0;
    for (NodeId v = 0; v < st.tree.size(); ++v)
      if (on_spine[v]) {
        ++kept;
        EXPECT_TRUE(v == 0 || on_spine[st.tree.parent(v)]);
      }
    EXPECT_EQ(kept, 21u);
    // Spine vertices below the top have at least one child (the next spine vertex).
    for (std::uint32_t h = 0; h < 20; ++h) EXPECT_GE(st.tree.degree(st.spine[h]), 1u);
  }
}

TEST(Kesten, SpineDegreesAreSizeBiased) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  const LawHandle bar = size_biased(nu);
  std::map<std::uint64_t, std::uint64_t> observed;
  constexpr std::uint64_t kDraws = 20'000;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    RngStream rng = RngStream::substream(12, i);
    const auto st = std::get<SpineTree>(sample_kesten_truncated(nu, 1, rng, {1'000, OverflowPolicy::ResampleGrafts}));
    ++observed[st.tree.degree(st.spine[0])];
  }
  std::map<std::uint64_t, double> expected;
  for (std::uint64_t k = 1; k < 60; ++k) expected[k] = bar.pmf(k);
  EXPECT_TRUE(checks::chi_square(observed, expected, kDraws).passes());
}

TEST(Kesten, SpinePositionIsUniform) {
  // Given Y = 2 at the root, the spine child is first or second with probability 1/2.
  const LawHandle nu = make_law(family::Finite{{{0, 0.5}, {2, 0.5}}});
  std::map<std::uint64_t, std::uint64_t> position;
  constexpr std::uint64_t kDraws = 20'000;
  for (std::uint64_t i = 0; i < kDraws; ++i) {
    RngStream rng = RngStream::substream(13, i);
    const auto st = std::get<SpineTree>(sample_kesten_truncated(nu, 1, rng, {1'000, OverflowPolicy::ResampleGrafts}));
    const auto kids = st.tree.children(0);
    ++position[static_cast<std::uint64_t>(std::find(kids.begin(), kids.end(), st.spine[1]) - kids.begin())];
  }
  EXPECT_TRUE(checks::chi_square(position, std::map<std::uint64_t, double>{{0, 0.5}, {1, 0.5}}, kDraws).passes());
}

TEST(Kesten, MarkPolicyOverflows) {
  const LawHandle nu = make_law(family::Geometric{0.5});
  RngStream rng(3);
  auto r = sample_kesten_truncated(nu, 50, rng, {20, OverflowPolicy::Mark});
  EXPECT_TRUE(std::holds_alternative<OverflowMark>(r));
}

TEST(Kesten, ShorterHorizonIsAPrefix) {
  const LawHandle nu = make_law(family::Poisson{1.0});
  RngStream a(21), b(21);
  const auto small = std::get<SpineTree>(sample_kesten_truncated(nu, 5, a, {1'000, OverflowPolicy::ResampleGrafts}));
  const auto large = std::get<SpineTree>(sample_kesten_truncated(nu, 10, b, {1'000, OverflowPolicy::ResampleGrafts}));
  ASSERT_LT(small.tree.size(), large.tree.size());
  for (NodeId v = 1; v < small.tree.size(); ++v) EXPECT_EQ(small.tree.parent(v), large.tree.parent(v));
}
