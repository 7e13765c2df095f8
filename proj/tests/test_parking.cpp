#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gwpark/parking.hpp"
#include "gwpark/tree_sampling.hpp"

using namespace gwpark;

namespace {

Tree path(std::size_t n) {
  std::vector<NodeId> parents(n);
  parents[0] = kNoParent;
  for (NodeId v = 1; v < n; ++v) parents[v] = v - 1;
  return Tree::from_parents(std::move(parents));
}

std::vector<std::uint64_t> identity_order(std::uint64_t cars) {
  std::vector<std::uint64_t> order(cars);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

TEST(Parking, PathOfThree) {
  // Root <- 1 <- 2 with labels 0, 1, 2: the leaf keeps one car and sends one
  // up, vertex 1 keeps one and sends one to the empty root.
  const ParkingResult r = park(path(3), std::vector<std::uint64_t>{0, 1, 2});
  EXPECT_EQ(r.flux, 0u);
  EXPECT_EQ(r.edge_flux, (std::vector<std::uint64_t>{0, 1, 1}));
  EXPECT_EQ(r.occupied, (std::vector<std::uint8_t>{1, 1, 1}));
}

TEST(Parking, HandCheckedStar) {
  // Root with three leaves holding 3, 0, 2 cars and 1 car on the root.
  const Tree star = Tree::from_parents({kNoParent, 0, 0, 0});
  const ParkingResult r = park(star, std::vector<std::uint64_t>{1, 3, 0, 2});
  EXPECT_EQ(r.edge_flux, (std::vector<std::uint64_t>{0, 2, 0, 1}));
  EXPECT_EQ(r.flux, 3u);
  EXPECT_EQ(r.occupied, (std::vector<std::uint8_t>{1, 1, 0, 1}));
}

TEST(Parking, EmptyAndSaturated) {
  const Tree t = path(5);
  EXPECT_EQ(park(t, std::vector<std::uint64_t>(5, 0)).flux, 0u);
  EXPECT_EQ(park(t, std::vector<std::uint64_t>(5, 0)).occupied_count(), 0u);
  EXPECT_EQ(park(t, std::vector<std::uint64_t>(5, 1)).flux, 0u);
  EXPECT_EQ(park(t, std::vector<std::uint64_t>(5, 2)).flux, 5u);
  EXPECT_EQ(park(t, std::vector<std::uint64_t>{0, 0, 0, 0, 7}).flux, 2u);
}

TEST(Parking, LabelMismatch) {
  try {
    park(path(3), std::vector<std::uint64_t>{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LabelMismatch);
  }
}

TEST(Parking, SequentialRejectsBadOrders) {
  CarLabels labels{{1, 1, 0}, std::nullopt};
  const Tree t = path(3);
  EXPECT_THROW(park_sequential(t, labels, std::vector<std::uint64_t>{0}), Error);
  EXPECT_THROW(park_sequential(t, labels, std::vector<std::uint64_t>{0, 0}), Error);
  EXPECT_THROW(park_sequential(t, labels, std::vector<std::uint64_t>{0, 2}), Error);
  EXPECT_EQ(park_sequential(t, labels, std::vector<std::uint64_t>{1, 0}), park(t, labels));
}

class RandomInstances : public ::testing::Test {
 protected:
  struct Instance {
    Tree tree;
    CarLabels labels;
  };

  static Instance make(std::uint64_t i, bool with_times = false) {
    static const LawHandle nu = make_law(family::Geometric{0.5});
    static const LawHandle cars = make_law(family::Poisson{0.8});
    RngStream rng = RngStream::substream(77, i);
    Tree t = sample_gw_conditioned(nu, 1 + rng.below(60), rng);
    CarLabels labels = assign_arrivals(t, cars, rng, with_times);
    return {std::move(t), std::move(labels)};
  }
};

TEST_F(RandomInstances, AbelianAgainstSequentialOracle) {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto inst = make(i);
    const ParkingResult fast = park(inst.tree, inst.labels);
    auto order = identity_order(inst.labels.total());
    RngStream rng = RngStream::substream(78, i);
    std::shuffle(order.begin(), order.end(), rng);
    ASSERT_EQ(park_sequential(inst.tree, inst.labels, order), fast) << "instance " << i;
    std::reverse(order.begin(), order.end());
    ASSERT_EQ(park_sequential(inst.tree, inst.labels, order), fast) << "instance " << i;
  }
}

TEST_F(RandomInstances, ConservationAndRootRule) {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto inst = make(i);
    const ParkingResult r = park(inst.tree, inst.labels);
    EXPECT_EQ(inst.labels.total(), r.flux + r.occupied_count());
    if (!r.occupied[0]) EXPECT_EQ(r.flux, 0u);
    std::vector<std::uint64_t> scratch;
    bool root_occupied = false;
    EXPECT_EQ(root_flux(inst.tree, inst.labels.counts, scratch, &root_occupied), r.flux);
    EXPECT_EQ(root_occupied, r.occupied[0] != 0);
  }
}

TEST_F(RandomInstances, AddingACarIsMonotone) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto inst = make(i);
    const ParkingResult before = park(inst.tree, inst.labels);
    RngStream rng = RngStream::substream(79, i);
    CarLabels more = inst.labels;
    ++more.counts[rng.below(more.counts.size())];
    const ParkingResult after = park(inst.tree, more);
    EXPECT_GE(after.flux, before.flux);
    EXPECT_LE(after.flux, before.flux + 1);
    for (std::size_t v = 0; v < before.occupied.size(); ++v) {
      EXPECT_GE(after.occupied[v], before.occupied[v]);
      EXPECT_GE(after.edge_flux[v], before.edge_flux[v]);
    }
  }
}

TEST_F(RandomInstances, PlanarOrderDoesNotMatter) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto inst = make(i);
    const ParkingResult base = park(inst.tree, inst.labels);
    RngStream rng = RngStream::substream(80, i);
    Tree shuffled = inst.tree;
    for (NodeId v = 0; v < shuffled.size(); ++v) {
      std::vector<std::uint32_t> perm(shuffled.degree(v));
      std::iota(perm.begin(), perm.end(), 0u);
      std::shuffle(perm.begin(), perm.end(), rng);
      shuffled = shuffled.with_children_permuted(v, perm);
    }
    EXPECT_EQ(park(shuffled, inst.labels), base);
  }
}

TEST_F(RandomInstances, ThinnedFluxIsMonotoneInTime) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto inst = make(i, true);
    std::uint64_t previous = 0;
    for (int k = 0; k <= 10; ++k) {
      const std::uint64_t f = park_thinned(inst.tree, inst.labels, k / 10.0).flux;
      EXPECT_GE(f, previous);
      previous = f;
    }
    EXPECT_EQ(park_thinned(inst.tree, inst.labels, 1.0), park(inst.tree, inst.labels));
    EXPECT_EQ(park_thinned(inst.tree, inst.labels, 0.0).occupied_count(), 0u);
  }
}

TEST(Parking, ThinningNeedsTimes) {
  CarLabels labels{{1, 2}, std::nullopt};
  try {
    thinned_labels(labels, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingTimes);
  }
}

TEST(Parking, DeepPathDoesNotRecurse) {
  constexpr std::size_t n = 1'000'000;
  std::vector<std::uint64_t> counts(n, 0);
  counts.back() = n + 5;
  EXPECT_EQ(park(path(n), counts).flux, 5u);
}
