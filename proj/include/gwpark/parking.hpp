#pragma once

// The parking process on a plane tree. Cars arrive on vertices, each vertex
// holds one car, and a car that finds its spot taken drives towards the root
// until it finds a free vertex or leaves through the root.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "gwpark/distributions.hpp"
#include "gwpark/error.hpp"
#include "gwpark/rng.hpp"
#include "gwpark/tree.hpp"

namespace gwpark {

/// Car arrivals per vertex, optionally with an arrival time in [0, 1].
struct CarLabels {
  std::vector<std::uint64_t> counts;
  std::optional<std::vector<double>> times;

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
};

struct ParkingResult {
  /// Cars leaving through the root.
  std::uint64_t flux = 0;
  /// occupied[v] != 0 iff a car is parked on v.
  std::vector<std::uint8_t> occupied;
  /// Cars crossing the edge from v to its parent. Zero at the root, whose
  /// outgoing cars are counted by `flux`.
  std::vector<std::uint64_t> edge_flux;

  std::uint64_t occupied_count() const {
    return static_cast<std::uint64_t>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
  }

  friend bool operator==(const ParkingResult&, const ParkingResult&) = default;
};

/// i.i.d. arrivals from `cars`, visiting nodes in index order. With `with_times`
/// each node also receives an independent uniform arrival time in (0, 1].
inline CarLabels assign_arrivals(const Tree& tree, const LawHandle& cars, RngStream& rng, bool with_times = false) {
  CarLabels labels;
  labels.counts.resize(tree.size());
  if (with_times) labels.times.emplace(tree.size());
  for (NodeId v = 0; v < tree.size(); ++v) {
    labels.counts[v] = cars.sample(rng);
    if (with_times) (*labels.times)[v] = 1.0 - rng.uniform();  // (0, 1]
  }
  return labels;
}

/// Single reverse sweep: the outgoing flux of v is
/// (sum of children's outgoing flux + cars arriving at v - 1)^+.
inline ParkingResult park(const Tree& tree, std::span<const std::uint64_t> counts) {
  const std::size_t n = tree.size();
  if (counts.size() != n) throw Error(ErrorKind::LabelMismatch, "labels do not cover the tree");
  ParkingResult r;
  r.occupied.assign(n, 0);
  r.edge_flux.assign(n, 0);
  std::vector<std::uint64_t> incoming(counts.begin(), counts.end());
  const auto parents = tree.parents();
  for (std::size_t v = n; v-- > 0;) {
    const std::uint64_t arriving = incoming[v];
    const std::uint64_t out = arriving > 0 ? arriving - 1 : 0;
    r.occupied[v] = arriving > 0;
    if (v == Tree::root()) {
      r.flux = out;
    } else {
      r.edge_flux[v] = out;
      incoming[parents[v]] += out;
    }
  }
  return r;
}

inline ParkingResult park(const Tree& tree, const CarLabels& labels) { return park(tree, labels.counts); }

/// Flux at the root only, without building the full result.
inline std::uint64_t root_flux(const Tree& tree, std::span<const std::uint64_t> counts,
                               std::vector<std::uint64_t>& scratch, bool* root_occupied = nullptr) {
  const std::size_t n = tree.size();
  if (counts.size() != n) throw Error(ErrorKind::LabelMismatch, "labels do not cover the tree");
  scratch.assign(counts.begin(), counts.end());
  const auto parents = tree.parents();
  for (std::size_t v = n - 1; v > 0; --v)
    if (scratch[v] > 1) scratch[parents[v]] += scratch[v] - 1;
  if (root_occupied) *root_occupied = scratch[0] > 0;
  return scratch[0] > 0 ? scratch[0] - 1 : 0;
}

/// Drives the cars one at a time in the given order. Car j belongs to the
/// vertex v with prefix(v) <= j < prefix(v) + counts[v], prefix taken in index
/// order. Quadratic in the worst case; meant as an oracle for park().
inline ParkingResult park_sequential(const Tree& tree, const CarLabels& labels, std::span<const std::uint64_t> order) {
  const std::size_t n = tree.size();
  if (labels.counts.size() != n) throw Error(ErrorKind::LabelMismatch, "labels do not cover the tree");
  std::vector<NodeId> owner;
  for (NodeId v = 0; v < n; ++v) owner.insert(owner.end(), labels.counts[v], v);
  if (order.size() != owner.size()) throw Error(ErrorKind::BadPermutation, "order must list every car once");
  std::vector<bool> seen(owner.size(), false);
  for (std::uint64_t car : order) {
    if (car >= owner.size() || seen[car]) throw Error(ErrorKind::BadPermutation, "order must list every car once");
    seen[car] = true;
  }

  ParkingResult r;
  r.occupied.assign(n, 0);
  r.edge_flux.assign(n, 0);
  for (std::uint64_t car : order) {
    NodeId at = owner[car];
    for (;;) {
      if (!r.occupied[at]) {
        r.occupied[at] = 1;
        break;
      }
      if (at == Tree::root()) {
        ++r.flux;
        break;
      }
      ++r.edge_flux[at];
      at = tree.parent(at);
    }
  }
  return r;
}

/// Cars with arrival time <= t only.
inline CarLabels thinned_labels(const CarLabels& labels, double t) {
  if (!labels.times) throw Error(ErrorKind::MissingTimes, "labels carry no arrival times");
  if (labels.times->size() != labels.counts.size()) throw Error(ErrorKind::LabelMismatch, "times do not match counts");
  CarLabels out;
  out.counts.resize(labels.counts.size());
  for (std::size_t v = 0; v < out.counts.size(); ++v)
    out.counts[v] = (*labels.times)[v] <= t ? labels.counts[v] : 0;
  return out;
}

inline ParkingResult park_thinned(const Tree& tree, const CarLabels& labels, double t) {
  return park(tree, thinned_labels(labels, t));
}

}  // namespace gwpark
