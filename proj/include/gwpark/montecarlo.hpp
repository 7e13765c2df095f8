#pragma once

// Monte Carlo estimators for parking on Galton-Watson trees: mean flux and
// root occupancy on the unconditioned tree, flux per vertex on size-conditioned
// trees, the flux of Kesten's tree (directly and through its random-walk
// representation), and a two-sided check of the spinal decomposition.
//
// Every estimator takes a master seed. Replicate i draws from substream i of
// that seed and results are merged in replicate order, so output does not
// depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwpark/distributions.hpp"
#include "gwpark/error.hpp"
#include "gwpark/parallel.hpp"
#include "gwpark/parking.hpp"
#include "gwpark/rng.hpp"
#include "gwpark/stats.hpp"
#include "gwpark/theory.hpp"
#include "gwpark/tree.hpp"
#include "gwpark/tree_sampling.hpp"

namespace gwpark {

struct RunConfig {
  std::uint64_t reps = 10'000;
  /// Vertex cap for unconditioned trees.
  std::uint64_t cap = 1'000'000;
  std::uint64_t seed = 1;
  /// 0 means one worker per hardware thread.
  unsigned workers = 0;
};

/// Flux larger than this at the truncation horizon marks a replicate diverged.
inline constexpr std::uint64_t kDivergenceThreshold = 1000;
/// Fraction of diverged replicates that raises the diverged flag.
inline constexpr double kDivergencePrevalence = 0.01;

struct TreeOutcome {
  std::uint64_t flux = 0;
  std::uint64_t size = 0;
  std::uint8_t overflow = 0;
  std::uint8_t root_occupied = 0;
};

/// One parked unconditioned tree per replicate. Overflowed replicates carry
/// overflow = 1 and no flux. A tree is drawn before its labels from the same
/// stream, so raising the cap leaves every non-overflowed replicate unchanged.
inline std::vector<TreeOutcome> simulate_unconditioned(const LawHandle& offspring, const LawHandle& cars,
                                                       const RunConfig& cfg) {
  require_critical_offspring(offspring);
  return run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    thread_local std::vector<std::uint32_t> degrees;
    thread_local std::vector<std::uint64_t> counts, scratch;
    RngStream rng = RngStream::substream(cfg.seed, i);
    TreeOutcome out;
    std::uint64_t created = 0;
    if (!sample_gw_degrees(offspring, rng, cfg.cap, degrees, &created)) {
      out.overflow = 1;
      out.size = created;
      return out;
    }
    const Tree tree = Tree::from_bfs_degrees(degrees);
    counts.resize(tree.size());
    for (auto& c : counts) c = cars.sample(rng);
    bool occupied = false;
    out.flux = root_flux(tree, counts, scratch, &occupied);
    out.root_occupied = occupied;
    out.size = tree.size();
    return out;
  });
}

struct UnconditionedEstimates {
  Estimate mean_flux;
  Estimate root_parked;
};

inline UnconditionedEstimates summarize_unconditioned(const std::vector<TreeOutcome>& outcomes, std::uint64_t seed) {
  std::vector<double> flux, parked;
  flux.reserve(outcomes.size());
  parked.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.overflow) continue;
    flux.push_back(static_cast<double>(o.flux));
    parked.push_back(o.root_occupied);
  }
  if (flux.empty() && !outcomes.empty())
    throw Error(ErrorKind::AllOverflowed, "every replicate exceeded the vertex cap");
  return {summarize(flux, outcomes.size(), seed), summarize(parked, outcomes.size(), seed)};
}

/// E[phi(T)] over unconditioned trees, overflowed trees excluded and counted.
inline Estimate estimate_mean_flux(const LawHandle& offspring, const LawHandle& cars, const RunConfig& cfg) {
  return summarize_unconditioned(simulate_unconditioned(offspring, cars, cfg), cfg.seed).mean_flux;
}

/// P(root of T holds a car after parking).
inline Estimate estimate_root_parked_prob(const LawHandle& offspring, const LawHandle& cars, const RunConfig& cfg) {
  return summarize_unconditioned(simulate_unconditioned(offspring, cars, cfg), cfg.seed).root_parked;
}

struct CapSensitivity {
  UnconditionedEstimates at_cap;
  UnconditionedEstimates at_double_cap;
  /// |shift of the mean flux| in units of its standard error at the base cap.
  double mean_flux_shift_se = 0.0;
  double parked_shift_se = 0.0;
  bool stable = true;
};

/// Runs the unconditioned estimators at cap and 2 cap with the same seed.
/// Unstable (shift of either estimate >= 1 SE) marks both doubled-cap
/// estimates diverged.
inline CapSensitivity cap_sensitivity(const LawHandle& offspring, const LawHandle& cars, const RunConfig& cfg) {
  CapSensitivity s;
  s.at_cap = summarize_unconditioned(simulate_unconditioned(offspring, cars, cfg), cfg.seed);
  RunConfig doubled = cfg;
  doubled.cap = 2 * cfg.cap;
  s.at_double_cap = summarize_unconditioned(simulate_unconditioned(offspring, cars, doubled), cfg.seed);
  auto shift = [](const Estimate& a, const Estimate& b) {
    const double d = std::abs(a.point - b.point);
    return a.std_error > 0 ? d / a.std_error : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity());
  };
  s.mean_flux_shift_se = shift(s.at_cap.mean_flux, s.at_double_cap.mean_flux);
  s.parked_shift_se = shift(s.at_cap.root_parked, s.at_double_cap.root_parked);
  s.stable = s.mean_flux_shift_se < 1.0 && s.parked_shift_se < 1.0;
  if (!s.stable) {
    s.at_double_cap.mean_flux.diverged = true;
    s.at_double_cap.root_parked.diverged = true;
  }
  return s;
}

/// Root flux of T_n for each replicate.
inline std::vector<std::uint64_t> simulate_conditioned_fluxes(const LawHandle& offspring, const LawHandle& cars,
                                                              std::uint64_t n, const RunConfig& cfg) {
  require_critical_offspring(offspring);
  if (!is_admissible(offspring, n))
    throw Error(ErrorKind::Inadmissible, "no tree with " + std::to_string(n) + " vertices");
  return run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    thread_local std::vector<std::uint64_t> counts, scratch;
    RngStream rng = RngStream::substream(cfg.seed, i);
    const Tree tree = sample_gw_conditioned(offspring, n, rng);
    counts.resize(tree.size());
    for (auto& c : counts) c = cars.sample(rng);
    return root_flux(tree, counts, scratch);
  });
}

/// E[phi(T_n) / n].
inline Estimate estimate_flux_conditioned(const LawHandle& offspring, const LawHandle& cars, std::uint64_t n,
                                          const RunConfig& cfg) {
  const auto flux = simulate_conditioned_fluxes(offspring, cars, n, cfg);
  std::vector<double> ratio;
  ratio.reserve(flux.size());
  for (auto f : flux) ratio.push_back(static_cast<double>(f) / static_cast<double>(n));
  return summarize(ratio, cfg.seed);
}

/// Empirical law of a flux observed once per replicate.
struct FluxDistribution {
  std::vector<std::uint64_t> samples;
  IntHistogram histogram;
  std::uint64_t replicates = 0;
  std::uint64_t diverged_count = 0;
  bool diverged = false;
  /// Grafted trees redrawn for exceeding the cap.
  std::uint64_t resampled = 0;
  std::uint64_t seed = 0;

  double mean() const {
    long double s = 0;
    for (auto v : samples) s += v;
    return samples.empty() ? 0.0 : static_cast<double>(s / samples.size());
  }
};

namespace detail {

inline FluxDistribution finish_distribution(std::vector<std::uint64_t> samples, std::uint64_t threshold,
                                            std::uint64_t seed) {
  FluxDistribution d;
  d.replicates = samples.size();
  d.seed = seed;
  for (auto v : samples)
    if (v > threshold) ++d.diverged_count;
  d.diverged = d.replicates > 0 &&
               static_cast<double>(d.diverged_count) >= kDivergencePrevalence * static_cast<double>(d.replicates);
  d.histogram = histogram_of(samples);
  d.samples = std::move(samples);
  return d;
}

}  // namespace detail

/// Flux at the root of Kesten's tree cut at spine height H, by parking the
/// whole truncated tree. cfg.cap bounds each grafted tree; larger grafts are
/// redrawn. The tree and its labels use separate substreams, so the same
/// replicate at a larger H extends the same realization.
inline FluxDistribution estimate_flux_infinite_direct(const LawHandle& offspring, const LawHandle& cars,
                                                      std::uint32_t height, const RunConfig& cfg,
                                                      std::uint64_t divergence_threshold = kDivergenceThreshold) {
  require_critical_offspring(offspring);
  const LawHandle biased = size_biased(offspring);
  struct Rep {
    std::uint64_t flux = 0;
    std::uint64_t resampled = 0;
  };
  const auto reps = run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    thread_local std::vector<std::uint64_t> counts, scratch;
    const std::uint64_t key = derive_seed(cfg.seed, i);
    RngStream tree_rng(derive_seed(key, 0));
    RngStream label_rng(derive_seed(key, 1));
    auto sampled = sample_kesten_truncated(offspring, biased, height, tree_rng,
                                           {cfg.cap, OverflowPolicy::ResampleGrafts});
    const auto& st = std::get<SpineTree>(sampled);
    counts.resize(st.tree.size());
    for (auto& c : counts) c = cars.sample(label_rng);
    return Rep{root_flux(st.tree, counts, scratch), st.resampled_grafts};
  });
  std::vector<std::uint64_t> flux;
  std::uint64_t resampled = 0;
  for (const auto& r : reps) {
    flux.push_back(r.flux);
    resampled += r.resampled;
  }
  auto d = detail::finish_distribution(std::move(flux), divergence_threshold, cfg.seed);
  d.resampled = resampled;
  return d;
}

/// A pool of independent phi(T) draws (T conditioned on |T| <= cap).
struct FluxPool {
  std::vector<std::uint64_t> values;
  std::uint64_t resampled = 0;

  double mean() const {
    long double s = 0;
    for (auto v : values) s += v;
    return values.empty() ? 0.0 : static_cast<double>(s / values.size());
  }
  double variance() const {
    if (values.size() < 2) return 0.0;
    const long double m = mean();
    long double s = 0;
    for (auto v : values) s += (v - m) * (v - m);
    return static_cast<double>(s / (values.size() - 1));
  }
};

inline FluxPool build_flux_pool(const LawHandle& offspring, const LawHandle& cars, std::uint64_t size,
                                std::uint64_t cap, std::uint64_t seed, unsigned workers = 0) {
  require_critical_offspring(offspring);
  struct Draw {
    std::uint64_t flux = 0;
    std::uint64_t resampled = 0;
  };
  const auto draws = run_replicates(size, workers, [&](std::uint64_t i) {
    thread_local std::vector<std::uint32_t> degrees;
    thread_local std::vector<std::uint64_t> counts, scratch;
    RngStream rng = RngStream::substream(seed, i);
    Draw d;
    while (!sample_gw_degrees(offspring, rng, cap, degrees)) ++d.resampled;
    const Tree tree = Tree::from_bfs_degrees(degrees);
    counts.resize(tree.size());
    for (auto& c : counts) c = cars.sample(rng);
    d.flux = root_flux(tree, counts, scratch);
    return d;
  });
  FluxPool pool;
  pool.values.reserve(size);
  for (const auto& d : draws) {
    pool.values.push_back(d.flux);
    pool.resampled += d.resampled;
  }
  return pool;
}

/// Draws Z = F_1 + ... + F_{Y-1} + P: Y size-biased, F_i resampled from a flux
/// pool, P a car count. Z is the number of cars reaching a spine vertex from
/// its grafted trees plus those arriving on it.
class SpineIncrementSampler {
 public:
  SpineIncrementSampler(const LawHandle& offspring, const LawHandle& cars, std::vector<std::uint64_t> pool)
      : biased_(size_biased(offspring)), cars_(cars), pool_(std::move(pool)) {
    if (pool_.empty()) throw Error(ErrorKind::InvalidSpec, "flux pool is empty");
  }

  std::uint64_t draw(RngStream& rng) const {
    const std::uint64_t y = biased_.sample(rng);
    std::uint64_t z = 0;
    for (std::uint64_t g = 1; g < y; ++g) z += pool_[rng.below(pool_.size())];
    return z + cars_.sample(rng);
  }

  std::size_t pool_size() const { return pool_.size(); }

 private:
  LawHandle biased_;
  LawHandle cars_;
  std::vector<std::uint64_t> pool_;
};

/// The walk W_h = Z_0 + ... + Z_h - (h + 1) for h = 0..H.
struct WalkPath {
  std::vector<std::int64_t> increments;
  std::vector<std::int64_t> partial_sums;
  std::vector<std::int64_t> running_max;

  std::size_t horizon() const { return partial_sums.size() - 1; }
  /// sup_{h' <= h} W_{h'} v 0: flux of Kesten's tree cut at height h.
  std::uint64_t flux_at(std::size_t h) const {
    return static_cast<std::uint64_t>(std::max<std::int64_t>(0, running_max.at(h)));
  }
  double mean_z() const {
    long double s = 0;
    for (auto d : increments) s += d + 1;
    return static_cast<double>(s / increments.size());
  }
};

inline WalkPath sample_walk(const SpineIncrementSampler& sampler, std::uint32_t height, RngStream& rng) {
  WalkPath w;
  w.increments.reserve(height + 1);
  w.partial_sums.reserve(height + 1);
  w.running_max.reserve(height + 1);
  std::int64_t s = 0, best = std::numeric_limits<std::int64_t>::min();
  for (std::uint32_t h = 0; h <= height; ++h) {
    const auto z = static_cast<std::int64_t>(sampler.draw(rng));
    s += z - 1;
    best = std::max(best, s);
    w.increments.push_back(z - 1);
    w.partial_sums.push_back(s);
    w.running_max.push_back(best);
  }
  return w;
}

/// Pool sizes below this multiple of the expected number of pool draws raise
/// the pool_too_small warning.
inline constexpr double kPoolSafetyFactor = 10.0;

struct WalkFluxResult {
  FluxDistribution distribution;
  /// E[Z]; the error combines replicate spread and the pool's own noise.
  Estimate mean_z;
  std::uint64_t pool_size = 0;
  std::uint64_t pool_resampled = 0;
  /// Expected pool draws divided by pool size.
  double resampling_ratio = 0.0;
  bool pool_too_small = false;
};

inline WalkFluxResult estimate_flux_infinite_walk(const LawHandle& offspring, const LawHandle& cars,
                                                  std::uint32_t height, std::uint64_t pool_size,
                                                  const RunConfig& cfg,
                                                  std::uint64_t divergence_threshold = kDivergenceThreshold) {
  require_critical_offspring(offspring);
  if (pool_size == 0) throw Error(ErrorKind::InvalidSpec, "pool size must be positive");
  FluxPool pool = build_flux_pool(offspring, cars, pool_size, cfg.cap, derive_seed(cfg.seed, 0x706f6f6cULL),
                                  cfg.workers);
  WalkFluxResult result;
  result.pool_size = pool_size;
  result.pool_resampled = pool.resampled;
  const double pool_mean = pool.mean();
  const double pool_var = pool.variance();
  const SpineIncrementSampler sampler(offspring, cars, std::move(pool.values));

  struct Rep {
    std::uint64_t flux = 0;
    double mean_z = 0.0;
  };
  const auto reps = run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    RngStream rng = RngStream::substream(cfg.seed, i);
    const WalkPath w = sample_walk(sampler, height, rng);
    return Rep{w.flux_at(height), w.mean_z()};
  });
  std::vector<std::uint64_t> flux;
  std::vector<double> zbar;
  for (const auto& r : reps) {
    flux.push_back(r.flux);
    zbar.push_back(r.mean_z);
  }
  result.distribution = detail::finish_distribution(std::move(flux), divergence_threshold, cfg.seed);
  result.mean_z = summarize(zbar, cfg.seed);
  const double grafts = offspring.variance();
  const double pool_se2 = grafts * grafts * pool_var / static_cast<double>(pool_size);
  result.mean_z.std_error = std::sqrt(result.mean_z.std_error * result.mean_z.std_error + pool_se2);
  const double expected_draws = static_cast<double>(cfg.reps) * (height + 1.0) * grafts;
  result.resampling_ratio = expected_draws / static_cast<double>(pool_size);
  result.pool_too_small = result.resampling_ratio * kPoolSafetyFactor > 1.0;
  (void)pool_mean;
  return result;
}

/// F(Pruned(t, x), Top(t, x)) = 1{|x| = height, |Top(t, x)| = top_size},
/// or the zero functional.
struct SpinalFunctional {
  std::uint32_t height = 0;
  std::uint64_t top_size = 1;
  bool zero = false;

  double operator()(std::uint32_t pointed_height, std::uint64_t size) const {
    return !zero && pointed_height == height && size == top_size ? 1.0 : 0.0;
  }
};

namespace detail {

// |T| if it is at most `limit`, else limit + 1, exploring at most that many vertices.
inline std::uint64_t gw_size_up_to(const LawHandle& offspring, std::uint64_t limit, RngStream& rng) {
  std::uint64_t total = 1;
  for (std::uint64_t v = 0; v < total; ++v) {
    total += offspring.sample(rng);
    if (total > limit) return limit + 1;
  }
  return total;
}

}  // namespace detail

struct SpinalCheck {
  Estimate lhs;
  Estimate rhs;
  double gap_in_se() const {
    const double se = combined_se(lhs, rhs);
    const double d = std::abs(lhs.point - rhs.point);
    return se > 0 ? d / se : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
};

/// Two independent Monte Carlo estimates of the two sides of the spinal
/// decomposition for a functional supported on a single height:
///   lhs = E[sum_{x in T} F(Pruned(T, x), Top(T, x))],
///   rhs = sum_h E[F(Pruned(T_inf, S_h), T')], T' independent.
/// The left side explores T generation by generation up to the functional's
/// height and each subtree above it only until its size exceeds the target,
/// so no vertex cap is needed.
inline SpinalCheck spinal_check(const LawHandle& offspring, const SpinalFunctional& f, const RunConfig& cfg) {
  require_critical_offspring(offspring);
  const std::uint64_t limit = f.top_size;
  const std::uint64_t lhs_seed = derive_seed(cfg.seed, 0), rhs_seed = derive_seed(cfg.seed, 1);

  const auto lhs = run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    RngStream rng = RngStream::substream(lhs_seed, i);
    double sum = 0.0;
    if (f.zero) return sum;
    std::uint64_t generation = 1;
    for (std::uint32_t h = 0; h < f.height && generation > 0; ++h) {
      std::uint64_t next = 0;
      for (std::uint64_t v = 0; v < generation; ++v) next += offspring.sample(rng);
      generation = next;
    }
    for (std::uint64_t v = 0; v < generation; ++v) sum += f(f.height, detail::gw_size_up_to(offspring, limit, rng));
    return sum;
  });

  const auto rhs = run_replicates(cfg.reps, cfg.workers, [&](std::uint64_t i) {
    RngStream rng = RngStream::substream(rhs_seed, i);
    double sum = 0.0;
    if (f.zero) return sum;
    // S_h sits at height h in Pruned(T_inf, S_h); terms with h > f.height vanish.
    const std::uint64_t size = detail::gw_size_up_to(offspring, limit, rng);
    for (std::uint32_t h = 0; h <= f.height; ++h) sum += f(h, size);
    return sum;
  });
  return {summarize(lhs, lhs_seed), summarize(rhs, rhs_seed)};
}

/// Car families parametrized by their mean, for sweeps over m.
enum class CarFamily { Poisson, Geometric, Bernoulli };

inline LawHandle car_law_with_mean(CarFamily family, double m) {
  switch (family) {
    case CarFamily::Poisson: return make_law(family::Poisson{m});
    case CarFamily::Geometric: return make_law(family::Geometric{1.0 / (1.0 + m)});
    case CarFamily::Bernoulli: return make_law(family::Binomial{1, m});
  }
  throw Error(ErrorKind::InvalidSpec, "unknown car family");
}

struct SweepConfig {
  RunConfig trees;
  /// Size of the conditioned trees; 0 skips the conditioned estimator.
  std::uint64_t n = 1000;
  std::uint64_t reps_n = 100;
};

struct SweepRow {
  double m = 0.0;
  double theta = 0.0;
  RegimeKind regime = RegimeKind::Subcritical;
  Extended phi1;
  std::optional<Estimate> mean_flux;
  std::optional<Estimate> parked_prob;
  std::optional<Estimate> flux_per_n;
  double overflow_frac = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;
};

/// One row per grid value of m. Row r runs with seed derive_seed(master, r);
/// its unconditioned estimates reproduce with that seed, its conditioned
/// estimate with derive_seed(row seed, 1).
inline std::vector<SweepRow> sweep(const LawHandle& offspring, CarFamily family, const std::vector<double>& grid,
                                   const SweepConfig& cfg) {
  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    SweepRow row;
    row.m = grid[r];
    row.seed = derive_seed(cfg.trees.seed, r);
    try {
      const LawHandle cars = car_law_with_mean(family, row.m);
      const ModelParams p = params_from_laws(offspring, cars);
      const Regime reg = classify(p);
      row.theta = reg.theta;
      row.regime = reg.kind;
      row.phi1 = phi_closed_form(1.0, p);
      RunConfig run = cfg.trees;
      run.seed = row.seed;
      try {
        const auto est = summarize_unconditioned(simulate_unconditioned(offspring, cars, run), run.seed);
        row.mean_flux = est.mean_flux;
        row.parked_prob = est.root_parked;
        row.overflow_frac = est.mean_flux.overflow_fraction();
      } catch (const Error& e) {
        row.flags.emplace_back(e.what());
      }
      if (cfg.n > 0) {
        RunConfig cond = cfg.trees;
        cond.reps = cfg.reps_n;
        cond.seed = derive_seed(row.seed, 1);
        try {
          row.flux_per_n = estimate_flux_conditioned(offspring, cars, cfg.n, cond);
        } catch (const Error& e) {
          row.flags.emplace_back(e.what());
        }
      }
    } catch (const Error& e) {
      row.flags.emplace_back(e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gwpark
