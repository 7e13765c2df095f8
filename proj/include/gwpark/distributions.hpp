#pragma once

// Discrete laws on {0, 1, 2, ...}: car arrivals, offspring counts, and the
// size-biased and thinned laws derived from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "gwpark/error.hpp"
#include "gwpark/rng.hpp"

namespace gwpark {

namespace family {

struct Poisson {
  double rate = 0.0;
};

/// P(k) = p (1 - p)^k on {0, 1, ...}.
struct Geometric {
  double success = 0.5;
};

struct Binomial {
  std::uint32_t trials = 0;
  double prob = 0.0;
};

/// Explicit table of (value, probability) pairs.
struct Finite {
  std::vector<std::pair<std::uint64_t, double>> pmf;
};

/// P(k) proportional to (k + 1)^-exponent. Heavy tailed: infinite variance for
/// exponent <= 3. Requires exponent > 2 so that the mean is finite.
struct Zeta {
  double exponent = 3.0;
};

}  // namespace family

using DistSpec = std::variant<family::Poisson, family::Geometric, family::Binomial,
                              family::Finite, family::Zeta>;

inline constexpr double kFiniteNormTolerance = 1e-12;
inline constexpr double kCriticalTolerance = 1e-9;

inline std::string describe(const DistSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Poisson>) {
          os << "poisson(" << f.rate << ")";
        } else if constexpr (std::is_same_v<F, family::Geometric>) {
          os << "geometric(" << f.success << ")";
        } else if constexpr (std::is_same_v<F, family::Binomial>) {
          os << "binomial(" << f.trials << "," << f.prob << ")";
        } else if constexpr (std::is_same_v<F, family::Finite>) {
          os << "finite(";
          for (std::size_t i = 0; i < f.pmf.size(); ++i) {
            if (i) os << ",";
            os << f.pmf[i].first << "=" << f.pmf[i].second;
          }
          os << ")";
        } else {
          os << "zeta(" << f.exponent << ")";
        }
      },
      spec);
  return os.str();
}

struct OffspringReport {
  double mean = 0.0;
  double variance = 0.0;
  bool variance_infinite = false;
  bool is_critical = false;
  std::uint64_t period = 1;
  bool is_delta1 = false;
};

namespace detail {

inline double poisson_pmf(double rate, std::uint64_t k) {
  if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(-rate + kd * std::log(rate) - std::lgamma(kd + 1.0));
}

inline double geometric_pmf(double p, std::uint64_t k) {
  if (p == 1.0) return k == 0 ? 1.0 : 0.0;
  return p * std::pow(1.0 - p, static_cast<double>(k));
}

inline double binomial_pmf(std::uint32_t n, double p, std::uint64_t k) {
  if (k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double nd = n, kd = static_cast<double>(k);
  const double log_choose = std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1);
  return std::exp(log_choose + kd * std::log(p) + (nd - kd) * std::log1p(-p));
}

// Zipf on {1, 2, ...} with P(x) proportional to x^-a, a > 1 (Devroye, Non-Uniform
// Random Variate Generation, X.6.1). Exact rejection sampler.
inline std::uint64_t sample_zipf(double a, RngStream& rng) {
  const double b = std::pow(2.0, a - 1.0);
  for (;;) {
    const double u = 1.0 - rng.uniform();
    const double v = rng.uniform();
    const double x = std::floor(std::pow(u, -1.0 / (a - 1.0)));
    if (!(x < 1e18)) continue;
    const double t = std::pow(1.0 + 1.0 / x, a - 1.0);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::uint64_t>(x);
  }
}

inline double primitive_pmf(const DistSpec& spec, std::uint64_t k) {
  return std::visit(
      [k](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Poisson>) {
          return poisson_pmf(f.rate, k);
        } else if constexpr (std::is_same_v<F, family::Geometric>) {
          return geometric_pmf(f.success, k);
        } else if constexpr (std::is_same_v<F, family::Binomial>) {
          return binomial_pmf(f.trials, f.prob, k);
        } else if constexpr (std::is_same_v<F, family::Finite>) {
          for (const auto& [v, p] : f.pmf)
            if (v == k) return p;
          return 0.0;
        } else {
          return std::pow(static_cast<double>(k) + 1.0, -f.exponent) / boost::math::zeta(f.exponent);
        }
      },
      spec);
}

enum class LawKind { Primitive, SizeBiased, Thinned };

struct LawState {
  LawKind kind = LawKind::Primitive;
  DistSpec spec;
  std::shared_ptr<const LawState> base;
  double t = 1.0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<std::uint64_t> support_max;
  std::uint64_t gcd = 1;
  std::string name;
  // Inversion table: cdf[k] = P(X <= k), covering all but ~1e-16 of the mass.
  std::vector<double> cdf;

  double pmf(std::uint64_t k) const {
    switch (kind) {
      case LawKind::Primitive: return primitive_pmf(spec, k);
      case LawKind::SizeBiased: return static_cast<double>(k) * base->pmf(k);
      case LawKind::Thinned: return (k == 0 ? 1.0 - t : 0.0) + t * base->pmf(k);
    }
    return 0.0;
  }

  void build_table() {
    constexpr std::uint64_t kMaxTable = 1 << 16;
    double acc = 0.0;
    const std::uint64_t last = support_max.value_or(kMaxTable - 1);
    for (std::uint64_t k = 0; k <= last && k < kMaxTable; ++k) {
      acc += pmf(k);
      cdf.push_back(acc);
      if (!support_max && acc >= 1.0 - 1e-16) break;
    }
    if (support_max) cdf.back() = 1.0;
  }

  // Sequential inversion beyond the table, for laws with unbounded support.
  std::uint64_t tail_inversion(double u) const {
    std::uint64_t k = cdf.size() - 1;
    double acc = cdf.back();
    double prev = 1.0;
    while (acc <= u) {
      ++k;
      const double p = pmf(k);
      if (p == 0.0 && prev == 0.0) break;
      acc += p;
      prev = p;
    }
    return k;
  }

  std::uint64_t table_inversion(double u) const {
    if (u >= cdf.back()) return tail_inversion(u);
    // Linear scan near the front covers light-tailed laws with small means.
    const std::uint64_t front = std::min<std::uint64_t>(cdf.size(), 16);
    for (std::uint64_t k = 0; k < front; ++k)
      if (u < cdf[k]) return k;
    return static_cast<std::uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  }

  std::uint64_t sample(RngStream& rng) const {
    switch (kind) {
      case LawKind::Thinned:
        if (t < 1.0 && rng.uniform() >= t) return 0;
        return base->sample(rng);
      case LawKind::SizeBiased:
        break;
      case LawKind::Primitive:
        if (const auto* g = std::get_if<family::Geometric>(&spec)) {
          if (g->success == 1.0) return 0;
          const double u = 1.0 - rng.uniform();  // (0, 1]
          return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-g->success)));
        }
        if (const auto* z = std::get_if<family::Zeta>(&spec)) return sample_zipf(z->exponent, rng) - 1;
        break;
    }
    return table_inversion(rng.uniform());
  }
};

}  // namespace detail

/// An immutable, validated law with exact moments and an exact sampler.
/// Cheap to copy (shared ownership of the immutable state).
class LawHandle {
 public:
  double mean() const { return state_->mean; }
  /// +infinity when the law has no second moment.
  double variance() const { return state_->variance; }
  bool variance_infinite() const { return std::isinf(state_->variance); }
  const std::string& name() const { return state_->name; }

  /// The family parameters, for laws built directly from a spec.
  const DistSpec* spec() const {
    return state_->kind == detail::LawKind::Primitive ? &state_->spec : nullptr;
  }

  double pmf(std::uint64_t k) const { return state_->pmf(k); }

  /// Largest value of the support, if finite.
  std::optional<std::uint64_t> support_max() const { return state_->support_max; }

  /// gcd of the positive part of the support (1 for an empty positive part).
  std::uint64_t positive_support_gcd() const { return state_->gcd; }

  /// Values k >= 1 with positive mass, when the support is finite.
  std::optional<std::vector<std::uint64_t>> finite_positive_support() const {
    if (!state_->support_max) return std::nullopt;
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 1; k <= *state_->support_max; ++k)
      if (pmf(k) > 0.0) out.push_back(k);
    return out;
  }

  bool is_delta(std::uint64_t value) const { return pmf(value) == 1.0; }

  std::uint64_t sample(RngStream& rng) const { return state_->sample(rng); }

  /// Number of leading values covered by the inversion table.
  std::size_t table_size() const { return state_->cdf.size(); }

  explicit LawHandle(std::shared_ptr<const detail::LawState> state) : state_(std::move(state)) {}

  const std::shared_ptr<const detail::LawState>& state() const { return state_; }

 private:
  std::shared_ptr<const detail::LawState> state_;
};

/// Moments from the pmf by direct summation over the first `terms` values.
struct PmfMoments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

inline PmfMoments moments_from_pmf(const LawHandle& law, std::uint64_t terms) {
  long double mass = 0, m1 = 0, m2 = 0;
  for (std::uint64_t k = 0; k < terms; ++k) {
    const long double p = law.pmf(k);
    const long double kd = static_cast<long double>(k);
    mass += p;
    m1 += kd * p;
    m2 += kd * kd * p;
  }
  return {static_cast<double>(mass), static_cast<double>(m1),
          static_cast<double>(m2 - m1 * m1)};
}

inline LawHandle make_law(const DistSpec& input) {
  auto im = std::make_shared<detail::LawState>();
  im->kind = detail::LawKind::Primitive;
  im->spec = input;
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto invalid = [&](const std::string& why) {
    return Error(ErrorKind::InvalidSpec, describe(input) + ": " + why);
  };

  std::visit(
      [&](auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Poisson>) {
          if (!(f.rate >= 0.0) || !std::isfinite(f.rate) || f.rate > 500.0)
            throw invalid("rate must lie in [0, 500]");
          im->mean = f.rate;
          im->variance = f.rate;
          if (f.rate == 0.0) im->support_max = 0;
        } else if constexpr (std::is_same_v<F, family::Geometric>) {
          if (!(f.success > 0.0 && f.success <= 1.0)) throw invalid("success probability must lie in (0, 1]");
          im->mean = (1.0 - f.success) / f.success;
          im->variance = (1.0 - f.success) / (f.success * f.success);
          if (f.success == 1.0) im->support_max = 0;
        } else if constexpr (std::is_same_v<F, family::Binomial>) {
          if (!(f.prob >= 0.0 && f.prob <= 1.0)) throw invalid("probability must lie in [0, 1]");
          im->mean = f.trials * f.prob;
          im->variance = f.trials * f.prob * (1.0 - f.prob);
          im->support_max = f.prob == 0.0 ? 0 : f.trials;
          if (f.prob == 1.0) im->gcd = f.trials == 0 ? 1 : f.trials;
        } else if constexpr (std::is_same_v<F, family::Finite>) {
          if (f.pmf.empty()) throw invalid("empty pmf");
          std::sort(f.pmf.begin(), f.pmf.end());
          double total = 0.0;
          for (std::size_t i = 0; i < f.pmf.size(); ++i) {
            if (i && f.pmf[i].first == f.pmf[i - 1].first) throw invalid("duplicate value");
            if (!(f.pmf[i].second >= 0.0) || !std::isfinite(f.pmf[i].second))
              throw invalid("negative probability");
            total += f.pmf[i].second;
          }
          if (std::abs(total - 1.0) > kFiniteNormTolerance) throw invalid("probabilities do not sum to 1");
          for (auto& entry : f.pmf) entry.second /= total;
          std::erase_if(f.pmf, [](const auto& e) { return e.second == 0.0; });
          long double m1 = 0, m2 = 0;
          std::uint64_t g = 0;
          for (const auto& [v, p] : f.pmf) {
            m1 += static_cast<long double>(v) * p;
            m2 += static_cast<long double>(v) * v * p;
            if (v > 0) g = std::gcd(g, v);
          }
          im->mean = static_cast<double>(m1);
          im->variance = static_cast<double>(std::max<long double>(0, m2 - m1 * m1));
          im->support_max = f.pmf.back().first;
          im->gcd = g == 0 ? 1 : g;
        } else {
          if (!(f.exponent > 2.0) || !std::isfinite(f.exponent)) throw invalid("exponent must exceed 2");
          const double z = boost::math::zeta(f.exponent);
          im->mean = boost::math::zeta(f.exponent - 1.0) / z - 1.0;
          if (f.exponent > 3.0) {
            const double second = boost::math::zeta(f.exponent - 2.0) / z;  // E[(k+1)^2]
            const double m_plus = im->mean + 1.0;
            im->variance = second - m_plus * m_plus;
          } else {
            im->variance = inf;
          }
        }
      },
      im->spec);

  im->name = describe(im->spec);
  im->build_table();
  return LawHandle(std::move(im));
}

/// Size-biased law k * p_k of a mean-one law.
inline LawHandle size_biased(const LawHandle& offspring) {
  if (std::abs(offspring.mean() - 1.0) > kCriticalTolerance)
    throw Error(ErrorKind::NotCritical, "size-biasing requires mean 1, got " + std::to_string(offspring.mean()));
  if (offspring.variance_infinite())
    throw Error(ErrorKind::InvalidSpec, "size-biased law of an infinite-variance law has infinite mean");
  auto im = std::make_shared<detail::LawState>();
  im->kind = detail::LawKind::SizeBiased;
  im->base = offspring.state();
  im->mean = offspring.variance() + 1.0;
  im->support_max = offspring.support_max();
  im->gcd = offspring.positive_support_gcd();
  im->name = "size_biased(" + offspring.name() + ")";
  im->build_table();
  // Third moment of the base law, summed over the table range.
  long double m2 = 0;
  for (std::size_t k = 0; k < im->cdf.size(); ++k) {
    const long double kd = static_cast<long double>(k);
    m2 += kd * kd * im->pmf(k);
  }
  if (const auto* z = offspring.spec() ? std::get_if<family::Zeta>(offspring.spec()) : nullptr;
      z && z->exponent <= 4.0) {
    im->variance = std::numeric_limits<double>::infinity();
  } else {
    im->variance = static_cast<double>(std::max<long double>(0, m2 - static_cast<long double>(im->mean) * im->mean));
  }
  return LawHandle(std::move(im));
}

/// Law of a car count revealed with probability t: (1 - t) delta_0 + t * law.
inline LawHandle thin(const LawHandle& cars, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidSpec, "thinning time must lie in [0, 1]");
  auto im = std::make_shared<detail::LawState>();
  im->kind = detail::LawKind::Thinned;
  im->base = cars.state();
  im->t = t;
  const double m = cars.mean();
  im->mean = t * m;
  im->variance = cars.variance_infinite() ? cars.variance() : t * cars.variance() + t * (1.0 - t) * m * m;
  im->support_max = t == 0.0 ? std::optional<std::uint64_t>(0) : cars.support_max();
  im->gcd = cars.positive_support_gcd();
  std::ostringstream name;
  name.precision(17);
  name << "thin(" << cars.name() << "," << t << ")";
  im->name = name.str();
  im->build_table();
  return LawHandle(std::move(im));
}

inline OffspringReport check_offspring(const LawHandle& law) {
  OffspringReport r;
  r.mean = law.mean();
  r.variance = law.variance();
  r.variance_infinite = law.variance_infinite();
  r.is_critical = std::abs(law.mean() - 1.0) <= kCriticalTolerance;
  r.period = law.positive_support_gcd();
  r.is_delta1 = law.is_delta(1);
  return r;
}

}  // namespace gwpark
