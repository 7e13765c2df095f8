#pragma once

// Closed forms for parking on critical Galton-Watson trees: the phase
// parameter, the regime, the blow-up time of the mean flux and the mean flux
// itself, plus an independent numerical route through the integral equation
// the mean flux satisfies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwpark/distributions.hpp"
#include "gwpark/error.hpp"

namespace gwpark {

/// A real number or +infinity. Never encodes infinity as a large float.
class Extended {
 public:
  constexpr Extended() = default;
  constexpr explicit Extended(double v) : value_(v) {}
  static constexpr Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }
  double value() const {
    if (infinite_) throw Error(ErrorKind::InvalidParams, "value of an infinite quantity");
    return value_;
  }
  /// IEEE view, +inf for the marker.
  constexpr double as_double() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  friend constexpr bool operator==(const Extended&, const Extended&) = default;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

/// Car mean m, car variance sigma^2 (possibly +inf) and offspring variance Sigma^2.
struct ModelParams {
  double m = 0.0;
  double sigma2 = 0.0;
  double Sigma2 = 1.0;

  bool car_variance_infinite() const { return std::isinf(sigma2); }

  /// E[L(L-1)] = sigma^2 + m^2 - m.
  double factorial_moment() const { return sigma2 + m * m - m; }

  void validate() const {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorKind::InvalidParams, "car mean must be positive");
    if (!(sigma2 >= 0.0)) throw Error(ErrorKind::InvalidParams, "car variance must be nonnegative");
    if (!(Sigma2 > 0.0) || !std::isfinite(Sigma2))
      throw Error(ErrorKind::InvalidParams, "offspring variance must be positive and finite");
    if (!car_variance_infinite() && factorial_moment() < -1e-12 * std::max(1.0, m * m))
      throw Error(ErrorKind::InvalidParams, "sigma^2 + m^2 - m must be nonnegative");
  }
};

inline ModelParams params_from_laws(const LawHandle& offspring, const LawHandle& cars) {
  if (std::abs(offspring.mean() - 1.0) > kCriticalTolerance)
    throw Error(ErrorKind::NotCritical, "offspring law must have mean 1");
  ModelParams p{cars.mean(), cars.variance(), offspring.variance()};
  p.validate();
  return p;
}

enum class RegimeKind { Subcritical, Critical, Supercritical };

constexpr std::string_view to_string(RegimeKind r) {
  switch (r) {
    case RegimeKind::Subcritical: return "Subcritical";
    case RegimeKind::Critical: return "Critical";
    case RegimeKind::Supercritical: return "Supercritical";
  }
  return "?";
}

struct Regime {
  RegimeKind kind = RegimeKind::Subcritical;
  double theta = 0.0;
  /// Unset when t_max is not defined (m > 1 or infinite car variance).
  std::optional<Extended> t_max;
};

/// Theta = (1 - m)^2 - Sigma^2 (sigma^2 + m^2 - m). -inf for infinite car variance.
inline double theta(const ModelParams& p) {
  p.validate();
  if (p.car_variance_infinite()) return -std::numeric_limits<double>::infinity();
  return (1.0 - p.m) * (1.0 - p.m) - p.Sigma2 * p.factorial_moment();
}

inline double critical_tolerance(const ModelParams& p) { return 1e-12 * std::max(1.0, (1.0 - p.m) * (1.0 - p.m)); }

/// Smallest positive root of (1 - m t)^2 = t Sigma^2 (sigma^2 + m^2 - m), or
/// +inf when the right-hand coefficient vanishes (at most one car per vertex,
/// so no car ever fails to park before t = 1/m).
inline Extended t_max(const ModelParams& p) {
  p.validate();
  if (p.m > 1.0) throw Error(ErrorKind::InvalidParams, "t_max requires m <= 1");
  if (p.car_variance_infinite()) throw Error(ErrorKind::InvalidParams, "t_max requires finite car variance");
  const double k = p.Sigma2 * std::max(0.0, p.factorial_moment());
  if (k == 0.0) return Extended::infinity();
  // m^2 t^2 - (2m + k) t + 1 = 0; the smaller root, written without cancellation.
  const double b = 2.0 * p.m + k;
  const double disc = std::sqrt(k * (4.0 * p.m + k));
  return Extended(2.0 / (b + disc));
}

inline Regime classify(const ModelParams& p) {
  p.validate();
  Regime r;
  r.theta = theta(p);
  if (p.m > 1.0 || p.car_variance_infinite()) {
    r.kind = RegimeKind::Supercritical;
    return r;
  }
  const double tol = critical_tolerance(p);
  if (r.theta > tol) {
    r.kind = RegimeKind::Subcritical;
  } else if (r.theta < -tol) {
    r.kind = RegimeKind::Supercritical;
  } else {
    r.kind = RegimeKind::Critical;
  }
  r.t_max = t_max(p);
  return r;
}

/// (1 - m t)^2 - t Sigma^2 (sigma^2 + m^2 - m).
inline double flux_discriminant(double t, const ModelParams& p) {
  const double a = 1.0 - p.m * t;
  return a * a - t * p.Sigma2 * p.factorial_moment();
}

/// Mean flux Phi(t) of an unconditioned tree with thinned car law mu_t.
inline Extended phi_closed_form(double t, const ModelParams& p) {
  p.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in [0, 1]");
  if (t == 0.0) return Extended(0.0);
  if (p.car_variance_infinite()) return Extended::infinity();
  if (p.m > 1.0) {
    // No monotone-root guarantee past m = 1; only the region before the first
    // root of the discriminant is meaningful.
    const double k = p.Sigma2 * p.factorial_moment();
    const double tm = 2.0 / (2.0 * p.m + k + std::sqrt(k * (4.0 * p.m + k)));
    if (t > tm) return Extended::infinity();
  } else if (const Extended tm = t_max(p); tm.is_finite() && t > tm.value() * (1.0 + 1e-12)) {
    return Extended::infinity();
  }
  const double d = std::max(0.0, flux_discriminant(t, p));
  return Extended(((1.0 - p.m * t) - std::sqrt(d)) / p.Sigma2);
}

/// Right-hand side of Phi'(s) = (E[L(L-1)]/2 + m Phi) / (1 - m s - Sigma^2 Phi).
struct MeanFluxOde {
  ModelParams p;
  double min_denominator = 1e-6;

  double denominator(double s, double phi) const { return 1.0 - p.m * s - p.Sigma2 * phi; }

  double operator()(double s, double phi) const {
    const double den = denominator(s, phi);
    if (!(den >= min_denominator))
      throw Error(ErrorKind::SingularityApproached, "denominator below threshold at s=" + std::to_string(s));
    return (0.5 * p.factorial_moment() + p.m * phi) / den;
  }
};

namespace detail {

// Classical fourth-order Runge-Kutta from (t0, y0) to t1 with steps of at most `step`.
template <class F>
double rk4_integrate(const F& f, double t0, double y0, double t1, double step) {
  if (t1 <= t0) return y0;
  const auto steps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil((t1 - t0) / step - 1e-9)));
  const double h = (t1 - t0) / static_cast<double>(steps);
  double y = y0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double s = t0 + static_cast<double>(i) * h;
    const double k1 = f(s, y);
    const double k2 = f(s + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(s + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(s + h, y + h * k3);
    y += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  return y;
}

}  // namespace detail

/// Phi(t) by integrating the mean-flux integral equation from Phi(0) = 0.
inline double phi_ode(double t, const ModelParams& p, double step = 1e-4) {
  p.validate();
  if (p.car_variance_infinite()) throw Error(ErrorKind::InvalidParams, "finite car variance required");
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParams, "t must be nonnegative");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParams, "step must be positive");
  return detail::rk4_integrate(MeanFluxOde{p}, 0.0, 0.0, t, step);
}

/// phi_ode on an increasing grid in a single pass (each grid interval is
/// integrated with steps of at most `step`).
inline std::vector<double> phi_ode_grid(std::span<const double> grid, const ModelParams& p, double step = 1e-4) {
  p.validate();
  if (p.car_variance_infinite()) throw Error(ErrorKind::InvalidParams, "finite car variance required");
  const MeanFluxOde f{p};
  std::vector<double> out;
  out.reserve(grid.size());
  double t = 0.0, y = 0.0;
  for (double g : grid) {
    if (g < t) throw Error(ErrorKind::InvalidParams, "grid must be increasing and nonnegative");
    y = detail::rk4_integrate(f, t, y, g, step);
    t = g;
    out.push_back(y);
  }
  return out;
}

/// Sigma^2 E[phi(T)] + m - 1: equals -sqrt(Theta) when Theta >= 0, +inf otherwise.
inline Extended root_flux_identity(const ModelParams& p) {
  const Regime r = classify(p);
  if (r.kind == RegimeKind::Supercritical) return Extended::infinity();
  const Extended phi1 = phi_closed_form(1.0, p);
  if (phi1.is_infinite()) return Extended::infinity();
  return Extended(p.Sigma2 * phi1.value() + p.m - 1.0);
}

}  // namespace gwpark
