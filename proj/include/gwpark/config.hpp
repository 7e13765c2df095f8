#pragma once

// Experiment configuration: distribution specs in JSON and in the
// `family:params` command-line shorthand, and the validated parameter set a
// subcommand runs with.

#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwpark/distributions.hpp"
#include "gwpark/error.hpp"
#include "gwpark/montecarlo.hpp"

namespace gwpark {

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::Config, "bad number for " + std::string(what) + ": '" + s + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::Config, "bad integer for " + std::string(what) + ": '" + s + "'");
  return v;
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                std::string_view where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + std::string(where));
}

}  // namespace detail

/// Parses `poisson:1`, `geometric:0.5`, `binomial:4,0.25`, `bernoulli:0.3`,
/// `finite:0=0.5,2=0.5`, `zeta:3.5` or `delta:2`.
inline DistSpec parse_dist_shorthand(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::Config, "distribution must be family:params, got '" + std::string(text) + "'");
  const std::string name = detail::trim(text.substr(0, colon));
  const std::string_view args = text.substr(colon + 1);
  if (name == "poisson") return family::Poisson{detail::parse_double(args, "poisson rate")};
  if (name == "geometric") return family::Geometric{detail::parse_double(args, "geometric success")};
  if (name == "bernoulli") return family::Binomial{1, detail::parse_double(args, "bernoulli probability")};
  if (name == "zeta") return family::Zeta{detail::parse_double(args, "zeta exponent")};
  if (name == "delta") return family::Finite{{{detail::parse_uint(args, "delta value"), 1.0}}};
  if (name == "binomial") {
    const auto parts = detail::split(args, ',');
    if (parts.size() != 2) throw Error(ErrorKind::Config, "binomial takes trials,prob");
    const auto trials = detail::parse_uint(parts[0], "binomial trials");
    if (trials > 100000) throw Error(ErrorKind::Config, "binomial trials too large");
    return family::Binomial{static_cast<std::uint32_t>(trials), detail::parse_double(parts[1], "binomial prob")};
  }
  if (name == "finite") {
    family::Finite f;
    for (const auto& item : detail::split(args, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "finite entries are value=prob");
      f.pmf.emplace_back(detail::parse_uint(item.substr(0, eq), "finite value"),
                         detail::parse_double(item.substr(eq + 1), "finite prob"));
    }
    return f;
  }
  throw Error(ErrorKind::Config, "unknown distribution family '" + name + "'");
}

/// Canonical JSON form, e.g. {"family": "poisson", "rate": 1}.
inline nlohmann::json dist_to_json(const DistSpec& spec) {
  return std::visit(
      [](const auto& f) -> nlohmann::json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Poisson>) {
          return {{"family", "poisson"}, {"rate", f.rate}};
        } else if constexpr (std::is_same_v<F, family::Geometric>) {
          return {{"family", "geometric"}, {"success", f.success}};
        } else if constexpr (std::is_same_v<F, family::Binomial>) {
          return {{"family", "binomial"}, {"trials", f.trials}, {"prob", f.prob}};
        } else if constexpr (std::is_same_v<F, family::Finite>) {
          nlohmann::json pmf = nlohmann::json::array();
          for (const auto& [k, p] : f.pmf) pmf.push_back({k, p});
          return {{"family", "finite"}, {"pmf", pmf}};
        } else {
          return {{"family", "zeta"}, {"exponent", f.exponent}};
        }
      },
      spec);
}

/// Accepts the canonical object form or a shorthand string.
inline DistSpec dist_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_dist_shorthand(j.get<std::string>());
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw Error(ErrorKind::Config, "distribution needs a \"family\" field");
  const std::string name = j["family"].get<std::string>();
  try {
    if (name == "poisson") {
      detail::reject_unknown_keys(j, {"family", "rate"}, "poisson");
      return family::Poisson{j.at("rate").get<double>()};
    }
    if (name == "geometric") {
      detail::reject_unknown_keys(j, {"family", "success"}, "geometric");
      return family::Geometric{j.at("success").get<double>()};
    }
    if (name == "binomial") {
      detail::reject_unknown_keys(j, {"family", "trials", "prob"}, "binomial");
      return family::Binomial{j.at("trials").get<std::uint32_t>(), j.at("prob").get<double>()};
    }
    if (name == "zeta") {
      detail::reject_unknown_keys(j, {"family", "exponent"}, "zeta");
      return family::Zeta{j.at("exponent").get<double>()};
    }
    if (name == "finite") {
      detail::reject_unknown_keys(j, {"family", "pmf"}, "finite");
      family::Finite f;
      for (const auto& entry : j.at("pmf")) {
        if (!entry.is_array() || entry.size() != 2) throw Error(ErrorKind::Config, "pmf entries are [value, prob]");
        f.pmf.emplace_back(entry[0].get<std::uint64_t>(), entry[1].get<double>());
      }
      return f;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad ") + name + " spec: " + e.what());
  }
  throw Error(ErrorKind::Config, "unknown distribution family '" + name + "'");
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw Error(ErrorKind::Config, "format must be csv or json, got '" + std::string(s) + "'");
}

inline CarFamily parse_car_family(std::string_view s) {
  if (s == "poisson") return CarFamily::Poisson;
  if (s == "geometric") return CarFamily::Geometric;
  if (s == "bernoulli") return CarFamily::Bernoulli;
  throw Error(ErrorKind::Config, "car family must be poisson, geometric or bernoulli, got '" + std::string(s) + "'");
}

/// Everything a subcommand may need. Fields a subcommand does not use are ignored.
struct ExperimentConfig {
  std::optional<DistSpec> offspring;
  std::optional<DistSpec> cars;
  std::uint64_t n = 1000;
  std::uint64_t reps = 10'000;
  std::uint64_t cap = 1'000'000;
  std::uint32_t H = 100;
  std::vector<double> grid;
  double step = 1e-4;
  double t = 1.0;
  std::uint32_t h0 = 0;
  std::uint64_t k = 1;
  std::uint64_t pool = 1'000'000;
  std::uint64_t reps_n = 100;
  CarFamily car_family = CarFamily::Poisson;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output;
  OutputFormat format = OutputFormat::Csv;

  RunConfig run() const { return {reps, cap, seed, threads}; }

  void validate() const {
    if (reps == 0) throw Error(ErrorKind::Config, "reps must be positive");
    if (cap == 0) throw Error(ErrorKind::Config, "cap must be positive");
    if (n == 0) throw Error(ErrorKind::Config, "n must be positive");
    if (!(step > 0.0)) throw Error(ErrorKind::Config, "step must be positive");
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::Config, "t must lie in [0, 1]");
    if (k == 0) throw Error(ErrorKind::Config, "k must be positive");
    if (pool == 0) throw Error(ErrorKind::Config, "pool must be positive");
    for (double m : grid)
      if (!(m >= 0.0) || !std::isfinite(m)) throw Error(ErrorKind::Config, "grid values must be finite and nonnegative");
  }
};

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"offspring", "cars", "n",    "reps",       "cap",  "H",
                                          "grid",      "step", "t",    "h0",         "k",    "pool",
                                          "reps_n",    "car_family", "seed", "threads", "output", "format"};
  return keys;
}

/// Overlays the keys present in `j` onto `cfg`. Unknown keys are an error.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  detail::reject_unknown_keys(j, config_keys(), "config");
  try {
    if (j.contains("offspring")) cfg.offspring = dist_from_json(j["offspring"]);
    if (j.contains("cars")) cfg.cars = dist_from_json(j["cars"]);
    if (j.contains("n")) cfg.n = j["n"].get<std::uint64_t>();
    if (j.contains("reps")) cfg.reps = j["reps"].get<std::uint64_t>();
    if (j.contains("cap")) cfg.cap = j["cap"].get<std::uint64_t>();
    if (j.contains("H")) cfg.H = j["H"].get<std::uint32_t>();
    if (j.contains("grid")) cfg.grid = j["grid"].get<std::vector<double>>();
    if (j.contains("step")) cfg.step = j["step"].get<double>();
    if (j.contains("t")) cfg.t = j["t"].get<double>();
    if (j.contains("h0")) cfg.h0 = j["h0"].get<std::uint32_t>();
    if (j.contains("k")) cfg.k = j["k"].get<std::uint64_t>();
    if (j.contains("pool")) cfg.pool = j["pool"].get<std::uint64_t>();
    if (j.contains("reps_n")) cfg.reps_n = j["reps_n"].get<std::uint64_t>();
    if (j.contains("car_family")) cfg.car_family = parse_car_family(j["car_family"].get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
    if (j.contains("format")) cfg.format = parse_format(j["format"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad config value: ") + e.what());
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  apply_json(cfg, j);
  cfg.validate();
  return cfg;
}

}  // namespace gwpark
