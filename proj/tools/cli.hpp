#pragma once

// The gwpark command-line front end. run_cli() is separate from main() so the
// tests can drive it with captured streams.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwpark/gwpark.hpp"

namespace gwpark::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEstimator = 3;
inline constexpr int kExitIo = 4;

/// Environment variable naming the directory reports go to when --output is absent.
inline constexpr const char* kOutputDirEnv = "GWPARK_OUTPUT_DIR";

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::AllOverflowed:
    case ErrorKind::RejectionBudgetExceeded:
    case ErrorKind::SingularityApproached:
    case ErrorKind::Inadmissible: return kExitEstimator;
    default: return kExitConfig;
  }
}

/// Named trees for park-demo: pathN, starN, code:<preorder degrees>,
/// parents:<p1,p2,...> (parent of vertices 1.. in order, each below its child).
inline Tree parse_tree_descriptor(const std::string& text) {
  auto count = [&](std::size_t prefix) {
    const auto n = detail::parse_uint(text.substr(prefix), "tree size");
    if (n == 0 || n > 1'000'000) throw Error(ErrorKind::Config, "tree size must lie in [1, 1e6]");
    return n;
  };
  if (text.rfind("path", 0) == 0) {
    const auto n = count(4);
    std::vector<NodeId> parents(n);
    parents[0] = kNoParent;
    for (NodeId v = 1; v < n; ++v) parents[v] = v - 1;
    return Tree::from_parents(std::move(parents));
  }
  if (text.rfind("star", 0) == 0) {
    const auto n = count(4);
    std::vector<NodeId> parents(n, 0);
    parents[0] = kNoParent;
    return Tree::from_parents(std::move(parents));
  }
  if (text.rfind("code:", 0) == 0) {
    // Single digits may be run together (code:2100); otherwise comma-separated.
    const std::string body = text.substr(5);
    if (body.find(',') == std::string::npos) return tree_from_shape_code(body);
    std::vector<std::uint32_t> degrees;
    for (const auto& d : detail::split(body, ','))
      degrees.push_back(static_cast<std::uint32_t>(detail::parse_uint(d, "degree")));
    return Tree::from_preorder_degrees(degrees);
  }
  if (text.rfind("parents:", 0) == 0) {
    std::vector<NodeId> parents{kNoParent};
    if (text.size() > 8)
      for (const auto& p : detail::split(text.substr(8), ','))
        parents.push_back(static_cast<NodeId>(detail::parse_uint(p, "parent")));
    return Tree::from_parents(std::move(parents));
  }
  throw Error(ErrorKind::Config, "unknown tree '" + text + "' (use pathN, starN, code:..., parents:...)");
}

inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (detail::trim(text).empty()) return grid;
  for (const auto& s : detail::split(text, ',')) grid.push_back(detail::parse_double(s, "grid"));
  return grid;
}

namespace detail_cli {

// Raw command-line values that need parsing after CLI11 is done.
struct Raw {
  std::string offspring, cars, config, format, output, grid, car_family, tree, labels;
  std::string method = "both";
  bool unconditioned = false;
  bool no_sensitivity = false;
};

struct Options {
  // config key -> option, for letting explicit flags win over the config file
  std::map<std::string, CLI::Option*> by_key;
};

}  // namespace detail_cli

class App {
 public:
  App(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Parking on critical Galton-Watson trees: closed forms and Monte Carlo", "gwpark"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    struct Sub {
      const char* name;
      const char* help;
    };
    const std::vector<Sub> subs{
        {"regime", "Theta, regime and t_max"},
        {"phi", "Mean flux Phi(t), closed form"},
        {"ode", "Mean flux by integrating its integral equation, next to the closed form"},
        {"sample-tree", "Sample a GW tree (size-conditioned unless --unconditioned) and dump it"},
        {"park-demo", "Park cars on a named tree"},
        {"mean-flux", "Estimate E[phi(T)] with a cap-doubling check"},
        {"parked-prob", "Estimate P(root of T is occupied) with a cap-doubling check"},
        {"flux-n", "Estimate E[phi(T_n)/n]"},
        {"flux-inf", "Flux of Kesten's tree cut at height H (direct, walk or both)"},
        {"spinal-check", "Both sides of the spinal decomposition for 1{height=h0, |Top|=k}"},
        {"sweep", "Theory and estimates over a grid of car means"},
    };
    std::map<std::string, CLI::App*> apps;
    std::map<std::string, detail_cli::Options> opts;
    for (const auto& s : subs) {
      CLI::App* sub = app.add_subcommand(s.name, s.help);
      apps[s.name] = sub;
      add_options(sub, opts[s.name]);
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out_, err_);
      return kExitConfig;
    }

    std::string name;
    for (const auto& [n, sub] : apps)
      if (sub->parsed()) name = n;

    try {
      finish_config(opts[name]);
      return dispatch(name);
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  const ExperimentConfig& config() const { return cfg_; }

 private:
  void add_options(CLI::App* sub, detail_cli::Options& o) {
    auto& k = o.by_key;
    k["offspring"] = sub->add_option("--offspring", raw_.offspring, "Offspring law, e.g. poisson:1");
    k["cars"] = sub->add_option("--cars", raw_.cars, "Car law, e.g. poisson:0.25");
    sub->add_option("--config", raw_.config, "JSON config file; explicit flags override it");
    k["seed"] = sub->add_option("--seed", cfg_.seed, "Master seed");
    k["threads"] = sub->add_option("--threads", cfg_.threads, "Worker threads (0: all cores)");
    k["output"] = sub->add_option("--output,-o", raw_.output, "Output file ('-' for stdout)");
    k["format"] = sub->add_option("--format", raw_.format, "csv or json");
    k["n"] = sub->add_option("--n", cfg_.n, "Tree size for conditioned trees");
    k["reps"] = sub->add_option("--reps", cfg_.reps, "Replicates");
    k["cap"] = sub->add_option("--cap", cfg_.cap, "Vertex cap for unconditioned trees");
    k["H"] = sub->add_option("--H", cfg_.H, "Spine height of the truncated Kesten tree");
    k["grid"] = sub->add_option("--grid", raw_.grid, "Comma-separated values (car means for sweep, times for ode)");
    k["step"] = sub->add_option("--step", cfg_.step, "Integration step");
    k["t"] = sub->add_option("--t", cfg_.t, "Time in [0, 1]");
    k["h0"] = sub->add_option("--h0", cfg_.h0, "Height in the spinal functional");
    k["k"] = sub->add_option("--k", cfg_.k, "Top size in the spinal functional");
    k["pool"] = sub->add_option("--pool", cfg_.pool, "Flux pool size for the walk representation");
    k["reps_n"] = sub->add_option("--reps-n", cfg_.reps_n, "Replicates of the conditioned estimator in sweep");
    k["car_family"] = sub->add_option("--car-family", raw_.car_family, "poisson, geometric or bernoulli (sweep)");
    sub->add_option("--tree", raw_.tree, "Tree for park-demo: pathN, starN, code:..., parents:...");
    sub->add_option("--labels", raw_.labels, "Comma-separated car counts in node order (park-demo)");
    sub->add_option("--method", raw_.method, "direct, walk or both (flux-inf)")
        ->check(CLI::IsMember({"direct", "walk", "both"}));
    sub->add_flag("--unconditioned", raw_.unconditioned, "sample-tree: unconditioned tree capped at --cap");
    sub->add_flag("--no-sensitivity", raw_.no_sensitivity, "Skip the cap-doubling rerun");
  }

  void finish_config(const detail_cli::Options& o) {
    auto given = [&](const std::string& key) {
      const auto it = o.by_key.find(key);
      return it != o.by_key.end() && it->second->count() > 0;
    };
    if (!raw_.config.empty()) {
      std::ifstream f(raw_.config);
      if (!f) throw Error(ErrorKind::Config, "cannot read config " + raw_.config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
      // Explicit flags win: drop their keys before overlaying, but still
      // reject unknown keys.
      detail::reject_unknown_keys(j, config_keys(), "config");
      nlohmann::json overlay = nlohmann::json::object();
      for (const auto& [key, value] : j.items())
        if (!given(key)) overlay[key] = value;
      apply_json(cfg_, overlay);
    }
    if (given("offspring")) cfg_.offspring = parse_dist_shorthand(raw_.offspring);
    if (given("cars")) cfg_.cars = parse_dist_shorthand(raw_.cars);
    if (given("output")) cfg_.output = raw_.output;
    if (given("format")) cfg_.format = parse_format(raw_.format);
    if (given("grid")) cfg_.grid = parse_grid(raw_.grid);
    if (given("car_family")) cfg_.car_family = parse_car_family(raw_.car_family);
    cfg_.validate();
  }

  LawHandle offspring_law() const {
    if (!cfg_.offspring) throw Error(ErrorKind::Config, "--offspring is required");
    return make_law(*cfg_.offspring);
  }

  LawHandle car_law() const {
    if (!cfg_.cars) throw Error(ErrorKind::Config, "--cars is required");
    LawHandle cars = make_law(*cfg_.cars);
    if (cars.is_delta(1)) err_ << "warning: car law is delta_1 (every vertex gets exactly one car)\n";
    return cars;
  }

  ModelParams params() const { return params_from_laws(offspring_law(), car_law()); }

  void emit(const std::string& name, const std::string& content) {
    std::string path = cfg_.output;
    if (path.empty()) {
      if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
        path = (std::filesystem::path(dir) /
                (name + (cfg_.format == OutputFormat::Json ? ".json" : ".csv")))
                   .string();
      }
    }
    write_text(path, content, out_);
  }

  static std::string estimate_csv(const std::string& quantity, const Estimate& e, const std::string& extra_cols,
                                  const std::string& extra_vals) {
    std::ostringstream os;
    os << "quantity,point,se,replicates,overflow_count,overflow_frac,diverged,median_of_means,seed" << extra_cols
       << '\n';
    os << quantity << ',' << format_real(e.point) << ',' << format_real(e.std_error) << ',' << e.replicates << ','
       << e.overflow_count << ',' << format_real(e.overflow_fraction()) << ',' << (e.diverged ? 1 : 0) << ','
       << (e.median_of_means ? 1 : 0) << ',' << e.seed << extra_vals << '\n';
    return os.str();
  }

  int dispatch(const std::string& name) {
    if (name == "regime") return cmd_regime();
    if (name == "phi") return cmd_phi();
    if (name == "ode") return cmd_ode();
    if (name == "sample-tree") return cmd_sample_tree();
    if (name == "park-demo") return cmd_park_demo();
    if (name == "mean-flux") return cmd_unconditioned(true);
    if (name == "parked-prob") return cmd_unconditioned(false);
    if (name == "flux-n") return cmd_flux_n();
    if (name == "flux-inf") return cmd_flux_inf();
    if (name == "spinal-check") return cmd_spinal();
    if (name == "sweep") return cmd_sweep();
    throw Error(ErrorKind::Config, "unknown subcommand " + name);
  }

  int cmd_regime() {
    const ModelParams p = params();
    const Regime r = classify(p);
    const std::string tmax = r.t_max ? format_real(r.t_max->as_double()) : "undefined";
    if (cfg_.format == OutputFormat::Json) {
      nlohmann::json j{{"m", real_to_json(p.m)},
                       {"sigma2", real_to_json(p.sigma2)},
                       {"Sigma2", real_to_json(p.Sigma2)},
                       {"theta", real_to_json(r.theta)},
                       {"regime", std::string(to_string(r.kind))},
                       {"t_max", r.t_max ? real_to_json(r.t_max->as_double()) : nlohmann::json(nullptr)}};
      emit("regime", j.dump(2) + "\n");
    } else {
      std::ostringstream os;
      os << "m,sigma2,Sigma2,theta,regime,t_max\n"
         << format_real(p.m) << ',' << format_real(p.sigma2) << ',' << format_real(p.Sigma2) << ','
         << format_real(r.theta) << ',' << to_string(r.kind) << ',' << tmax << '\n';
      emit("regime", os.str());
    }
    return kExitOk;
  }

  int cmd_phi() {
    const ModelParams p = params();
    const Extended v = phi_closed_form(cfg_.t, p);
    if (cfg_.format == OutputFormat::Json) {
      emit("phi", nlohmann::json{{"t", real_to_json(cfg_.t)}, {"phi", real_to_json(v.as_double())}}.dump(2) + "\n");
    } else {
      emit("phi", "t,phi\n" + format_real(cfg_.t) + "," + format_real(v.as_double()) + "\n");
    }
    return kExitOk;
  }

  int cmd_ode() {
    const ModelParams p = params();
    std::vector<double> grid = cfg_.grid;
    if (grid.empty())
      for (int i = 0; i <= 10; ++i) grid.push_back(cfg_.t * i / 10.0);
    const auto ode = phi_ode_grid(grid, p, cfg_.step);
    nlohmann::json arr = nlohmann::json::array();
    std::ostringstream os;
    os << "t,phi_ode,phi_closed,abs_diff\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double closed = phi_closed_form(grid[i], p).as_double();
      const double diff = std::abs(ode[i] - closed);
      os << format_real(grid[i]) << ',' << format_real(ode[i]) << ',' << format_real(closed) << ','
         << format_real(diff) << '\n';
      arr.push_back({{"t", real_to_json(grid[i])},
                     {"phi_ode", real_to_json(ode[i])},
                     {"phi_closed", real_to_json(closed)},
                     {"abs_diff", real_to_json(diff)}});
    }
    emit("ode", cfg_.format == OutputFormat::Json ? arr.dump(2) + "\n" : os.str());
    return kExitOk;
  }

  int cmd_sample_tree() {
    const LawHandle off = offspring_law();
    RngStream rng(cfg_.seed);
    Tree tree;
    if (raw_.unconditioned) {
      require_critical_offspring(off);
      auto t = sample_gw(off, rng, cfg_.cap);
      if (std::holds_alternative<OverflowMark>(t))
        throw Error(ErrorKind::AllOverflowed, "tree exceeded the cap of " + std::to_string(cfg_.cap));
      tree = std::get<Tree>(std::move(t));
    } else {
      tree = sample_gw_conditioned(off, cfg_.n, rng);
    }
    if (cfg_.format == OutputFormat::Json) {
      const auto order = tree.preorder();
      std::vector<std::int64_t> rank(tree.size());
      for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<std::int64_t>(i);
      nlohmann::json nodes = nlohmann::json::array();
      for (NodeId v : order)
        nodes.push_back({rank[v], v == Tree::root() ? -1 : rank[tree.parent(v)], tree.degree(v)});
      emit("sample-tree", nlohmann::json{{"size", tree.size()}, {"seed", cfg_.seed}, {"nodes", nodes}}.dump() + "\n");
    } else {
      std::ostringstream os;
      dump_tree(os, tree);
      emit("sample-tree", os.str());
    }
    return kExitOk;
  }

  int cmd_park_demo() {
    if (raw_.tree.empty()) throw Error(ErrorKind::Config, "--tree is required");
    const Tree tree = parse_tree_descriptor(raw_.tree);
    CarLabels labels;
    if (raw_.labels.empty()) {
      RngStream rng(cfg_.seed);
      labels = assign_arrivals(tree, car_law(), rng);
    } else {
      for (const auto& s : detail::split(raw_.labels, ',')) labels.counts.push_back(detail::parse_uint(s, "label"));
    }
    if (labels.counts.size() != tree.size())
      throw Error(ErrorKind::LabelMismatch, "expected " + std::to_string(tree.size()) + " labels, got " +
                                                std::to_string(labels.counts.size()));
    const ParkingResult r = park(tree, labels);
    std::vector<std::uint64_t> edges(r.edge_flux.begin() + 1, r.edge_flux.end());
    if (cfg_.format == OutputFormat::Json) {
      nlohmann::json j{{"flux", r.flux},
                       {"edge_flux", edges},
                       {"occupied", r.occupied},
                       {"cars", labels.counts}};
      emit("park-demo", j.dump(2) + "\n");
    } else {
      auto join = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
      };
      std::ostringstream os;
      os << "flux " << r.flux << '\n'
         << "edge_flux " << join(edges) << '\n'
         << "occupied " << join(r.occupied) << '\n';
      emit("park-demo", os.str());
    }
    return kExitOk;
  }

  int cmd_unconditioned(bool flux) {
    const LawHandle off = offspring_law(), cars = car_law();
    const ModelParams p = params_from_laws(off, cars);
    const RunConfig run = cfg_.run();
    UnconditionedEstimates base;
    std::optional<CapSensitivity> sens;
    if (raw_.no_sensitivity) {
      base = summarize_unconditioned(simulate_unconditioned(off, cars, run), run.seed);
    } else {
      sens = cap_sensitivity(off, cars, run);
      base = sens->at_cap;
    }
    Estimate e = flux ? base.mean_flux : base.root_parked;
    double shift = 0.0;
    if (sens) {
      shift = flux ? sens->mean_flux_shift_se : sens->parked_shift_se;
      e.diverged = flux ? sens->at_double_cap.mean_flux.diverged : sens->at_double_cap.root_parked.diverged;
      if (!sens->stable) err_ << "warning: estimate moved by " << format_real(shift) << " SE when the cap doubled\n";
    }
    const std::string name = flux ? "mean-flux" : "parked-prob";
    const Regime reg = classify(p);
    double target;
    if (flux) {
      target = phi_closed_form(1.0, p).as_double();
    } else {
      // P(root occupied) = m when Theta >= 0, strictly less otherwise.
      target = reg.kind == RegimeKind::Supercritical ? std::numeric_limits<double>::quiet_NaN() : p.m;
    }
    if (cfg_.format == OutputFormat::Json) {
      nlohmann::json j = estimate_to_json(e);
      j["quantity"] = flux ? "mean_flux" : "parked_prob";
      j["regime"] = std::string(to_string(reg.kind));
      j["theory"] = real_to_json(target);
      j["cap"] = cfg_.cap;
      j["cap_shift_se"] = sens ? real_to_json(shift) : nlohmann::json(nullptr);
      emit(name, j.dump(2) + "\n");
    } else {
      emit(name, estimate_csv(flux ? "mean_flux" : "parked_prob", e, ",regime,theory,cap,cap_shift_se",
                              "," + std::string(to_string(reg.kind)) + "," + format_real(target) + "," +
                                  std::to_string(cfg_.cap) + "," + (sens ? format_real(shift) : std::string())));
    }
    return kExitOk;
  }

  int cmd_flux_n() {
    const LawHandle off = offspring_law(), cars = car_law();
    const RunConfig run = cfg_.run();
    const auto flux = simulate_conditioned_fluxes(off, cars, cfg_.n, run);
    std::vector<double> ratio;
    for (auto f : flux) ratio.push_back(static_cast<double>(f) / static_cast<double>(cfg_.n));
    const Estimate e = summarize(ratio, run.seed);
    std::vector<std::uint64_t> sorted = flux;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 ? static_cast<double>(sorted[sorted.size() / 2])
                                            : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    if (cfg_.format == OutputFormat::Json) {
      nlohmann::json j = estimate_to_json(e);
      j["quantity"] = "flux_per_n";
      j["n"] = cfg_.n;
      j["median_flux"] = real_to_json(median);
      emit("flux-n", j.dump(2) + "\n");
    } else {
      emit("flux-n", estimate_csv("flux_per_n", e, ",n,median_flux",
                                  "," + std::to_string(cfg_.n) + "," + format_real(median)));
    }
    return kExitOk;
  }

  int cmd_flux_inf() {
    const LawHandle off = offspring_law(), cars = car_law();
    const RunConfig run = cfg_.run();
    std::optional<FluxDistribution> direct;
    std::optional<WalkFluxResult> walk;
    if (raw_.method != "walk") direct = estimate_flux_infinite_direct(off, cars, cfg_.H, run);
    if (raw_.method != "direct") {
      walk = estimate_flux_infinite_walk(off, cars, cfg_.H, cfg_.pool, run);
      if (walk->pool_too_small)
        err_ << "warning: PoolTooSmall: expected pool draws are " << format_real(walk->resampling_ratio)
             << " times the pool size\n";
    }
    for (const auto* d : {direct ? &*direct : nullptr, walk ? &walk->distribution : nullptr})
      if (d && d->diverged)
        err_ << "warning: flux above " << kDivergenceThreshold << " in " << d->diverged_count << " of "
             << d->replicates << " replicates\n";

    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> joint;
    if (direct)
      for (const auto& [v, c] : direct->histogram) joint[v].first = c;
    if (walk)
      for (const auto& [v, c] : walk->distribution.histogram) joint[v].second = c;

    if (cfg_.format == OutputFormat::Json) {
      auto dist = [](const FluxDistribution& d) {
        nlohmann::json h = nlohmann::json::array();
        for (const auto& [v, c] : d.histogram) h.push_back({v, c});
        return nlohmann::json{{"replicates", d.replicates},    {"mean", real_to_json(d.mean())},
                              {"diverged", d.diverged},        {"diverged_count", d.diverged_count},
                              {"resampled", d.resampled},      {"seed", d.seed},
                              {"histogram", h}};
      };
      nlohmann::json j{{"H", cfg_.H}, {"cap", cfg_.cap}};
      if (direct) j["direct"] = dist(*direct);
      if (walk) {
        j["walk"] = dist(walk->distribution);
        j["walk"]["mean_z"] = estimate_to_json(walk->mean_z);
        j["walk"]["pool_size"] = walk->pool_size;
        j["walk"]["resampling_ratio"] = real_to_json(walk->resampling_ratio);
        j["walk"]["pool_too_small"] = walk->pool_too_small;
      }
      if (direct && walk) j["ks_distance"] = real_to_json(ks_distance(direct->histogram, walk->distribution.histogram));
      emit("flux-inf", j.dump(2) + "\n");
    } else {
      std::ostringstream os;
      os << "flux,direct_count,walk_count\n";
      for (const auto& [v, cc] : joint)
        os << v << ',' << (direct ? std::to_string(cc.first) : "") << ',' << (walk ? std::to_string(cc.second) : "")
           << '\n';
      emit("flux-inf", os.str());
    }
    return kExitOk;
  }

  int cmd_spinal() {
    const LawHandle off = offspring_law();
    const SpinalCheck s = spinal_check(off, SpinalFunctional{cfg_.h0, cfg_.k}, cfg_.run());
    if (cfg_.format == OutputFormat::Json) {
      emit("spinal-check", nlohmann::json{{"h0", cfg_.h0},
                                          {"k", cfg_.k},
                                          {"lhs", estimate_to_json(s.lhs)},
                                          {"rhs", estimate_to_json(s.rhs)},
                                          {"gap_se", real_to_json(s.gap_in_se())}}
                                   .dump(2) +
                               "\n");
    } else {
      std::ostringstream os;
      os << "h0,k,lhs,se_lhs,rhs,se_rhs,gap_se,replicates,seed\n"
         << cfg_.h0 << ',' << cfg_.k << ',' << format_real(s.lhs.point) << ',' << format_real(s.lhs.std_error) << ','
         << format_real(s.rhs.point) << ',' << format_real(s.rhs.std_error) << ',' << format_real(s.gap_in_se())
         << ',' << cfg_.reps << ',' << cfg_.seed << '\n';
      emit("spinal-check", os.str());
    }
    return kExitOk;
  }

  int cmd_sweep() {
    const LawHandle off = offspring_law();
    SweepConfig sc;
    sc.trees = cfg_.run();
    sc.n = cfg_.n;
    sc.reps_n = cfg_.reps_n;
    const auto rows = to_report_rows(sweep(off, cfg_.car_family, cfg_.grid, sc));
    for (const auto& r : rows)
      for (const auto& f : r.flags) err_ << "m=" << format_real(r.m) << ": " << f << '\n';
    std::ostringstream os;
    if (cfg_.format == OutputFormat::Json) {
      write_json(os, rows);
    } else {
      write_csv(os, rows);
    }
    emit("sweep", os.str());
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  ExperimentConfig cfg_;
  detail_cli::Raw raw_;
};

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  App app(out, err);
  return app.run(argc, argv);
}

}  // namespace gwpark::cli
