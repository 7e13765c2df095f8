#pragma once

// Report tables: fixed-column CSV and the matching JSON. Reals are written with
// 9 significant digits, infinities as "inf"/"-inf" and missing values as an
// empty CSV cell or JSON null, so identical inputs give identical bytes.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwpark/error.hpp"
#include "gwpark/montecarlo.hpp"
#include "gwpark/stats.hpp"
#include "gwpark/theory.hpp"

namespace gwpark {

inline constexpr const char* kReportHeader =
    "m,theta,regime,phi1_closed,mean_flux,se,parked_prob,se,flux_per_n,se,overflow_frac,seed";

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// v rounded to the 9 digits it is reported with.
inline double report_round(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_real(v).c_str(), nullptr);
}

/// One report line, values already rounded to their printed precision.
struct ReportRow {
  double m = 0.0;
  double theta = 0.0;
  std::string regime;
  double phi1_closed = 0.0;
  std::optional<double> mean_flux, se_mean_flux;
  std::optional<double> parked_prob, se_parked_prob;
  std::optional<double> flux_per_n, se_flux_per_n;
  double overflow_frac = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

inline ReportRow to_report_row(const SweepRow& r) {
  ReportRow out;
  out.m = report_round(r.m);
  out.theta = report_round(r.theta);
  out.regime = std::string(to_string(r.regime));
  out.phi1_closed = report_round(r.phi1.as_double());
  auto put = [](const std::optional<Estimate>& e, std::optional<double>& point, std::optional<double>& se) {
    if (!e) return;
    point = report_round(e->point);
    se = report_round(e->std_error);
  };
  put(r.mean_flux, out.mean_flux, out.se_mean_flux);
  put(r.parked_prob, out.parked_prob, out.se_parked_prob);
  put(r.flux_per_n, out.flux_per_n, out.se_flux_per_n);
  out.overflow_frac = report_round(r.overflow_frac);
  out.seed = r.seed;
  out.flags = r.flags;
  if (r.mean_flux && r.mean_flux->diverged) out.flags.emplace_back("diverged");
  if (r.mean_flux && r.mean_flux->median_of_means) out.flags.emplace_back("median_of_means");
  return out;
}

inline std::vector<ReportRow> to_report_rows(const std::vector<SweepRow>& rows) {
  std::vector<ReportRow> out;
  for (const auto& r : rows) out.push_back(to_report_row(r));
  return out;
}

inline void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  os << kReportHeader << '\n';
  for (const auto& r : rows) {
    os << format_real(r.m) << ',' << format_real(r.theta) << ',' << r.regime << ',' << format_real(r.phi1_closed)
       << ',' << opt(r.mean_flux) << ',' << opt(r.se_mean_flux) << ',' << opt(r.parked_prob) << ','
       << opt(r.se_parked_prob) << ',' << opt(r.flux_per_n) << ',' << opt(r.se_flux_per_n) << ','
       << format_real(r.overflow_frac) << ',' << r.seed << '\n';
  }
}

/// A real as a JSON value: a number, or "inf"/"-inf"/"nan".
inline nlohmann::json real_to_json(double v) {
  if (!std::isfinite(v)) return format_real(v);
  return report_round(v);
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorKind::Config, "bad real '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::json to_json(const ReportRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? real_to_json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = nlohmann::json::object();
  j["m"] = real_to_json(r.m);
  j["theta"] = real_to_json(r.theta);
  j["regime"] = r.regime;
  j["phi1_closed"] = real_to_json(r.phi1_closed);
  j["mean_flux"] = opt(r.mean_flux);
  j["se_mean_flux"] = opt(r.se_mean_flux);
  j["parked_prob"] = opt(r.parked_prob);
  j["se_parked_prob"] = opt(r.se_parked_prob);
  j["flux_per_n"] = opt(r.flux_per_n);
  j["se_flux_per_n"] = opt(r.se_flux_per_n);
  j["overflow_frac"] = real_to_json(r.overflow_frac);
  j["seed"] = r.seed;
  j["flags"] = r.flags;
  return j;
}

inline ReportRow report_row_from_json(const nlohmann::json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (j.at(key).is_null()) return std::nullopt;
    return real_from_json(j.at(key));
  };
  ReportRow r;
  r.m = real_from_json(j.at("m"));
  r.theta = real_from_json(j.at("theta"));
  r.regime = j.at("regime").get<std::string>();
  r.phi1_closed = real_from_json(j.at("phi1_closed"));
  r.mean_flux = opt("mean_flux");
  r.se_mean_flux = opt("se_mean_flux");
  r.parked_prob = opt("parked_prob");
  r.se_parked_prob = opt("se_parked_prob");
  r.flux_per_n = opt("flux_per_n");
  r.se_flux_per_n = opt("se_flux_per_n");
  r.overflow_frac = real_from_json(j.at("overflow_frac"));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

inline void write_json(std::ostream& os, const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  os << arr.dump(2) << '\n';
}

inline std::vector<ReportRow> read_json_report(const std::string& text) {
  std::vector<ReportRow> out;
  for (const auto& j : nlohmann::json::parse(text)) out.push_back(report_row_from_json(j));
  return out;
}

inline nlohmann::json estimate_to_json(const Estimate& e) {
  return {{"point", real_to_json(e.point)},
          {"se", real_to_json(e.std_error)},
          {"replicates", e.replicates},
          {"overflow_count", e.overflow_count},
          {"diverged", e.diverged},
          {"median_of_means", e.median_of_means},
          {"seed", e.seed}};
}

/// Writes `content` to `path`, or to stdout when path is empty or "-".
inline void write_text(const std::string& path, const std::string& content, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace gwpark
