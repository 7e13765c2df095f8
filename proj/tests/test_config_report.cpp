#include <gtest/gtest.h>

#include <sstream>

#include "gwpark/config.hpp"
#include "gwpark/report.hpp"

using namespace gwpark;

TEST(Config, Shorthand) {
  EXPECT_DOUBLE_EQ(std::get<family::Poisson>(parse_dist_shorthand("poisson:0.25")).rate, 0.25);
  EXPECT_DOUBLE_EQ(std::get<family::Geometric>(parse_dist_shorthand("geometric:0.5")).success, 0.5);
  const auto b = std::get<family::Binomial>(parse_dist_shorthand("binomial:4,0.25"));
  EXPECT_EQ(b.trials, 4u);
  EXPECT_DOUBLE_EQ(b.prob, 0.25);
  EXPECT_EQ(std::get<family::Binomial>(parse_dist_shorthand("bernoulli:0.3")).trials, 1u);
  const auto f = std::get<family::Finite>(parse_dist_shorthand("finite:0=0.5,2=0.5"));
  ASSERT_EQ(f.pmf.size(), 2u);
  EXPECT_EQ(f.pmf[1].first, 2u);
  EXPECT_DOUBLE_EQ(f.pmf[1].second, 0.5);
  EXPECT_EQ(std::get<family::Finite>(parse_dist_shorthand("delta:1")).pmf.front().first, 1u);
  EXPECT_DOUBLE_EQ(std::get<family::Zeta>(parse_dist_shorthand("zeta:3.5")).exponent, 3.5);
  for (const char* bad : {"poisson", "poisson:x", "nosuch:1", "binomial:3", "finite:0-1", "poisson:1.5abc"}) {
    try {
      parse_dist_shorthand(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config) << bad;
    }
  }
}

TEST(Config, JsonDistributionsRoundTrip) {
  const std::vector<DistSpec> specs{family::Poisson{0.25}, family::Geometric{0.5}, family::Binomial{3, 0.2},
                                    family::Finite{{{0, 0.5}, {2, 0.5}}}, family::Zeta{3.5}};
  for (const auto& s : specs) EXPECT_EQ(describe(dist_from_json(dist_to_json(s))), describe(s));
  const auto canonical = nlohmann::json::parse(R"({"family":"finite","pmf":[[0,0.5],[2,0.5]]})");
  EXPECT_EQ(describe(dist_from_json(canonical)), describe(family::Finite{{{0, 0.5}, {2, 0.5}}}));
  EXPECT_THROW(dist_from_json(nlohmann::json::parse(R"({"family":"poisson","rate":1,"extra":2})")), Error);
  EXPECT_THROW(dist_from_json(nlohmann::json::parse(R"({"family":"poisson"})")), Error);
  EXPECT_EQ(describe(dist_from_json("poisson:1")), describe(family::Poisson{1.0}));
}

TEST(Config, ExperimentConfigRejectsUnknownKeys) {
  const auto j = nlohmann::json::parse(
      R"({"offspring":{"family":"poisson","rate":1},"cars":"poisson:0.25","reps":100,"seed":7,"grid":[0.1,0.2],
          "format":"json"})");
  const ExperimentConfig cfg = config_from_json(j);
  EXPECT_EQ(cfg.reps, 100u);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.grid.size(), 2u);
  EXPECT_EQ(cfg.format, OutputFormat::Json);
  try {
    config_from_json(nlohmann::json::parse(R"({"repz":100})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"reps":0})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"reps":"many"})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"format":"xml"})")), Error);
}

namespace {

SweepRow example_row() {
  SweepRow r;
  r.m = 0.25;
  r.theta = 0.5;
  r.regime = RegimeKind::Subcritical;
  r.phi1 = Extended(0.75 - std::sqrt(0.5));
  Estimate e;
  e.point = 0.0431234567891;
  e.std_error = 0.0012;
  e.replicates = 100;
  r.mean_flux = e;
  e.point = 0.25;
  r.parked_prob = e;
  r.overflow_frac = 0.001;
  r.seed = 123456789012345ULL;
  return r;
}

}  // namespace

TEST(Report, FormatReal) {
  EXPECT_EQ(format_real(0.042893218813452), "0.0428932188");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_real(0.5), "0.5");
}

TEST(Report, EmptySweepIsHeaderOnly) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kReportHeader) + "\n");
}

TEST(Report, OneRowHasExactlyTheDeclaredColumns) {
  std::ostringstream os;
  write_csv(os, {to_report_row(example_row())});
  const std::string text = os.str();
  const auto nl = text.find('\n');
  const std::string row = text.substr(nl + 1, text.size() - nl - 2);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 11);
  EXPECT_EQ(row, "0.25,0.5,Subcritical,0.0428932188,0.0431234568,0.0012,0.25,0.0012,,,0.001,123456789012345");
}

TEST(Report, JsonRoundTrips) {
  SweepRow inf_row = example_row();
  inf_row.regime = RegimeKind::Supercritical;
  inf_row.theta = -0.0625;
  inf_row.phi1 = Extended::infinity();
  inf_row.flags.push_back("AllOverflowed: x");
  const auto rows = to_report_rows({example_row(), inf_row});
  std::ostringstream os;
  write_json(os, rows);
  EXPECT_EQ(read_json_report(os.str()), rows);
  std::ostringstream again;
  write_json(again, read_json_report(os.str()));
  EXPECT_EQ(again.str(), os.str());
}

TEST(Report, WriteFailureIsAnIoError) {
  std::ostringstream fallback;
  try {
    write_text("/nonexistent-dir/x/report.csv", "x", fallback);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
  write_text("-", "hello", fallback);
  EXPECT_EQ(fallback.str(), "hello");
}
