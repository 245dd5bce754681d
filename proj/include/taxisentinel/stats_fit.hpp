#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "taxisentinel/airport_graph.hpp"
#include "taxisentinel/travel_time.hpp"

namespace taxisentinel {

enum class WeightClass { kSmall, kLarge, kHeavy, kSuper };

std::string_view to_string(WeightClass w);
std::optional<WeightClass> parse_weight_class(std::string_view name);

struct SpeedSample {
  std::string link_id;  // "A->B" in the graph's link orientation
  double timestamp = 0.0;
  double speed = 0.0;   // m/s
  std::optional<WeightClass> weight_class;
};

// Log-moment MLE: mean and population std of ln(speed).
LogNormalParams fit_lognormal(const std::vector<double>& speeds);

struct Hypothesis {
  enum class Kind { kLogNormal, kNormal } kind = Kind::kLogNormal;
  double a = 0.0;  // mu_log, or mean
  double b = 1.0;  // sigma_log, or std

  static Hypothesis lognormal(const LogNormalParams& p) { return {Kind::kLogNormal, p.mu_log, p.sigma_log}; }
  static Hypothesis normal(double mean, double std_dev) { return {Kind::kNormal, mean, std_dev}; }

  double cdf(double x) const;
  double quantile(double p) const;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);
KsResult ks_test(std::vector<double> samples, const Hypothesis& h);

// (F^-1((i - 0.5) / n), x_(i)) for i = 1..n.
std::vector<std::pair<double, double>> qq_points(std::vector<double> samples, const Hypothesis& h);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;  // zero for chi-square tests
};

TestResult anova_f(const std::vector<std::vector<double>>& groups);
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct TrackPoint {
  double time = 0.0;
  std::string callsign;
  double x = 0.0;
  double y = 0.0;
  std::optional<WeightClass> weight_class;
  bool geodetic = false;  // x holds longitude, y latitude (degrees)
};

struct ExtractOptions {
  double stationary_cutoff = 0.5;  // m/s
  double max_distance = 50.0;      // m, map-matching gate
};

// Consecutive points of one callsign give speed = distance / dt, assigned to the
// link nearest the pair midpoint. Throws NON_MONOTONE_TIME.
std::vector<SpeedSample> link_speed_extract(const std::vector<TrackPoint>& track,
                                            const AirportGraph& graph,
                                            const ExtractOptions& options = {});

// CSV with header time,callsign,x,y[,weight_class]; lat,lon columns in place
// of x,y mark geodetic points, projected with the graph's origin on extract.
std::vector<TrackPoint> parse_tracks_csv(std::string_view content);
std::vector<TrackPoint> load_tracks(const std::filesystem::path& path);

// CSV link,timestamp,speed,weight_class with a header row.
std::string speed_samples_csv(const std::vector<SpeedSample>& samples);
std::vector<SpeedSample> parse_speed_samples_csv(std::string_view content);

struct FitReport {
  std::string link_id;
  std::size_t n = 0;
  LogNormalParams params;
  KsResult ks;
};

// Per-link log-normal fits with a K-S test against the fitted law, for links
// with at least min_samples samples, sorted by link id.
std::vector<FitReport> fit_links(const std::vector<SpeedSample>& samples, std::size_t min_samples = 5);
nlohmann::ordered_json fit_reports_json(const std::vector<FitReport>& reports);

}  // namespace taxisentinel
