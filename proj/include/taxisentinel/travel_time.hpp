#pragma once

#include <cstddef>
#include <span>

namespace taxisentinel {

inline constexpr double kKnotsToMetersPerSecond = 0.514444;

// Log-space parameters of a log-normal quantity: ln X ~ Normal(mu_log, sigma_log^2).
struct LogNormalParams {
  double mu_log = 0.0;
  double sigma_log = 1.0;

  // Throws INVALID_ARGUMENT unless mu_log is finite and sigma_log is finite and > 0.
  void validate() const;
  double mean() const;
  double variance() const;
};

// Log-normal parameters matching a physical mean and standard deviation.
LogNormalParams from_physical_moments(double mean, double std_dev);

// Travel time over a link of length `distance` at log-normal speed `speed`:
// tau = d / v ~ LogNormal(ln d - mu_speed, sigma_speed^2).
struct LinkTimeDist {
  LogNormalParams params;
  LogNormalParams speed;
  double distance = 0.0;
};

LinkTimeDist link_time_dist(double distance, const LogNormalParams& speed);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments time_moments(const LinkTimeDist& link);

// Fenton-Wilkinson log-normal matched on the summed mean and variance of
// independent link times.
struct RouteTimeDist {
  double mu_star = 0.0;
  double sigma_star = 0.0;
  double mean = 0.0;      // M, seconds
  double variance = 0.0;  // V, seconds^2
  std::size_t n_links = 0;
  bool wide_link_warning = false;  // some link has sigma_log > 1
};

RouteTimeDist fw_compose(std::span<const LinkTimeDist> links);
// Builds a route distribution directly from (M, V), e.g. for offsets or tests.
RouteTimeDist route_from_moments(double mean, double variance, std::size_t n_links = 1);

double route_pdf(const RouteTimeDist& route, double t);
double route_cdf(const RouteTimeDist& route, double t);

// Standard normal CDF.
double standard_normal_cdf(double z);

}  // namespace taxisentinel
