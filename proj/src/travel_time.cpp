#include "taxisentinel/travel_time.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "taxisentinel/error.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {

void LogNormalParams::validate() const {
  if (!std::isfinite(mu_log)) fail(ErrorCode::kInvalidArgument, "mu_log must be finite");
  if (!std::isfinite(sigma_log) || !(sigma_log > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "sigma_log must be finite and > 0");
  }
}

double LogNormalParams::mean() const {
  return std::exp(mu_log + 0.5 * sigma_log * sigma_log);
}

double LogNormalParams::variance() const {
  const double s2 = sigma_log * sigma_log;
  return std::expm1(s2) * std::exp(2.0 * mu_log + s2);
}

LogNormalParams from_physical_moments(double mean, double std_dev) {
  if (!(mean > 0.0) || !(std_dev > 0.0) || !std::isfinite(mean) || !std::isfinite(std_dev)) {
    fail(ErrorCode::kNonpositiveMoment,
         "mean=" + format_double(mean) + " std=" + format_double(std_dev));
  }
  const double cv = std_dev / mean;
  const double s2 = std::log1p(cv * cv);
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

LinkTimeDist link_time_dist(double distance, const LogNormalParams& speed) {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    fail(ErrorCode::kNonpositiveDistance, "d=" + format_double(distance));
  }
  speed.validate();
  return {{std::log(distance) - speed.mu_log, speed.sigma_log}, speed, distance};
}

Moments time_moments(const LinkTimeDist& link) {
  const double mu = link.speed.mu_log;
  const double s2 = link.speed.sigma_log * link.speed.sigma_log;
  const double d = link.distance;
  return {d * std::exp(-mu + 0.5 * s2), d * d * std::exp(-2.0 * mu + s2) * std::expm1(s2)};
}

RouteTimeDist route_from_moments(double mean, double variance, std::size_t n_links) {
  if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
    fail(ErrorCode::kInvalidArgument, "route moments must be positive and finite");
  }
  RouteTimeDist r;
  r.mean = mean;
  r.variance = variance;
  r.n_links = n_links;
  const double s2 = std::log1p(variance / (mean * mean));
  r.sigma_star = std::sqrt(s2);
  r.mu_star = std::log(mean) - 0.5 * s2;
  return r;
}

RouteTimeDist fw_compose(std::span<const LinkTimeDist> links) {
  if (links.empty()) fail(ErrorCode::kEmptyRoute, "route has no links");
  double m = 0.0;
  double v = 0.0;
  bool wide = false;
  for (const LinkTimeDist& link : links) {
    const Moments mom = time_moments(link);
    m += mom.mean;
    v += mom.variance;
    wide = wide || link.speed.sigma_log > 1.0;
  }
  RouteTimeDist r = route_from_moments(m, v, links.size());
  r.wide_link_warning = wide;
  return r;
}

double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double route_pdf(const RouteTimeDist& route, double t) {
  if (!(t > 0.0)) fail(ErrorCode::kNonpositiveTime, "t=" + format_double(t));
  const double z = (std::log(t) - route.mu_star) / route.sigma_star;
  return std::exp(-0.5 * z * z) /
         (t * route.sigma_star * std::sqrt(2.0 * std::numbers::pi));
}

double route_cdf(const RouteTimeDist& route, double t) {
  if (!(t > 0.0)) fail(ErrorCode::kNonpositiveTime, "t=" + format_double(t));
  return standard_normal_cdf((std::log(t) - route.mu_star) / route.sigma_star);
}

}  // namespace taxisentinel
