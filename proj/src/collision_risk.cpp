#include "taxisentinel/collision_risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "taxisentinel/error.hpp"
#include "taxisentinel/kernels.hpp"
#include "taxisentinel/parallel.hpp"
#include "taxisentinel/quadrature.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

constexpr double kSpan = 12.0;
constexpr std::size_t kRefGrid = 257;

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

void CollisionSpot::validate() const {
  if (!(r_c > 0.0) || !std::isfinite(r_c)) {
    fail(ErrorCode::kInvalidArgument, "r_c must be finite and > 0");
  }
}

double expected_inverse_speed(const LogNormalParams& speed) {
  speed.validate();
  return std::exp(-speed.mu_log + 0.5 * speed.sigma_log * speed.sigma_log);
}

double overlap_log_density_closed_form(const RouteTimeDist& r1, const RouteTimeDist& r2) {
  const double v1 = r1.sigma_star * r1.sigma_star;
  const double v2 = r2.sigma_star * r2.sigma_star;
  const double s = v1 + v2;
  const double dm = r1.mu_star - r2.mu_star;
  const double m_bar = (r1.mu_star * v2 + r2.mu_star * v1) / s;
  const double v_bar = v1 * v2 / s;
  return -dm * dm / (2.0 * s) - m_bar + 0.5 * v_bar - 0.5 * std::log(2.0 * std::numbers::pi * s);
}

OverlapQuadrature overlap_density_quadrature(const RouteTimeDist& r1, const RouteTimeDist& r2,
                                             double offset1, double offset2) {
  if (offset1 < 0.0 || offset2 < 0.0 || !std::isfinite(offset1) || !std::isfinite(offset2)) {
    fail(ErrorCode::kNegativeOffset, "offsets must be finite and >= 0");
  }
  // Let `b` be the later-starting route; integrate in u = ln(time since b's start).
  const bool swap = offset1 > offset2;
  const RouteTimeDist& a = swap ? r2 : r1;
  const RouteTimeDist& b = swap ? r1 : r2;
  const double delta = std::abs(offset2 - offset1);

  const double ma = a.mu_star;
  const double sa = a.sigma_star;
  const double mb = b.mu_star;
  const double sb = b.sigma_star;
  const double lo = std::min(ma - kSpan * sa, mb - kSpan * sb);
  const double hi = std::max(ma + kSpan * sa, mb + kSpan * sb);
  const double log_delta = delta > 0.0 ? std::log(delta) : -std::numeric_limits<double>::infinity();

  // log of the integrand without the 1/(2 pi sa sb) factor.
  auto log_g = [&](double u) {
    const double w = delta > 0.0 ? log_sum_exp(u, log_delta) : u;
    const double za = (w - ma) / sa;
    const double zb = (u - mb) / sb;
    return -0.5 * za * za - 0.5 * zb * zb - w;
  };

  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kRefGrid; ++i) {
    const double u = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kRefGrid - 1);
    ref = std::max(ref, log_g(u));
  }

  quadrature::BatchIntegrand f;
  if (delta == 0.0) {
    kernels::GaussianProductTerms terms{ma, 0.5 / (sa * sa), mb, 0.5 / (sb * sb), ref};
    f = [terms](std::span<const double> x, std::span<double> out) {
      kernels::gaussian_product(terms, x, out);
    };
  } else {
    f = [&](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(log_g(x[i]) - ref);
    };
  }
  const quadrature::Result q = quadrature::integrate(f, lo, hi);

  OverlapQuadrature result;
  result.intervals = q.intervals;
  result.converged = q.converged;
  const double norm = std::log(2.0 * std::numbers::pi * sa * sb);
  result.log_value = q.value > 0.0 ? std::log(q.value) + ref - norm
                                   : -std::numeric_limits<double>::infinity();
  result.value = std::exp(result.log_value);
  return result;
}

double overlap_density(const RouteTimeDist& r1, const RouteTimeDist& r2, double offset1,
                       double offset2) {
  if (offset1 < 0.0 || offset2 < 0.0 || !std::isfinite(offset1) || !std::isfinite(offset2)) {
    fail(ErrorCode::kNegativeOffset, "offsets must be finite and >= 0");
  }
  if (offset1 == offset2) return std::exp(overlap_log_density_closed_form(r1, r2));
  return overlap_density_quadrature(r1, r2, offset1, offset2).value;
}

RiskScore collision_probability(const RouteTimeDist& r1, const RouteTimeDist& r2,
                                const CollisionSpot& spot, const LogNormalParams& trailing_link_speed,
                                double offset1, double offset2) {
  spot.validate();
  RiskScore s;
  s.node = spot.node;
  s.overlap_density = overlap_density(r1, r2, offset1, offset2);
  s.inv_speed_expectation = expected_inverse_speed(trailing_link_speed);
  s.raw_probability = 2.0 * spot.r_c * s.inv_speed_expectation * s.overlap_density;
  s.clamped = s.raw_probability > 1.0;
  s.probability = std::min(1.0, s.raw_probability);
  return s;
}

std::size_t RiskMap::argmax() const {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (best == static_cast<std::size_t>(-1) || scores[i].probability > scores[best].probability) {
      best = i;
    }
  }
  return best;
}

RouteTimeDist plan_prefix_dist(const AirportGraph& graph, const TaxiPlan& plan, std::size_t n_links) {
  if (n_links == 0 || n_links > plan.links.size()) {
    fail(ErrorCode::kEmptyRoute, plan.callsign + ": prefix has no links");
  }
  std::vector<LinkTimeDist> links;
  links.reserve(n_links);
  for (std::size_t i = 0; i < n_links; ++i) {
    const Link& l = graph.links()[plan.links[i]];
    links.push_back(link_time_dist(l.length, l.speed));
  }
  return fw_compose(links);
}

RiskMap risk_map(const TaxiPlan& p1, const TaxiPlan& p2, const AirportGraph& graph, double r_c) {
  CollisionSpot{"", r_c}.validate();
  validate_plan(graph, p1);
  validate_plan(graph, p2);
  const std::vector<NodeId> overlap = plan_overlap(p1, p2);
  const double t0 = std::min(p1.start_time, p2.start_time);
  const double off1 = p1.start_time - t0;
  const double off2 = p2.start_time - t0;

  auto first_index = [](const TaxiPlan& p, const NodeId& n) {
    return static_cast<std::size_t>(std::find(p.nodes.begin(), p.nodes.end(), n) - p.nodes.begin());
  };

  struct Slot {
    bool present = false;
    RiskScore score;
    std::vector<std::string> warnings;
  };
  std::vector<Slot> slots(overlap.size());
  parallel_for_blocks(overlap.size(), [&](std::size_t i) {
    const NodeId& node = overlap[i];
    const std::size_t k1 = first_index(p1, node);
    const std::size_t k2 = first_index(p2, node);
    Slot& slot = slots[i];
    if (k1 == 0 || k2 == 0) {
      slot.warnings.push_back(node + ": skipped, an aircraft starts there");
      return;
    }
    const RouteTimeDist d1 = plan_prefix_dist(graph, p1, k1);
    const RouteTimeDist d2 = plan_prefix_dist(graph, p2, k2);
    const bool second_trails = off2 + d2.mean >= off1 + d1.mean;
    const Link& entry = graph.links()[second_trails ? p2.links[k2 - 1] : p1.links[k1 - 1]];
    if (r_c > 0.5 * entry.length) {
      slot.warnings.push_back(node + ": r_c exceeds half the trailing entry link length");
    }
    if (d1.wide_link_warning || d2.wide_link_warning) {
      slot.warnings.push_back(node + ": a link has sigma_log > 1");
    }
    slot.score = collision_probability(d1, d2, {node, r_c}, entry.speed, off1, off2);
    slot.present = true;
  });

  RiskMap map;
  for (Slot& s : slots) {
    for (std::string& w : s.warnings) map.warnings.push_back(std::move(w));
    if (s.present) map.scores.push_back(std::move(s.score));
  }
  return map;
}

nlohmann::ordered_json risk_map_json(const RiskMap& map) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const RiskScore& s : map.scores) {
    nlohmann::ordered_json j;
    j["node"] = s.node;
    j["probability"] = s.probability;
    j["overlap_density"] = s.overlap_density;
    j["inv_speed_expectation"] = s.inv_speed_expectation;
    j["clamped"] = s.clamped;
    out.push_back(std::move(j));
  }
  return out;
}

std::string risk_map_csv(const RiskMap& map, const AirportGraph& graph) {
  std::string out = "node,x,y,probability,overlap_density,inv_speed_expectation,clamped\r\n";
  for (const RiskScore& s : map.scores) {
    const Node& n = graph.node(s.node);
    out += csv_field(s.node) + ',' + format_double(n.x) + ',' + format_double(n.y) + ',' +
           format_double(s.probability) + ',' + format_double(s.overlap_density) + ',' +
           format_double(s.inv_speed_expectation) + ',' + (s.clamped ? "true" : "false") + "\r\n";
  }
  return out;
}

nlohmann::ordered_json risk_map_geojson(const RiskMap& map, const AirportGraph& graph) {
  if (!graph.geodetic()) fail(ErrorCode::kInvalidArgument, "graph has no geodetic coordinates");
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const RiskScore& s : map.scores) {
    const Node& n = graph.node(s.node);
    const auto [lat, lon] = graph.to_lat_lon(n.x, n.y);
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {lon, lat}}};
    f["properties"] = {{"node", s.node}, {"probability", s.probability}, {"clamped", s.clamped}};
    fc["features"].push_back(std::move(f));
  }
  return fc;
}

}  // namespace taxisentinel
