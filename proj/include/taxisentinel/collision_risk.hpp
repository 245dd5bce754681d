#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "taxisentinel/airport_graph.hpp"
#include "taxisentinel/travel_time.hpp"

namespace taxisentinel {

struct CollisionSpot {
  NodeId node;
  double r_c = 0.0;  // meters

  // Throws INVALID_ARGUMENT unless r_c is finite and > 0.
  void validate() const;
};

struct RiskScore {
  NodeId node;
  double overlap_density = 0.0;        // 1/s, density of the arrival difference at 0
  double inv_speed_expectation = 0.0;  // s/m
  double probability = 0.0;
  double raw_probability = 0.0;  // before clamping
  bool clamped = false;
};

// E[1/v] for log-normal v.
double expected_inverse_speed(const LogNormalParams& speed);

// ln of the overlap density for equal start offsets, by completing the square
// in u = ln t.
double overlap_log_density_closed_form(const RouteTimeDist& r1, const RouteTimeDist& r2);

struct OverlapQuadrature {
  double log_value = 0.0;
  double value = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod in log time, scaled by the integrand's peak so tiny
// densities keep their relative accuracy. Throws NEGATIVE_OFFSET.
OverlapQuadrature overlap_density_quadrature(const RouteTimeDist& r1, const RouteTimeDist& r2,
                                             double offset1 = 0.0, double offset2 = 0.0);

// Closed form when offsets coincide, quadrature otherwise.
double overlap_density(const RouteTimeDist& r1, const RouteTimeDist& r2, double offset1 = 0.0,
                       double offset2 = 0.0);

RiskScore collision_probability(const RouteTimeDist& r1, const RouteTimeDist& r2,
                                const CollisionSpot& spot, const LogNormalParams& trailing_link_speed,
                                double offset1 = 0.0, double offset2 = 0.0);

struct RiskMap {
  std::vector<RiskScore> scores;  // plan-1 traversal order
  std::vector<std::string> warnings;

  // Index of the highest probability (first on ties); npos when empty.
  std::size_t argmax() const;
};

// Start offsets come from the plans' start times relative to the earlier one.
// Overlap nodes where either aircraft has not yet moved (empty prefix) are
// skipped with a warning.
RiskMap risk_map(const TaxiPlan& p1, const TaxiPlan& p2, const AirportGraph& graph, double r_c);

nlohmann::ordered_json risk_map_json(const RiskMap& map);
std::string risk_map_csv(const RiskMap& map, const AirportGraph& graph);
// FeatureCollection of overlap nodes; requires a geodetic graph.
nlohmann::ordered_json risk_map_geojson(const RiskMap& map, const AirportGraph& graph);

// Route distribution over the first `n_links` links of a plan.
RouteTimeDist plan_prefix_dist(const AirportGraph& graph, const TaxiPlan& plan, std::size_t n_links);

}  // namespace taxisentinel
