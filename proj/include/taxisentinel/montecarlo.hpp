#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "taxisentinel/airport_graph.hpp"

namespace taxisentinel {

struct ScenarioAircraft {
  std::string callsign;
  std::vector<NodeId> nodes;
  double start_time = 0.0;
};

struct ScenarioConfig {
  std::filesystem::path graph_path;
  std::vector<ScenarioAircraft> aircraft;
  double r_c = 32.5;
  std::uint64_t seed = 0;
  std::size_t samples = 100000;
};

struct Scenario {
  ScenarioConfig config;
  AirportGraph graph;
  std::vector<TaxiPlan> plans;  // aligned with config.aircraft
};

// Scenario JSON {graph, aircraft: [{callsign, nodes, start_time}], r_c, seed,
// samples}; a relative graph path resolves against the scenario's directory.
ScenarioConfig parse_scenario_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);
Scenario make_scenario(ScenarioConfig config, AirportGraph graph);

// Per-sample link times for one aircraft. Speeds are drawn from the substream
// keyed by (seed, aircraft, link, sample), so results do not depend on
// sampling order or thread count.
std::vector<double> sample_link_times(const AirportGraph& graph, const TaxiPlan& plan,
                                      std::uint64_t seed, std::size_t aircraft,
                                      std::size_t sample);

// Total route time per sample. Throws EMPTY_PLAN when the plan has no links.
std::vector<double> sample_route_times(const TaxiPlan& plan, const AirportGraph& graph,
                                       std::size_t n, std::uint64_t seed, std::size_t aircraft = 0);

struct OracleEstimate {
  double p_hat = 0.0;
  double standard_error = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  std::size_t leading = 0;   // aircraft index whose arrival fixes T1
  std::size_t trailing = 1;
};

// Collision event per sample: aircraft 2 (the one with the later expected
// arrival) lies within r_c of the spot, measured along its own path, at the
// moment aircraft 1 reaches the spot. Throws SPOT_NOT_SHARED.
OracleEstimate mc_collision_oracle(const Scenario& scenario, const NodeId& spot,
                                   std::size_t first = 0, std::size_t second = 1);

struct AircraftPosition {
  std::string callsign;
  std::size_t link = 0;     // index within the plan's links
  double fraction = 0.0;    // along that link, in [0, 1]
  bool completed = false;
  double distance = 0.0;    // along the route, meters
  double x = 0.0;
  double y = 0.0;
};

struct SnapshotFrame {
  double time = 0.0;
  std::vector<AircraftPosition> positions;
};

// Frames at t0 + k * step, k = 0..ceil(span / step), t0 the earliest start and
// span reaching the latest completion of the given sample.
std::vector<SnapshotFrame> replay(const Scenario& scenario, std::size_t sample_index, double time_step);

std::string frames_jsonl(const std::vector<SnapshotFrame>& frames, const Scenario& scenario);
std::string frames_csv(const std::vector<SnapshotFrame>& frames);

}  // namespace taxisentinel
