#include "taxisentinel/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "taxisentinel/error.hpp"
#include "taxisentinel/kernels.hpp"
#include "taxisentinel/parallel.hpp"
#include "taxisentinel/rng.hpp"
#include "taxisentinel/text_util.hpp"
#include "taxisentinel/travel_time.hpp"

namespace taxisentinel {
namespace {

constexpr std::size_t kBlock = 8192;

double standard_normal(std::uint64_t key) {
  SplitMix64 engine(key);
  std::normal_distribution<double> normal;
  return normal(engine);
}

std::size_t first_index(const TaxiPlan& p, const NodeId& n) {
  return static_cast<std::size_t>(std::find(p.nodes.begin(), p.nodes.end(), n) - p.nodes.begin());
}

// Along-route position at time t given per-link times.
double position_at(const AirportGraph& graph, const TaxiPlan& plan, const std::vector<double>& times,
                   double t) {
  double elapsed = t - plan.start_time;
  if (elapsed <= 0.0) return 0.0;
  double distance = 0.0;
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    const double len = graph.links()[plan.links[i]].length;
    if (elapsed <= times[i]) return distance + len * elapsed / times[i];
    elapsed -= times[i];
    distance += len;
  }
  if (plan.links.empty()) return 0.0;
  // Past the end of the plan: keep moving at the final link's speed.
  const double v = graph.links()[plan.links.back()].length / times.back();
  return distance + v * elapsed;
}

}  // namespace

ScenarioConfig parse_scenario_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  try {
    std::filesystem::path g = doc.at("graph").get<std::string>();
    c.graph_path = g.is_absolute() ? g : base_dir / g;
    for (const auto& ja : doc.at("aircraft")) {
      ScenarioAircraft a;
      a.callsign = ja.at("callsign").get<std::string>();
      a.nodes = ja.at("nodes").get<std::vector<std::string>>();
      a.start_time = ja.value("start_time", 0.0);
      c.aircraft.push_back(std::move(a));
    }
    c.r_c = doc.value("r_c", c.r_c);
    c.seed = doc.value("seed", std::uint64_t{0});
    c.samples = doc.value("samples", c.samples);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedFile, std::string("scenario: ") + e.what());
  }
  if (!(c.r_c > 0.0)) fail(ErrorCode::kMalformedFile, "scenario r_c must be > 0");
  if (c.samples == 0) fail(ErrorCode::kMalformedFile, "scenario samples must be > 0");
  for (const ScenarioAircraft& a : c.aircraft) {
    if (!std::isfinite(a.start_time)) fail(ErrorCode::kMalformedFile, a.callsign + ": bad start_time");
  }
  return c;
}

Scenario make_scenario(ScenarioConfig config, AirportGraph graph) {
  Scenario s{std::move(config), std::move(graph), {}};
  for (const ScenarioAircraft& a : s.config.aircraft) {
    s.plans.push_back(plan_from_nodes(s.graph, a.callsign, a.nodes, a.start_time));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  ScenarioConfig config = parse_scenario_json(read_json_file(path), path.parent_path());
  AirportGraph graph = load_graph(config.graph_path);
  return make_scenario(std::move(config), std::move(graph));
}

std::vector<double> sample_link_times(const AirportGraph& graph, const TaxiPlan& plan,
                                      std::uint64_t seed, std::size_t aircraft, std::size_t sample) {
  std::vector<double> times(plan.links.size());
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    const Link& l = graph.links()[plan.links[i]];
    const double z = standard_normal(substream_seed(seed, aircraft, i, sample));
    times[i] = l.length * std::exp(-(l.speed.mu_log + l.speed.sigma_log * z));
  }
  return times;
}

std::vector<double> sample_route_times(const TaxiPlan& plan, const AirportGraph& graph,
                                       std::size_t n, std::uint64_t seed, std::size_t aircraft) {
  if (plan.links.empty()) fail(ErrorCode::kEmptyPlan, plan.callsign + ": plan has no links");
  if (n == 0) fail(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  std::vector<double> out(n, 0.0);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for_blocks(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    std::vector<double> z(hi - lo);
    std::span<double> acc(out.data() + lo, hi - lo);
    for (std::size_t i = 0; i < plan.links.size(); ++i) {
      const Link& l = graph.links()[plan.links[i]];
      for (std::size_t j = lo; j < hi; ++j) {
        z[j - lo] = standard_normal(substream_seed(seed, aircraft, i, j));
      }
      kernels::accumulate_inverse_lognormal(l.length, l.speed.mu_log, l.speed.sigma_log, z, acc);
    }
  });
  return out;
}

OracleEstimate mc_collision_oracle(const Scenario& scenario, const NodeId& spot, std::size_t first,
                                   std::size_t second) {
  if (first >= scenario.plans.size() || second >= scenario.plans.size() || first == second) {
    fail(ErrorCode::kInvalidArgument, "oracle needs two distinct aircraft");
  }
  const TaxiPlan& pa = scenario.plans[first];
  const TaxiPlan& pb = scenario.plans[second];
  const std::size_t ka = first_index(pa, spot);
  const std::size_t kb = first_index(pb, spot);
  if (ka == pa.nodes.size() || kb == pb.nodes.size()) {
    fail(ErrorCode::kSpotNotShared, spot + " is not on both plans");
  }

  // The aircraft expected to arrive later plays aircraft 2.
  auto expected_arrival = [&](const TaxiPlan& p, std::size_t k) {
    double m = p.start_time;
    for (std::size_t i = 0; i < k; ++i) {
      const Link& l = scenario.graph.links()[p.links[i]];
      m += time_moments(link_time_dist(l.length, l.speed)).mean;
    }
    return m;
  };
  OracleEstimate est;
  est.leading = first;
  est.trailing = second;
  if (expected_arrival(pa, ka) > expected_arrival(pb, kb)) std::swap(est.leading, est.trailing);
  const TaxiPlan& p1 = scenario.plans[est.leading];
  const TaxiPlan& p2 = scenario.plans[est.trailing];
  const std::size_t k1 = first_index(p1, spot);
  const std::size_t k2 = first_index(p2, spot);
  double x_c = 0.0;
  for (std::size_t i = 0; i < k2; ++i) x_c += scenario.graph.links()[p2.links[i]].length;

  const std::size_t n = scenario.config.samples;
  const double r_c = scenario.config.r_c;
  const std::uint64_t seed = scenario.config.seed;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::size_t> hits(blocks, 0);
  parallel_for_blocks(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    std::size_t count = 0;
    for (std::size_t j = lo; j < hi; ++j) {
      const std::vector<double> t1 = sample_link_times(scenario.graph, p1, seed, est.leading, j);
      const std::vector<double> t2 = sample_link_times(scenario.graph, p2, seed, est.trailing, j);
      double arrival = p1.start_time;
      for (std::size_t i = 0; i < k1; ++i) arrival += t1[i];
      const double x2 = position_at(scenario.graph, p2, t2, arrival);
      if (std::abs(x2 - x_c) <= r_c) ++count;
    }
    hits[b] = count;
  });
  for (std::size_t h : hits) est.hits += h;
  est.samples = n;
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(n);
  est.standard_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n));
  return est;
}

std::vector<SnapshotFrame> replay(const Scenario& scenario, std::size_t sample_index, double time_step) {
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    fail(ErrorCode::kInvalidArgument, "time step must be > 0");
  }
  if (scenario.plans.empty()) return {};
  const AirportGraph& g = scenario.graph;
  std::vector<std::vector<double>> times;
  double t0 = scenario.plans.front().start_time;
  double t_end = t0;
  for (std::size_t a = 0; a < scenario.plans.size(); ++a) {
    const TaxiPlan& p = scenario.plans[a];
    times.push_back(sample_link_times(g, p, scenario.config.seed, a, sample_index));
    double done = p.start_time;
    for (double t : times.back()) done += t;
    t0 = std::min(t0, p.start_time);
    t_end = std::max(t_end, done);
  }
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / time_step - 1e-9));

  std::vector<SnapshotFrame> frames;
  frames.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    SnapshotFrame f;
    f.time = t0 + static_cast<double>(k) * time_step;
    for (std::size_t a = 0; a < scenario.plans.size(); ++a) {
      const TaxiPlan& p = scenario.plans[a];
      AircraftPosition pos;
      pos.callsign = p.callsign;
      const Node& start = g.node(p.nodes.front());
      pos.x = start.x;
      pos.y = start.y;
      double elapsed = f.time - p.start_time;
      if (p.links.empty()) {
        pos.completed = elapsed >= 0.0;
        f.positions.push_back(std::move(pos));
        continue;
      }
      if (elapsed > 0.0) {
        std::size_t i = 0;
        for (; i < p.links.size(); ++i) {
          const double len = g.links()[p.links[i]].length;
          if (elapsed < times[a][i]) break;
          elapsed -= times[a][i];
          pos.distance += len;
        }
        if (i == p.links.size()) {
          pos.completed = true;
          pos.link = p.links.size() - 1;
          pos.fraction = 1.0;
        } else {
          pos.link = i;
          pos.fraction = std::clamp(elapsed / times[a][i], 0.0, 1.0);
          pos.distance += pos.fraction * g.links()[p.links[i]].length;
        }
      }
      const Node& from = g.node(p.nodes[pos.link]);
      const Node& to = g.node(p.nodes[pos.link + 1]);
      pos.x = from.x + (to.x - from.x) * pos.fraction;
      pos.y = from.y + (to.y - from.y) * pos.fraction;
      f.positions.push_back(std::move(pos));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string frames_jsonl(const std::vector<SnapshotFrame>& frames, const Scenario& scenario) {
  std::string out;
  for (const SnapshotFrame& f : frames) {
    nlohmann::ordered_json j;
    j["time"] = f.time;
    nlohmann::ordered_json positions = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < f.positions.size(); ++a) {
      const AircraftPosition& p = f.positions[a];
      const TaxiPlan& plan = scenario.plans[a];
      nlohmann::ordered_json jp;
      jp["callsign"] = p.callsign;
      if (plan.links.empty()) {
        jp["link"] = nullptr;
      } else {
        jp["link"] = plan.nodes[p.link] + "->" + plan.nodes[p.link + 1];
      }
      jp["fraction"] = p.fraction;
      jp["completed"] = p.completed;
      jp["distance"] = p.distance;
      jp["x"] = p.x;
      jp["y"] = p.y;
      positions.push_back(std::move(jp));
    }
    j["positions"] = std::move(positions);
    out += j.dump() + "\n";
  }
  return out;
}

std::string frames_csv(const std::vector<SnapshotFrame>& frames) {
  std::string out = "time,callsign,x,y\r\n";
  for (const SnapshotFrame& f : frames) {
    for (const AircraftPosition& p : f.positions) {
      out += format_double(f.time) + ',' + csv_field(p.callsign) + ',' + format_double(p.x) + ',' +
             format_double(p.y) + "\r\n";
    }
  }
  return out;
}

}  // namespace taxisentinel
