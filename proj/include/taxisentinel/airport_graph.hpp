#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "taxisentinel/phraseology.hpp"
#include "taxisentinel/travel_time.hpp"

namespace taxisentinel {

using NodeId = std::string;

enum class NodeKind { kRunway, kTaxiway, kTaxilane, kRamp, kGate, kHold };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view name);

struct Node {
  NodeId id;
  std::string name;
  double x = 0.0;
  double y = 0.0;
  NodeKind kind = NodeKind::kTaxiway;
  // Runway designation such as "34R/16L" for runway nodes; empty otherwise.
  std::string runway;
};

enum class SpeedClass { kRwyRwy, kRwyTxy, kTxyTxy, kOther };

std::string_view to_string(SpeedClass c);
std::optional<SpeedClass> parse_speed_class(std::string_view name);

struct SpeedKnots {
  double mean;
  double std_dev;
};

// Physical mean and standard deviation of taxi speed, knots.
SpeedKnots default_speed_knots(SpeedClass c);

SpeedClass classify_link(NodeKind a, NodeKind b);

struct Link {
  NodeId a;
  NodeId b;
  double length = 0.0;  // meters
  SpeedClass speed_class = SpeedClass::kOther;
  bool speed_override = false;
  LogNormalParams speed;  // log-space, m/s

  const NodeId& other(const NodeId& end) const { return end == a ? b : a; }
};

struct GraphLoadOptions {
  // Treat node "lat"/"lon" fields as degrees and project them to local
  // planar meters about the node centroid.
  bool geodetic = false;
};

class AirportGraph {
 public:
  AirportGraph() = default;
  AirportGraph(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  bool has_node(std::string_view id) const;
  const Node& node(std::string_view id) const;  // throws UNKNOWN_NODE
  std::size_t node_index(std::string_view id) const;

  // Link indices incident to a node.
  const std::vector<std::size_t>& incident(std::string_view id) const;

  // Shortest link joining a and b, if any.
  std::optional<std::size_t> find_link(std::string_view a, std::string_view b) const;

  // Runway nodes whose designation includes `runway` ("34R" matches "34R/16L").
  std::vector<NodeId> runway_nodes(std::string_view runway) const;

  bool geodetic() const { return geodetic_; }
  void set_geodetic_origin(double lat0, double lon0) {
    geodetic_ = true;
    lat0_ = lat0;
    lon0_ = lon0;
  }
  // The load projection and its inverse; only meaningful when geodetic().
  std::pair<double, double> to_lat_lon(double x, double y) const;
  std::pair<double, double> from_lat_lon(double lat, double lon) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> incident_;
  bool geodetic_ = false;
  double lat0_ = 0.0;
  double lon0_ = 0.0;
};

AirportGraph parse_graph_json(const nlohmann::json& doc, const GraphLoadOptions& options = {});
AirportGraph load_graph(const std::filesystem::path& file, const GraphLoadOptions& options = {});

struct NodeMatch {
  NodeId node;
  double score = 0.0;
};

// Similarity between a destination phrase and a node, in [0, 1]. Swappable so
// an embedding backend can replace the string scorer.
using NodeScorer = std::function<double(std::string_view query, const Node& node)>;

inline constexpr double kLinkThreshold = 0.35;

// max(token overlap, trigram Dice) with phonetic and number words expanded.
double string_similarity(std::string_view query, const Node& node, const LexiconTables& tables);
double trigram_dice(std::string_view a, std::string_view b);

// Ranked matches at or above kLinkThreshold, ties by node id. Throws EMPTY_QUERY.
std::vector<NodeMatch> link_destination(std::string_view query, const AirportGraph& graph,
                                        std::size_t k, const LexiconTables& tables);
std::vector<NodeMatch> link_destination(std::string_view query, const AirportGraph& graph,
                                        std::size_t k, const NodeScorer& scorer);

// Entry node for a runway: the runway node nearest `from` when given, else the
// lowest node id. Throws UNRESOLVED_DESTINATION when the runway is unknown.
NodeId runway_entry_node(const AirportGraph& graph, std::string_view runway,
                         const std::optional<NodeId>& from = std::nullopt);

struct TaxiPlan {
  std::string callsign;
  std::vector<NodeId> nodes;
  std::vector<std::size_t> links;  // indices into graph.links()
  double start_time = 0.0;
};

// Throws INVALID_ARGUMENT when nodes are not consecutive neighbors.
TaxiPlan plan_from_nodes(const AirportGraph& graph, std::string callsign,
                         const std::vector<NodeId>& nodes, double start_time);
void validate_plan(const AirportGraph& graph, const TaxiPlan& plan);
double plan_length(const AirportGraph& graph, const TaxiPlan& plan);

// Length-minimal from -> via... -> to; equal-cost ties go to the
// lexicographically smaller next node. Throws NO_PATH or UNKNOWN_NODE.
TaxiPlan shortest_taxi_plan(const AirportGraph& graph, const NodeId& from, const NodeId& to,
                            const std::vector<NodeId>& via, double start_time,
                            std::string callsign = {});

// Nodes present in both plans, in p1 order.
std::vector<NodeId> plan_overlap(const TaxiPlan& p1, const TaxiPlan& p2);

nlohmann::ordered_json plan_to_json(const AirportGraph& graph, const TaxiPlan& plan);

}  // namespace taxisentinel
