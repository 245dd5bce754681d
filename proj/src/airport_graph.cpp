#include "taxisentinel/airport_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <tuple>

#include "taxisentinel/error.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

constexpr double kEarthRadius = 6371008.8;

bool is_runway(NodeKind k) { return k == NodeKind::kRunway; }

std::vector<std::string> expanded_tokens(std::string_view text, const LexiconTables& tables) {
  std::vector<std::string> out;
  for (std::string& tok : split_whitespace(strip_punctuation_lower(text))) {
    if (auto it = tables.phonetic.find(tok); it != tables.phonetic.end()) {
      out.push_back(to_lower_ascii(it->second));
    } else if (auto jt = tables.numbers.find(tok); jt != tables.numbers.end()) {
      out.push_back(jt->second);
    } else {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

std::string collapsed(std::string_view text) {
  std::string out;
  for (const std::string& t : split_whitespace(strip_punctuation_lower(text))) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<std::string> trigrams(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  if (s.size() < 3) {
    out.push_back(s);
    return out;
  }
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) out.push_back(s.substr(i, 3));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRunway: return "RUNWAY";
    case NodeKind::kTaxiway: return "TAXIWAY";
    case NodeKind::kTaxilane: return "TAXILANE";
    case NodeKind::kRamp: return "RAMP";
    case NodeKind::kGate: return "GATE";
    case NodeKind::kHold: return "HOLD";
  }
  return "TAXIWAY";
}

std::optional<NodeKind> parse_node_kind(std::string_view name) {
  for (NodeKind k : {NodeKind::kRunway, NodeKind::kTaxiway, NodeKind::kTaxilane, NodeKind::kRamp,
                     NodeKind::kGate, NodeKind::kHold}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SpeedClass c) {
  switch (c) {
    case SpeedClass::kRwyRwy: return "RWY_RWY";
    case SpeedClass::kRwyTxy: return "RWY_TXY";
    case SpeedClass::kTxyTxy: return "TXY_TXY";
    case SpeedClass::kOther: return "OTHER";
  }
  return "OTHER";
}

std::optional<SpeedClass> parse_speed_class(std::string_view name) {
  for (SpeedClass c : {SpeedClass::kRwyRwy, SpeedClass::kRwyTxy, SpeedClass::kTxyTxy,
                       SpeedClass::kOther}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

SpeedKnots default_speed_knots(SpeedClass c) {
  switch (c) {
    case SpeedClass::kRwyRwy: return {30.0, 10.0};
    case SpeedClass::kRwyTxy: return {25.0, 5.0};
    case SpeedClass::kTxyTxy: return {20.0, 5.0};
    case SpeedClass::kOther: return {10.0, 5.0};
  }
  return {10.0, 5.0};
}

SpeedClass classify_link(NodeKind a, NodeKind b) {
  if (is_runway(a) && is_runway(b)) return SpeedClass::kRwyRwy;
  if (is_runway(a) != is_runway(b)) return SpeedClass::kRwyTxy;
  if (a == NodeKind::kTaxiway && b == NodeKind::kTaxiway) return SpeedClass::kTxyTxy;
  return SpeedClass::kOther;
}

AirportGraph::AirportGraph(std::vector<Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id.empty()) fail(ErrorCode::kMalformedFile, "node with empty id");
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
      fail(ErrorCode::kMalformedFile, n.id + ": coordinates must be finite");
    }
    if (!index_.emplace(n.id, i).second) fail(ErrorCode::kDuplicateNode, n.id);
  }
  incident_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    Link& l = links_[i];
    const std::string name = l.a + "-" + l.b;
    if (!has_node(l.a) || !has_node(l.b)) fail(ErrorCode::kUnknownNode, name);
    if (l.a == l.b) fail(ErrorCode::kMalformedFile, name + ": self loop");
    if (!(l.length > 0.0) || !std::isfinite(l.length)) {
      fail(ErrorCode::kMalformedFile, name + ": length must be > 0");
    }
    l.speed.validate();
    incident_[index_.at(l.a)].push_back(i);
    incident_[index_.at(l.b)].push_back(i);
  }
}

bool AirportGraph::has_node(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::size_t AirportGraph::node_index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) fail(ErrorCode::kUnknownNode, std::string(id));
  return it->second;
}

const Node& AirportGraph::node(std::string_view id) const { return nodes_[node_index(id)]; }

const std::vector<std::size_t>& AirportGraph::incident(std::string_view id) const {
  return incident_[node_index(id)];
}

std::optional<std::size_t> AirportGraph::find_link(std::string_view a, std::string_view b) const {
  std::optional<std::size_t> best;
  for (std::size_t li : incident(a)) {
    const Link& l = links_[li];
    if (l.other(std::string(a)) != b) continue;
    if (!best || l.length < links_[*best].length) best = li;
  }
  return best;
}

std::vector<NodeId> AirportGraph::runway_nodes(std::string_view runway) const {
  std::vector<NodeId> out;
  const std::string want = to_lower_ascii(runway);
  for (const Node& n : nodes_) {
    if (n.kind != NodeKind::kRunway || n.runway.empty()) continue;
    std::string desig = to_lower_ascii(n.runway);
    std::size_t start = 0;
    while (start <= desig.size()) {
      std::size_t slash = desig.find('/', start);
      if (slash == std::string::npos) slash = desig.size();
      if (trim(std::string_view(desig).substr(start, slash - start)) == want) {
        out.push_back(n.id);
        break;
      }
      start = slash + 1;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<double, double> AirportGraph::to_lat_lon(double x, double y) const {
  const double deg = 180.0 / std::numbers::pi;
  const double lat = lat0_ + y / kEarthRadius * deg;
  const double lon = lon0_ + x / (kEarthRadius * std::cos(lat0_ / deg)) * deg;
  return {lat, lon};
}

std::pair<double, double> AirportGraph::from_lat_lon(double lat, double lon) const {
  const double rad = std::numbers::pi / 180.0;
  return {(lon - lon0_) * rad * kEarthRadius * std::cos(lat0_ * rad), (lat - lat0_) * rad * kEarthRadius};
}

AirportGraph parse_graph_json(const nlohmann::json& doc, const GraphLoadOptions& options) {
  if (!doc.is_object()) fail(ErrorCode::kMalformedFile, "graph must be a JSON object");
  std::vector<Node> nodes;
  std::vector<std::pair<double, double>> geo;
  try {
    for (const auto& jn : doc.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<std::string>();
      n.name = jn.value("name", n.id);
      const std::string kind = jn.at("kind").get<std::string>();
      auto k = parse_node_kind(kind);
      if (!k) fail(ErrorCode::kMalformedFile, n.id + ": unknown kind " + kind);
      n.kind = *k;
      n.runway = jn.value("runway", std::string());
      if (options.geodetic) {
        geo.emplace_back(jn.at("lat").get<double>(), jn.at("lon").get<double>());
      } else {
        n.x = jn.at("x").get<double>();
        n.y = jn.at("y").get<double>();
      }
      nodes.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedFile, std::string("nodes: ") + e.what());
  }

  double lat0 = 0.0;
  double lon0 = 0.0;
  if (options.geodetic && !geo.empty()) {
    for (const auto& [lat, lon] : geo) {
      lat0 += lat;
      lon0 += lon;
    }
    lat0 /= static_cast<double>(geo.size());
    lon0 /= static_cast<double>(geo.size());
    AirportGraph projection;
    projection.set_geodetic_origin(lat0, lon0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      std::tie(nodes[i].x, nodes[i].y) = projection.from_lat_lon(geo[i].first, geo[i].second);
    }
  }

  std::map<std::string, const Node*> by_id;
  for (const Node& n : nodes) by_id.emplace(n.id, &n);

  std::vector<Link> links;
  try {
    for (const auto& jl : doc.at("links")) {
      Link l;
      l.a = jl.at("a").get<std::string>();
      l.b = jl.at("b").get<std::string>();
      auto ia = by_id.find(l.a);
      auto ib = by_id.find(l.b);
      if (ia == by_id.end() || ib == by_id.end()) fail(ErrorCode::kUnknownNode, l.a + "-" + l.b);
      if (jl.contains("length")) {
        l.length = jl.at("length").get<double>();
      } else {
        l.length = std::hypot(ia->second->x - ib->second->x, ia->second->y - ib->second->y);
      }
      if (jl.contains("speed_class")) {
        const std::string c = jl.at("speed_class").get<std::string>();
        auto sc = parse_speed_class(c);
        if (!sc) fail(ErrorCode::kMalformedFile, l.a + "-" + l.b + ": unknown speed class " + c);
        l.speed_class = *sc;
      } else {
        l.speed_class = classify_link(ia->second->kind, ib->second->kind);
      }
      SpeedKnots kt = default_speed_knots(l.speed_class);
      const bool has_mean = jl.contains("speed_mean_kt");
      const bool has_std = jl.contains("speed_std_kt");
      if (has_mean != has_std) {
        fail(ErrorCode::kMalformedFile, l.a + "-" + l.b + ": speed override needs mean and std");
      }
      if (has_mean) {
        kt = {jl.at("speed_mean_kt").get<double>(), jl.at("speed_std_kt").get<double>()};
        l.speed_override = true;
      }
      l.speed = from_physical_moments(kt.mean * kKnotsToMetersPerSecond,
                                      kt.std_dev * kKnotsToMetersPerSecond);
      links.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformedFile, std::string("links: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonpositiveMoment) fail(ErrorCode::kMalformedFile, e.detail());
    throw;
  }
  AirportGraph g(std::move(nodes), std::move(links));
  if (options.geodetic) g.set_geodetic_origin(lat0, lon0);
  return g;
}

AirportGraph load_graph(const std::filesystem::path& file, const GraphLoadOptions& options) {
  return parse_graph_json(read_json_file(file), options);
}

double trigram_dice(std::string_view a, std::string_view b) {
  const std::vector<std::string> ga = trigrams(collapsed(a));
  const std::vector<std::string> gb = trigrams(collapsed(b));
  if (ga.empty() || gb.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(), std::back_inserter(common));
  return 2.0 * static_cast<double>(common.size()) / static_cast<double>(ga.size() + gb.size());
}

double string_similarity(std::string_view query, const Node& node, const LexiconTables& tables) {
  std::vector<std::string> q = expanded_tokens(query, tables);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  double token_score = 0.0;
  if (!q.empty()) {
    std::vector<std::string> n = split_whitespace(strip_punctuation_lower(node.id + " " + node.name));
    std::sort(n.begin(), n.end());
    std::size_t shared = 0;
    for (const std::string& t : q) shared += std::binary_search(n.begin(), n.end(), t) ? 1 : 0;
    token_score = static_cast<double>(shared) / static_cast<double>(q.size());
  }
  const double tri = std::max(trigram_dice(query, node.id), trigram_dice(query, node.name));
  return std::max(token_score, tri);
}

std::vector<NodeMatch> link_destination(std::string_view query, const AirportGraph& graph,
                                        std::size_t k, const NodeScorer& scorer) {
  if (collapsed(query).empty()) fail(ErrorCode::kEmptyQuery, "destination query is empty");
  std::vector<NodeMatch> out;
  for (const Node& n : graph.nodes()) {
    const double s = scorer(query, n);
    if (s >= kLinkThreshold) out.push_back({n.id, std::clamp(s, 0.0, 1.0)});
  }
  std::sort(out.begin(), out.end(), [](const NodeMatch& a, const NodeMatch& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<NodeMatch> link_destination(std::string_view query, const AirportGraph& graph,
                                        std::size_t k, const LexiconTables& tables) {
  return link_destination(query, graph, k, [&](std::string_view q, const Node& n) {
    return string_similarity(q, n, tables);
  });
}

NodeId runway_entry_node(const AirportGraph& graph, std::string_view runway,
                         const std::optional<NodeId>& from) {
  const std::vector<NodeId> candidates = graph.runway_nodes(runway);
  if (candidates.empty()) {
    fail(ErrorCode::kUnresolvedDestination, "no nodes for runway " + std::string(runway));
  }
  if (!from) return candidates.front();
  const Node& origin = graph.node(*from);
  NodeId best = candidates.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const NodeId& id : candidates) {
    const Node& n = graph.node(id);
    const double d = std::hypot(n.x - origin.x, n.y - origin.y);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

void validate_plan(const AirportGraph& graph, const TaxiPlan& plan) {
  if (plan.nodes.empty()) fail(ErrorCode::kEmptyPlan, plan.callsign + ": plan has no nodes");
  if (plan.nodes.size() != plan.links.size() + 1) {
    fail(ErrorCode::kInvalidArgument, plan.callsign + ": nodes must be links + 1");
  }
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    if (plan.links[i] >= graph.links().size()) {
      fail(ErrorCode::kInvalidArgument, plan.callsign + ": link index out of range");
    }
    const Link& l = graph.links()[plan.links[i]];
    const bool joins = (l.a == plan.nodes[i] && l.b == plan.nodes[i + 1]) ||
                       (l.b == plan.nodes[i] && l.a == plan.nodes[i + 1]);
    if (!joins) {
      fail(ErrorCode::kInvalidArgument,
           plan.callsign + ": link does not join " + plan.nodes[i] + " and " + plan.nodes[i + 1]);
    }
    if (i > 0 && plan.links[i] == plan.links[i - 1]) {
      fail(ErrorCode::kInvalidArgument, plan.callsign + ": link repeated at " + plan.nodes[i]);
    }
  }
}

TaxiPlan plan_from_nodes(const AirportGraph& graph, std::string callsign,
                         const std::vector<NodeId>& nodes, double start_time) {
  TaxiPlan plan;
  plan.callsign = std::move(callsign);
  plan.start_time = start_time;
  plan.nodes = nodes;
  if (nodes.empty()) fail(ErrorCode::kEmptyPlan, plan.callsign + ": plan has no nodes");
  for (const NodeId& n : nodes) graph.node_index(n);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto li = graph.find_link(nodes[i], nodes[i + 1]);
    if (!li) {
      fail(ErrorCode::kInvalidArgument,
           plan.callsign + ": " + nodes[i] + " and " + nodes[i + 1] + " are not linked");
    }
    plan.links.push_back(*li);
  }
  validate_plan(graph, plan);
  return plan;
}

double plan_length(const AirportGraph& graph, const TaxiPlan& plan) {
  double total = 0.0;
  for (std::size_t li : plan.links) total += graph.links()[li].length;
  return total;
}

namespace {

// Distances to `target` over the undirected graph.
std::vector<double> distances_to(const AirportGraph& graph, std::size_t target) {
  const auto& nodes = graph.nodes();
  std::vector<double> dist(nodes.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[target] = 0.0;
  pq.emplace(0.0, target);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (std::size_t li : graph.incident(nodes[u].id)) {
      const Link& l = graph.links()[li];
      const std::size_t v = graph.node_index(l.other(nodes[u].id));
      const double nd = d + l.length;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

void append_segment(const AirportGraph& graph, const NodeId& from, const NodeId& to,
                    TaxiPlan& plan) {
  const std::size_t target = graph.node_index(to);
  const std::vector<double> dist = distances_to(graph, target);
  std::size_t cur = graph.node_index(from);
  if (!std::isfinite(dist[cur])) fail(ErrorCode::kNoPath, from + " -> " + to);
  const auto& nodes = graph.nodes();
  while (cur != target) {
    const double tol = 1e-9 * std::max(1.0, dist[cur]);
    std::optional<std::size_t> best_link;
    std::size_t best_node = 0;
    for (std::size_t li : graph.incident(nodes[cur].id)) {
      const Link& l = graph.links()[li];
      const std::size_t v = graph.node_index(l.other(nodes[cur].id));
      if (std::abs(l.length + dist[v] - dist[cur]) > tol || !(dist[v] < dist[cur])) continue;
      if (!best_link || nodes[v].id < nodes[best_node].id ||
          (v == best_node && l.length < graph.links()[*best_link].length)) {
        best_link = li;
        best_node = v;
      }
    }
    if (!best_link) fail(ErrorCode::kInvariantViolation, "shortest path walk stalled");
    plan.links.push_back(*best_link);
    plan.nodes.push_back(nodes[best_node].id);
    cur = best_node;
  }
}

}  // namespace

TaxiPlan shortest_taxi_plan(const AirportGraph& graph, const NodeId& from, const NodeId& to,
                            const std::vector<NodeId>& via, double start_time,
                            std::string callsign) {
  graph.node_index(from);
  graph.node_index(to);
  for (const NodeId& v : via) graph.node_index(v);
  TaxiPlan plan;
  plan.callsign = std::move(callsign);
  plan.start_time = start_time;
  plan.nodes.push_back(from);
  std::vector<NodeId> stops = via;
  stops.push_back(to);
  NodeId cur = from;
  for (const NodeId& stop : stops) {
    append_segment(graph, cur, stop, plan);
    cur = stop;
  }
  for (std::size_t i = 1; i < plan.links.size(); ++i) {
    if (plan.links[i] == plan.links[i - 1]) {
      fail(ErrorCode::kNoPath, "route reverses over the same link at " + plan.nodes[i]);
    }
  }
  return plan;
}

std::vector<NodeId> plan_overlap(const TaxiPlan& p1, const TaxiPlan& p2) {
  const std::set<NodeId> other(p2.nodes.begin(), p2.nodes.end());
  std::set<NodeId> seen;
  std::vector<NodeId> out;
  for (const NodeId& n : p1.nodes) {
    if (other.count(n) && seen.insert(n).second) out.push_back(n);
  }
  return out;
}

nlohmann::ordered_json plan_to_json(const AirportGraph& graph, const TaxiPlan& plan) {
  nlohmann::ordered_json j;
  j["callsign"] = plan.callsign;
  j["start_time"] = plan.start_time;
  j["nodes"] = plan.nodes;
  nlohmann::ordered_json links = nlohmann::ordered_json::array();
  for (std::size_t li : plan.links) {
    const Link& l = graph.links()[li];
    nlohmann::ordered_json jl;
    jl["a"] = l.a;
    jl["b"] = l.b;
    jl["length"] = l.length;
    jl["speed_class"] = std::string(to_string(l.speed_class));
    links.push_back(std::move(jl));
  }
  j["links"] = std::move(links);
  j["length"] = plan_length(graph, plan);
  return j;
}

}  // namespace taxisentinel
