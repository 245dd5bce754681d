#include "taxisentinel/stats_fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "taxisentinel/error.hpp"
#include "taxisentinel/kernels.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail(ErrorCode::kMalformedFile, where + ": not a number '" + t + "'");
  }
  return v;
}

std::optional<WeightClass> parse_weight_field(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  auto w = parse_weight_class(t);
  if (!w) fail(ErrorCode::kMalformedFile, where + ": unknown weight class " + t);
  return w;
}

std::vector<std::string> csv_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    std::string line(content.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

// Perpendicular distance from p to segment ab, clamped to the endpoints.
double segment_distance(double px, double py, const Node& a, const Node& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

// Mid-ranks (1-based) of the pooled observations plus the tie term sum(t^3 - t).
std::pair<std::vector<double>, double> mid_ranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(pooled.size());
  double ties = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  return {ranks, ties};
}

}  // namespace

std::string_view to_string(WeightClass w) {
  switch (w) {
    case WeightClass::kSmall: return "SMALL";
    case WeightClass::kLarge: return "LARGE";
    case WeightClass::kHeavy: return "HEAVY";
    case WeightClass::kSuper: return "SUPER";
  }
  return "SMALL";
}

std::optional<WeightClass> parse_weight_class(std::string_view name) {
  for (WeightClass w : {WeightClass::kSmall, WeightClass::kLarge, WeightClass::kHeavy, WeightClass::kSuper}) {
    if (to_string(w) == name) return w;
  }
  return std::nullopt;
}

LogNormalParams fit_lognormal(const std::vector<double>& speeds) {
  if (speeds.size() < 2) fail(ErrorCode::kTooFewSamples, "need at least 2 speeds");
  std::vector<double> logs;
  logs.reserve(speeds.size());
  for (double v : speeds) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::kNonpositiveSpeed, format_double(v));
    logs.push_back(std::log(v));
  }
  const double n = static_cast<double>(logs.size());
  const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double ss = 0.0;
  for (double l : logs) ss += (l - mean) * (l - mean);
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0)) fail(ErrorCode::kZeroVariance, "all speeds equal");
  return {mean, sigma};
}

double Hypothesis::cdf(double x) const {
  if (!(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::kInvalidArgument, "hypothesis scale must be > 0");
  }
  if (kind == Kind::kLogNormal) {
    if (x <= 0.0) return 0.0;
    return standard_normal_cdf((std::log(x) - a) / b);
  }
  return standard_normal_cdf((x - a) / b);
}

double Hypothesis::quantile(double p) const {
  if (!(b > 0.0)) fail(ErrorCode::kInvalidArgument, "hypothesis scale must be > 0");
  const boost::math::normal_distribution<double> n(a, b);
  const double q = boost::math::quantile(n, p);
  return kind == Kind::kLogNormal ? std::exp(q) : q;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 0.3) {
    // The alternating series converges slowly here; use the Jacobi-theta
    // form of the CDF instead.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const Hypothesis& h) {
  if (samples.size() < 5) fail(ErrorCode::kTooFewSamples, "K-S test needs n >= 5");
  std::sort(samples.begin(), samples.end());
  std::vector<double> cdf(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) cdf[i] = h.cdf(samples[i]);
  KsResult r;
  r.statistic = std::clamp(kernels::ecdf_sup_gap(cdf), 0.0, 1.0);
  r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(samples.size())) * r.statistic);
  return r;
}

std::vector<std::pair<double, double>> qq_points(std::vector<double> samples, const Hypothesis& h) {
  if (samples.size() < 2) fail(ErrorCode::kTooFewSamples, "QQ needs n >= 2");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.emplace_back(h.quantile((static_cast<double>(i) + 0.5) / n), samples[i]);
  }
  return out;
}

TestResult anova_f(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) fail(ErrorCode::kTooFewSamples, "ANOVA needs at least 2 groups");
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(ErrorCode::kTooFewSamples, "each ANOVA group needs n >= 2");
    total += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double k = static_cast<double>(groups.size());
  const double n = static_cast<double>(total);
  grand /= n;
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : groups) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ssw += (x - m) * (x - m);
  }
  if (!(ssw > 0.0)) fail(ErrorCode::kDegenerateGroups, "within-group variance is zero");
  TestResult r;
  r.df1 = k - 1.0;
  r.df2 = n - k;
  r.statistic = (ssb / r.df1) / (ssw / r.df2);
  const boost::math::fisher_f_distribution<double> f(r.df1, r.df2);
  r.p_value = boost::math::cdf(boost::math::complement(f, r.statistic));
  return r;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) fail(ErrorCode::kTooFewSamples, "Kruskal-Wallis needs at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorCode::kTooFewSamples, "empty Kruskal-Wallis group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  if (pooled.size() < 3) fail(ErrorCode::kTooFewSamples, "Kruskal-Wallis needs N >= 3");
  const auto [ranks, ties] = mid_ranks(pooled);
  const double n = static_cast<double>(pooled.size());
  const double correction = 1.0 - ties / (n * n * n - n);
  if (!(correction > 0.0)) fail(ErrorCode::kAllTied, "every observation is tied");
  double sum = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    offset += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  TestResult t;
  t.statistic = std::max(0.0, (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction);
  t.df1 = static_cast<double>(groups.size()) - 1.0;
  const boost::math::chi_squared_distribution<double> chi(t.df1);
  t.p_value = boost::math::cdf(boost::math::complement(chi, t.statistic));
  return t;
}

std::vector<SpeedSample> link_speed_extract(const std::vector<TrackPoint>& track,
                                            const AirportGraph& graph, const ExtractOptions& options) {
  std::map<std::string, TrackPoint> last;
  std::vector<SpeedSample> out;
  for (TrackPoint p : track) {
    if (p.geodetic) {
      if (!graph.geodetic()) fail(ErrorCode::kInvalidArgument, "geodetic track needs a geodetic graph");
      std::tie(p.x, p.y) = graph.from_lat_lon(p.y, p.x);
      p.geodetic = false;
    }
    auto it = last.find(p.callsign);
    if (it == last.end()) {
      last.emplace(p.callsign, p);
      continue;
    }
    const TrackPoint prev = it->second;
    it->second = p;
    const double dt = p.time - prev.time;
    if (!(dt > 0.0)) {
      fail(ErrorCode::kNonMonotoneTime, p.callsign + " at t=" + format_double(p.time));
    }
    const double speed = std::hypot(p.x - prev.x, p.y - prev.y) / dt;
    if (speed < options.stationary_cutoff) continue;
    const double mx = 0.5 * (p.x + prev.x);
    const double my = 0.5 * (p.y + prev.y);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_link = 0;
    for (std::size_t i = 0; i < graph.links().size(); ++i) {
      const Link& l = graph.links()[i];
      const double d = segment_distance(mx, my, graph.node(l.a), graph.node(l.b));
      if (d < best) {
        best = d;
        best_link = i;
      }
    }
    if (best > options.max_distance) continue;
    const Link& l = graph.links()[best_link];
    out.push_back({l.a + "->" + l.b, prev.time, speed, prev.weight_class ? prev.weight_class : p.weight_class});
  }
  return out;
}

std::vector<TrackPoint> parse_tracks_csv(std::string_view content) {
  const std::vector<std::string> lines = csv_lines(content);
  if (lines.empty()) return {};
  std::vector<std::string> header = parse_csv_line(lines.front());
  for (std::string& h : header) h = to_lower_ascii(trim(h));
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_time = column("time");
  const auto c_call = column("callsign");
  auto c_x = column("x");
  auto c_y = column("y");
  bool geodetic = false;
  if (!c_x || !c_y) {
    c_x = column("lon");
    c_y = column("lat");
    geodetic = true;
  }
  if (!c_time || !c_call || !c_x || !c_y) {
    fail(ErrorCode::kMalformedFile, "track header must name time,callsign,x,y or lat,lon");
  }
  const auto c_w = column("weight_class");
  std::vector<TrackPoint> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = "track line " + std::to_string(i + 1);
    const std::vector<std::string> f = parse_csv_line(lines[i]);
    if (f.size() < header.size()) fail(ErrorCode::kMalformedFile, where + ": missing fields");
    TrackPoint p;
    p.time = parse_number(f[*c_time], where);
    p.callsign = trim(f[*c_call]);
    p.x = parse_number(f[*c_x], where);
    p.y = parse_number(f[*c_y], where);
    p.geodetic = geodetic;
    if (c_w) p.weight_class = parse_weight_field(f[*c_w], where);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<TrackPoint> load_tracks(const std::filesystem::path& path) {
  return parse_tracks_csv(read_text_file(path));
}

std::string speed_samples_csv(const std::vector<SpeedSample>& samples) {
  std::string out = "link,timestamp,speed,weight_class\r\n";
  for (const SpeedSample& s : samples) {
    out += csv_field(s.link_id) + ',' + format_double(s.timestamp) + ',' + format_double(s.speed) + ',' +
           (s.weight_class ? std::string(to_string(*s.weight_class)) : std::string()) + "\r\n";
  }
  return out;
}

std::vector<SpeedSample> parse_speed_samples_csv(std::string_view content) {
  const std::vector<std::string> lines = csv_lines(content);
  std::vector<SpeedSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = "sample line " + std::to_string(i + 1);
    const std::vector<std::string> f = parse_csv_line(lines[i]);
    if (f.size() < 3) fail(ErrorCode::kMalformedFile, where + ": expected link,timestamp,speed[,weight_class]");
    SpeedSample s;
    s.link_id = trim(f[0]);
    s.timestamp = parse_number(f[1], where);
    s.speed = parse_number(f[2], where);
    if (!(s.speed > 0.0) || !std::isfinite(s.speed)) fail(ErrorCode::kNonpositiveSpeed, where);
    if (f.size() > 3) s.weight_class = parse_weight_field(f[3], where);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FitReport> fit_links(const std::vector<SpeedSample>& samples, std::size_t min_samples) {
  std::map<std::string, std::vector<double>> by_link;
  for (const SpeedSample& s : samples) by_link[s.link_id].push_back(s.speed);
  std::vector<FitReport> out;
  for (const auto& [link, speeds] : by_link) {
    if (speeds.size() < std::max<std::size_t>(min_samples, 5)) continue;
    FitReport r;
    r.link_id = link;
    r.n = speeds.size();
    r.params = fit_lognormal(speeds);
    r.ks = ks_test(speeds, Hypothesis::lognormal(r.params));
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::ordered_json fit_reports_json(const std::vector<FitReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const FitReport& r : reports) {
    nlohmann::ordered_json j;
    j["link"] = r.link_id;
    j["n"] = r.n;
    j["mu_log"] = r.params.mu_log;
    j["sigma_log"] = r.params.sigma_log;
    j["ks_statistic"] = r.ks.statistic;
    j["ks_p_value"] = r.ks.p_value;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace taxisentinel
