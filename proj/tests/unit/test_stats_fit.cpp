#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "taxisentinel/error.hpp"
#include "taxisentinel/stats_fit.hpp"
#include "taxisentinel/text_util.hpp"
#include "test_paths.hpp"

using namespace taxisentinel;
using testing_support::fixture;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvariantViolation;
}

AirportGraph two_link_graph() {
  std::vector<Node> nodes = {{"A", "A", 0, 0, NodeKind::kTaxiway, ""},
                             {"B", "B", 1000, 0, NodeKind::kTaxiway, ""},
                             {"C", "C", 1000, 1000, NodeKind::kTaxiway, ""}};
  std::vector<Link> links(2);
  links[0].a = "A";
  links[0].b = "B";
  links[0].length = 1000;
  links[0].speed = {std::log(8.0), 0.2};
  links[1].a = "B";
  links[1].b = "C";
  links[1].length = 1000;
  links[1].speed = {std::log(8.0), 0.2};
  return AirportGraph(std::move(nodes), std::move(links));
}

}  // namespace

TEST_CASE("log-normal fit") {
  const auto p = fit_lognormal({std::exp(1.0), std::exp(3.0)});
  CHECK(p.mu_log == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.sigma_log == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> d(2.0, 0.3);
  std::vector<double> xs(100000);
  for (double& x : xs) x = d(rng);
  const auto q = fit_lognormal(xs);
  CHECK(std::abs(q.mu_log - 2.0) < 3.0 * 0.3 / std::sqrt(1e5));
  CHECK(q.sigma_log == doctest::Approx(0.3).epsilon(0.01));

  CHECK(code_of([] { (void)fit_lognormal({1.0}); }) == ErrorCode::kTooFewSamples);
  CHECK(code_of([] { (void)fit_lognormal({1.0, 0.0}); }) == ErrorCode::kNonpositiveSpeed);
  CHECK(code_of([] { (void)fit_lognormal({2.0, 2.0, 2.0}); }) == ErrorCode::kZeroVariance);
}

TEST_CASE("Kolmogorov survival") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.2238) == doctest::Approx(0.10).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  // Both series agree where they meet.
  const double lo = kolmogorov_survival(0.3 - 1e-12);
  const double hi = kolmogorov_survival(0.3);
  CHECK(lo == doctest::Approx(hi).epsilon(1e-9));
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.05) {
    const double q = kolmogorov_survival(l);
    CHECK(q <= prev);
    CHECK(q >= 0.0);
    prev = q;
  }
}

TEST_CASE("K-S test") {
  const Hypothesis h = Hypothesis::lognormal({1.0, 0.5});
  SUBCASE("quantile sample gives D = 0.5 / n") {
    for (int n : {5, 20, 101}) {
      std::vector<double> xs;
      for (int i = 1; i <= n; ++i) xs.push_back(h.quantile((i - 0.5) / n));
      CHECK(ks_test(xs, h).statistic == doctest::Approx(0.5 / n).epsilon(1e-9));
    }
  }
  SUBCASE("invariant under the log transform") {
    std::mt19937_64 rng(4);
    std::lognormal_distribution<double> d(1.1, 0.45);
    std::vector<double> xs(200), logs;
    for (double& x : xs) {
      x = d(rng);
      logs.push_back(std::log(x));
    }
    const auto a = ks_test(xs, h);
    const auto b = ks_test(logs, Hypothesis::normal(1.0, 0.5));
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
    CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-9));
  }
  SUBCASE("gross mismatch") {
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(50.0 + i);
    const auto r = ks_test(xs, h);
    CHECK(r.statistic > 0.99);
    CHECK(r.p_value < 1e-10);
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { (void)ks_test({1, 2, 3, 4}, h); }) == ErrorCode::kTooFewSamples);
    CHECK(code_of([] { (void)ks_test({1, 2, 3, 4, 5}, Hypothesis::normal(0, 0)); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("QQ points") {
  const Hypothesis h = Hypothesis::normal(0.0, 1.0);
  const auto pts = qq_points({3.0, -1.0, 0.5, 2.0}, h);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].second == -1.0);
  CHECK(pts[3].second == 3.0);
  CHECK(pts[0].first == doctest::Approx(-pts[3].first).epsilon(1e-12));
  CHECK(h.cdf(pts[1].first) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK_THROWS_AS(qq_points({1.0}, h), Error);
}

TEST_CASE("one-way ANOVA") {
  const auto r = anova_f({{1, 2, 3}, {4, 5, 6}});
  CHECK(std::abs(r.statistic - 13.5) <= 1e-10);
  CHECK(r.df1 == 1.0);
  CHECK(r.df2 == 4.0);
  // F(1, n) is the square of Student t(n).
  const boost::math::students_t t(4.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(t, std::sqrt(13.5)));
  CHECK(r.p_value == doctest::Approx(p).epsilon(1e-10));

  const auto shifted = anova_f({{11, 12, 13}, {14, 15, 16}});
  CHECK(shifted.statistic == doctest::Approx(13.5).epsilon(1e-12));
  const auto scaled = anova_f({{3, 6, 9}, {12, 15, 18}});
  CHECK(scaled.statistic == doctest::Approx(13.5).epsilon(1e-12));
  const auto swapped = anova_f({{4, 5, 6}, {1, 2, 3}});
  CHECK(swapped.statistic == doctest::Approx(13.5).epsilon(1e-12));

  const auto same = anova_f({{1, 2, 3}, {3, 2, 1}});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));

  CHECK(code_of([] { (void)anova_f({{1, 2}}); }) == ErrorCode::kTooFewSamples);
  CHECK(code_of([] { (void)anova_f({{1, 2}, {3}}); }) == ErrorCode::kTooFewSamples);
  CHECK(code_of([] { (void)anova_f({{1, 1}, {3, 3}}); }) == ErrorCode::kDegenerateGroups);
}

TEST_CASE("Kruskal-Wallis") {
  // Ranks 1,2 | 3,4: H = 12 / 20 * (9/2 + 49/2) - 15 = 2.4.
  const auto r = kruskal_wallis({{1, 2}, {3, 4}});
  CHECK(r.statistic == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(r.df1 == 1.0);
  CHECK(r.p_value == doctest::Approx(std::erfc(std::sqrt(1.2))).epsilon(1e-12));

  // Ties: ranks 1.5,1.5 | 3,4 with correction 1 - 6/60.
  const auto tied = kruskal_wallis({{1, 1}, {3, 4}});
  const double h = (12.0 / 20.0 * (9.0 / 2.0 + 49.0 / 2.0) - 15.0) / (1.0 - 6.0 / 60.0);
  CHECK(tied.statistic == doctest::Approx(h).epsilon(1e-14));

  // Monotone transforms leave H unchanged.
  const auto logged = kruskal_wallis({{std::log(1.0), std::log(2.0)}, {std::log(3.0), std::log(4.0)}});
  CHECK(logged.statistic == doctest::Approx(2.4).epsilon(1e-14));

  CHECK(code_of([] { (void)kruskal_wallis({{5, 5}, {5, 5}}); }) == ErrorCode::kAllTied);
  CHECK(code_of([] { (void)kruskal_wallis({{1}, {}}); }) == ErrorCode::kTooFewSamples);
  CHECK(code_of([] { (void)kruskal_wallis({{1}, {2}}); }) == ErrorCode::kTooFewSamples);
}

TEST_CASE("link speed extraction") {
  const AirportGraph g = two_link_graph();
  std::vector<TrackPoint> t = {{0, "X", 100, 5, WeightClass::kHeavy},
                               {10, "X", 180, 5, WeightClass::kHeavy},
                               {20, "X", 180, 5, WeightClass::kHeavy},   // stationary
                               {30, "X", 995, 300, WeightClass::kHeavy},  // off-link midpoint
                               {0, "Y", 1000, 400, std::nullopt},
                               {4, "Y", 1000, 424, std::nullopt}};
  auto s = link_speed_extract(t, g);
  REQUIRE(s.size() == 2);
  CHECK(s[0].link_id == "A->B");
  CHECK(s[0].speed == doctest::Approx(8.0));
  CHECK(s[0].timestamp == 0.0);
  CHECK(s[0].weight_class == WeightClass::kHeavy);
  CHECK(s[1].link_id == "B->C");
  CHECK(s[1].speed == doctest::Approx(6.0));
  CHECK_FALSE(s[1].weight_class.has_value());

  ExtractOptions tight;
  tight.max_distance = 1.0;
  CHECK(link_speed_extract(t, g, tight).size() == 1);
  ExtractOptions slow;
  slow.stationary_cutoff = 7.0;
  CHECK(link_speed_extract(t, g, slow).size() == 1);

  std::vector<TrackPoint> bad = {{5, "X", 0, 0, std::nullopt}, {5, "X", 10, 0, std::nullopt}};
  CHECK(code_of([&] { (void)link_speed_extract(bad, g); }) == ErrorCode::kNonMonotoneTime);
}

TEST_CASE("track and sample CSV") {
  const auto t = parse_tracks_csv("time,callsign,x,y,weight_class\n0,A,1,2,HEAVY\n1,A,3,4,\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0].weight_class == WeightClass::kHeavy);
  CHECK_FALSE(t[1].weight_class.has_value());
  CHECK(t[1].x == 3.0);
  const auto geo = parse_tracks_csv("time,callsign,lat,lon\n0,A,33.6,-84.4\n");
  REQUIRE(geo.size() == 1);
  CHECK(geo[0].geodetic);
  CHECK(geo[0].y == 33.6);
  CHECK(geo[0].x == -84.4);
  CHECK_THROWS_AS(link_speed_extract(geo, two_link_graph()), Error);
  CHECK(code_of([] { (void)parse_tracks_csv("t,c\n1,2\n"); }) == ErrorCode::kMalformedFile);
  CHECK(code_of([] { (void)parse_tracks_csv("time,callsign,x,y\n1,A,zz,2\n"); }) == ErrorCode::kMalformedFile);

  const std::vector<SpeedSample> s = {{"A->B", 1.5, 7.25, WeightClass::kLarge}, {"B->C", 2.0, 3.0, std::nullopt}};
  const auto back = parse_speed_samples_csv(speed_samples_csv(s));
  REQUIRE(back.size() == 2);
  CHECK(back[0].link_id == "A->B");
  CHECK(back[0].timestamp == 1.5);
  CHECK(back[0].speed == 7.25);
  CHECK(back[0].weight_class == WeightClass::kLarge);
  CHECK_FALSE(back[1].weight_class.has_value());
  CHECK(code_of([] { (void)parse_speed_samples_csv("link,timestamp,speed\nA->B,1,-2\n"); }) ==
        ErrorCode::kNonpositiveSpeed);
}

TEST_CASE("bundled tracks and samples") {
  const auto tracks = load_tracks(fixture("tracks/katl_taxiway_e.csv"));
  CHECK(!tracks.empty());
  const auto g = load_graph(fixture("graphs/katl.json"));
  const auto samples = link_speed_extract(tracks, g);
  CHECK(!samples.empty());
  for (const auto& s : samples) CHECK(s.speed >= 0.5);
  const auto reports = fit_links(samples, 5);
  CHECK(!reports.empty());
  for (std::size_t i = 1; i < reports.size(); ++i) CHECK(reports[i - 1].link_id < reports[i].link_id);
  const auto j = fit_reports_json(reports);
  CHECK(j.size() == reports.size());

  const auto ws = parse_speed_samples_csv(read_text_file(fixture("stats/weight_class_samples.csv")));
  std::map<std::string, std::map<WeightClass, std::vector<double>>> by;
  for (const auto& s : ws) by[s.link_id][*s.weight_class].push_back(s.speed);
  REQUIRE(by.size() == 2);
  std::vector<std::vector<double>> differing, equal;
  for (auto& [w, v] : by["Txy_E_004->Txy_E_003"]) differing.push_back(v);
  for (auto& [w, v] : by["Txy_E_003->Txy_E_002"]) equal.push_back(v);
  CHECK(anova_f(differing).p_value < 0.05);
  CHECK(kruskal_wallis(differing).p_value < 0.05);
  CHECK(anova_f(equal).p_value > 0.05);
}

TEST_CASE("weight classes") {
  for (auto w : {WeightClass::kSmall, WeightClass::kLarge, WeightClass::kHeavy, WeightClass::kSuper}) {
    CHECK(parse_weight_class(to_string(w)) == w);
  }
  CHECK_FALSE(parse_weight_class("jumbo").has_value());
}
