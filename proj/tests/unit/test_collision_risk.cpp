#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "taxisentinel/collision_risk.hpp"
#include "taxisentinel/error.hpp"
#include "taxisentinel/montecarlo.hpp"
#include "test_paths.hpp"

using namespace taxisentinel;
using testing_support::fixture;

namespace {

RouteTimeDist dist(double mu, double sigma) {
  RouteTimeDist r;
  r.mu_star = mu;
  r.sigma_star = sigma;
  r.mean = std::exp(mu + 0.5 * sigma * sigma);
  r.variance = std::expm1(sigma * sigma) * r.mean * r.mean;
  r.n_links = 1;
  return r;
}

double lognormal_pdf(double t, double mu, double sigma) {
  if (t <= 0.0) return 0.0;
  const double z = (std::log(t) - mu) / sigma;
  return std::exp(-0.5 * z * z) / (t * sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Direct integral in t of the shifted densities.
double reference_overlap(double m1, double s1, double o1, double m2, double s2, double o2) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double t) { return lognormal_pdf(t - o1, m1, s1) * lognormal_pdf(t - o2, m2, s2); };
  const double lo = std::max(o1, o2);
  const double hi = lo + std::exp(std::max(m1 + 12 * s1, m2 + 12 * s2));
  return GK::integrate(f, lo, hi, 30, 1e-13);
}

}  // namespace

TEST_CASE("expected inverse speed") {
  CHECK(expected_inverse_speed({std::log(10.0), 1e-9}) == doctest::Approx(0.1).epsilon(1e-15));
  const LogNormalParams p{std::log(10.0), 0.2462};
  CHECK(expected_inverse_speed(p) == doctest::Approx(std::exp(-std::log(10.0) + 0.5 * 0.2462 * 0.2462)));
  CHECK(expected_inverse_speed(p) == doctest::Approx(0.1031).epsilon(1e-3));

  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> v(p.mu_log, p.sigma_log);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = 1.0 / v(rng);
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  const double se = std::sqrt((s2 / n - m * m) / n);
  CHECK(std::abs(m - expected_inverse_speed(p)) <= 3.0 * se);

  for (double mu : {-1.0, 0.5, 2.3}) {
    for (double sg : {0.01, 0.3, 1.5}) {
      const LogNormalParams q{mu, sg};
      CHECK(expected_inverse_speed(q) * q.mean() >= 1.0);
    }
  }
}

TEST_CASE("closed form for identical distributions") {
  for (double mu : {0.5, 3.0, 5.5}) {
    for (double s : {0.05, 0.3, 0.8}) {
      const double expected = std::exp(0.25 * s * s - mu) / (2.0 * s * std::sqrt(std::numbers::pi));
      CHECK(std::exp(overlap_log_density_closed_form(dist(mu, s), dist(mu, s))) ==
            doctest::Approx(expected).epsilon(1e-13));
      CHECK(overlap_density_quadrature(dist(mu, s), dist(mu, s)).value ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("closed form against quadrature and against a t-space reference") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> mu(0.0, 6.0), sg(0.05, 0.8);
  for (int i = 0; i < 200; ++i) {
    const auto a = dist(mu(rng), sg(rng));
    const auto b = dist(mu(rng), sg(rng));
    const double cf = overlap_log_density_closed_form(a, b);
    const auto q = overlap_density_quadrature(a, b);
    CHECK(q.converged);
    CHECK(std::abs(std::expm1(q.log_value - cf)) <= 1e-9);
    // Symmetry.
    CHECK(overlap_log_density_closed_form(b, a) == doctest::Approx(cf).epsilon(1e-14));
  }
  const double ref = reference_overlap(3.0, 0.2, 0.0, 3.1, 0.3, 0.0);
  CHECK(std::exp(overlap_log_density_closed_form(dist(3.0, 0.2), dist(3.1, 0.3))) ==
        doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("offsets shift the time origins") {
  const double cases[][6] = {{3.0, 0.2, 0.0, 3.1, 0.3, 7.5},
                             {4.0, 0.1, 12.0, 3.9, 0.15, 0.0},
                             {2.0, 0.5, 3.0, 2.5, 0.4, 1.0},
                             {1.0, 0.3, 0.0, 1.0, 0.3, 2.7}};
  for (const auto& c : cases) {
    const double ref = reference_overlap(c[0], c[1], c[2], c[3], c[4], c[5]);
    const double q = overlap_density(dist(c[0], c[1]), dist(c[3], c[4]), c[2], c[5]);
    CHECK(q == doctest::Approx(ref).epsilon(1e-8));
    const double swapped = overlap_density(dist(c[3], c[4]), dist(c[0], c[1]), c[5], c[2]);
    CHECK(swapped == doctest::Approx(q).epsilon(1e-12));
  }
  // A common shift leaves the density unchanged.
  const double base = overlap_density(dist(3.0, 0.2), dist(3.1, 0.3), 0.0, 4.0);
  CHECK(overlap_density(dist(3.0, 0.2), dist(3.1, 0.3), 10.0, 14.0) == doctest::Approx(base).epsilon(1e-10));
  CHECK_THROWS_AS(overlap_density(dist(3.0, 0.2), dist(3.1, 0.3), -1.0, 0.0), Error);
  CHECK_THROWS_AS(overlap_density_quadrature(dist(3.0, 0.2), dist(3.1, 0.3), 0.0, -1.0), Error);
}

TEST_CASE("vanishing overlap") {
  const auto a = dist(1.0, 0.1);
  const auto b = dist(1.0 + 20.0 * 0.1 * std::sqrt(2.0), 0.1);
  CHECK(overlap_density(a, b) < 1e-30);
  CHECK(overlap_density_quadrature(a, b).value < 1e-30);
}

TEST_CASE("overlap density against a Monte Carlo kernel density") {
  std::mt19937_64 rng(13);
  std::lognormal_distribution<double> x1(3.0, 0.2), x2(3.1, 0.3);
  const int n = 1000000;
  std::vector<double> diff(n);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    diff[i] = x1(rng) - x2(rng);
    s += diff[i];
    s2 += diff[i] * diff[i];
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  const double h = 1.06 * sd * std::pow(n, -0.2);
  double k = 0.0;
  for (double d : diff) k += std::exp(-0.5 * (d / h) * (d / h));
  const double kde = k / (n * h * std::sqrt(2.0 * std::numbers::pi));
  CHECK(overlap_density_quadrature(dist(3.0, 0.2), dist(3.1, 0.3)).value == doctest::Approx(kde).epsilon(0.05));
}

TEST_CASE("collision probability") {
  const auto a = dist(4.0, 0.2);
  const auto b = dist(4.05, 0.25);
  const LogNormalParams v{std::log(10.0), 1e-9};
  const auto s = collision_probability(a, b, {"X", 30.0}, v);
  CHECK(s.inv_speed_expectation == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s.probability == doctest::Approx(2.0 * 30.0 * 0.1 * s.overlap_density).epsilon(1e-14));
  CHECK_FALSE(s.clamped);

  // Linear in r_c below the clamp.
  const auto half = collision_probability(a, b, {"X", 15.0}, v);
  CHECK(half.probability == doctest::Approx(0.5 * s.probability).epsilon(1e-15));

  // P = 2 * 30 * 0.1 * 0.01 = 0.06 for f = 0.01: pick a pair with that density.
  const double target = 0.01;
  const double sigma = 0.3;
  const double mu = std::log(1.0 / (target * 2.0 * sigma * std::sqrt(std::numbers::pi))) + 0.25 * sigma * sigma;
  const auto e = collision_probability(dist(mu, sigma), dist(mu, sigma), {"X", 30.0}, v);
  CHECK(e.overlap_density == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(e.probability == doctest::Approx(0.06).epsilon(1e-8));

  const auto big = collision_probability(a, a, {"X", 5000.0}, v);
  CHECK(big.clamped);
  CHECK(big.probability == 1.0);
  CHECK(big.raw_probability > 1.0);
  CHECK_THROWS_AS(collision_probability(a, b, {"X", 0.0}, v), Error);
}

TEST_CASE("risk maps") {
  SUBCASE("Haneda: the runway merge node carries the highest risk") {
    const Scenario s = load_scenario(fixture("scenarios/haneda_case.json"));
    const RiskMap m = risk_map(s.plans[0], s.plans[1], s.graph, s.config.r_c);
    REQUIRE(!m.scores.empty());
    CHECK(m.scores[m.argmax()].node == "Rwy_03_006");
    for (const auto& r : m.scores) {
      CHECK(r.probability >= 0.0);
      CHECK(r.probability <= 1.0);
    }
  }
  SUBCASE("disjoint plans") {
    const Scenario s = load_scenario(fixture("scenarios/disjoint.json"));
    const RiskMap m = risk_map(s.plans[0], s.plans[1], s.graph, 20.0);
    CHECK(m.scores.empty());
    CHECK(m.argmax() == static_cast<std::size_t>(-1));
  }
  SUBCASE("identical plans on uniform links: risk falls along the path") {
    const auto g = load_graph(fixture("graphs/haneda.json"));
    std::vector<NodeId> nodes;
    for (int i = 1; i <= 12; ++i) nodes.push_back("Txy_C_0" + std::string(i < 10 ? "0" : "") + std::to_string(i));
    const auto p = plan_from_nodes(g, "A", nodes, 0.0);
    const RiskMap m = risk_map(p, p, g, 10.0);
    REQUIRE(m.scores.size() == 11);  // the shared start node is skipped
    CHECK(m.warnings.size() == 1);
    for (std::size_t i = 1; i < m.scores.size(); ++i) CHECK(m.scores[i].probability <= m.scores[i - 1].probability);
  }
  SUBCASE("the trailing aircraft supplies the entry link speed") {
    const auto g = load_graph(fixture("graphs/haneda.json"));
    const auto fast = plan_from_nodes(g, "F", {"Rwy_03_004", "Rwy_03_005", "Rwy_03_006"}, 0.0);
    const auto slow = plan_from_nodes(g, "S", {"Txy_C_006", "Txy_C5_C5B", "Rwy_03_006"}, 0.0);
    const RiskMap m = risk_map(fast, slow, g, 10.0);
    REQUIRE(m.scores.size() == 1);
    const double m_fast = plan_prefix_dist(g, fast, 2).mean;
    const double m_slow = plan_prefix_dist(g, slow, 2).mean;
    const Link& entry = m_slow >= m_fast ? g.links()[*g.find_link("Txy_C5_C5B", "Rwy_03_006")]
                                         : g.links()[*g.find_link("Rwy_03_005", "Rwy_03_006")];
    CHECK(m.scores[0].inv_speed_expectation == doctest::Approx(expected_inverse_speed(entry.speed)).epsilon(1e-15));
    // Delaying the fast aircraft makes it the trailing one.
    auto late = fast;
    late.start_time = 1000.0;
    const RiskMap m2 = risk_map(late, slow, g, 10.0);
    const Link& fast_entry = g.links()[*g.find_link("Rwy_03_005", "Rwy_03_006")];
    CHECK(m2.scores[0].inv_speed_expectation ==
          doctest::Approx(expected_inverse_speed(fast_entry.speed)).epsilon(1e-15));
  }
  SUBCASE("large r_c is flagged") {
    const auto g = load_graph(fixture("graphs/haneda.json"));
    const auto a = plan_from_nodes(g, "A", {"Txy_C_005", "Txy_C_006"}, 0.0);
    const auto b = plan_from_nodes(g, "B", {"Txy_C5_C5B", "Txy_C_006"}, 0.0);
    const RiskMap m = risk_map(a, b, g, 200.0);
    REQUIRE(m.scores.size() == 1);
    CHECK(m.warnings.size() == 1);
  }
  SUBCASE("outputs") {
    const Scenario s = load_scenario(fixture("scenarios/katl_case.json"));
    const RiskMap m = risk_map(s.plans[0], s.plans[1], s.graph, s.config.r_c);
    const auto j = risk_map_json(m);
    REQUIRE(j.size() == m.scores.size());
    std::vector<std::string> keys;
    for (auto it = j[0].begin(); it != j[0].end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"node", "probability", "overlap_density", "inv_speed_expectation", "clamped"});
    const std::string csv = risk_map_csv(m, s.graph);
    CHECK(csv.rfind("node,x,y,probability,overlap_density,inv_speed_expectation,clamped", 0) == 0);
    CHECK_THROWS_AS(risk_map_geojson(m, s.graph), Error);
  }
}
