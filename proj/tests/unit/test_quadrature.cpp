#include <doctest.h>

#include <cmath>
#include <numbers>

#include "taxisentinel/error.hpp"
#include "taxisentinel/quadrature.hpp"

using namespace taxisentinel;

namespace {

quadrature::BatchIntegrand pointwise(double (*f)(double)) {
  return [f](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  };
}

}  // namespace

TEST_CASE("polynomials are exact") {
  const auto r = quadrature::integrate(pointwise([](double x) { return x * x * x - 2.0 * x; }), -1.0, 3.0);
  // [x^4/4 - x^2] from -1 to 3 = (81/4 - 9) - (1/4 - 1) = 12
  CHECK(r.value == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(r.converged);
}

TEST_CASE("gaussian integral") {
  const auto r = quadrature::integrate(pointwise([](double x) { return std::exp(-x * x); }), -12.0, 12.0);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("endpoint singularity refines adaptively") {
  const auto r = quadrature::integrate(pointwise([](double x) { return 1.0 / std::sqrt(x); }), 0.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.intervals > 32);
}

TEST_CASE("bad bounds") {
  CHECK_THROWS_AS(quadrature::integrate(pointwise([](double x) { return x; }), 1.0, 1.0), Error);
}
