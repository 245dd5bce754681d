#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace taxisentinel::quadrature {

// Fills out[i] = f(x[i]). Called with batches of Kronrod nodes so the
// integrand can be evaluated with a vector kernel.
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

struct Options {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  std::size_t initial_panels = 32;
  std::size_t max_intervals = 20000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]; the interval with the
// largest |K15 - G7| is bisected until the summed estimate meets
// max(abs_tol, rel_tol * |value|).
Result integrate(const BatchIntegrand& f, double a, double b, const Options& options = {});

}  // namespace taxisentinel::quadrature
