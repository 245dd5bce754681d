#include "taxisentinel/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "taxisentinel/error.hpp"

namespace taxisentinel::quadrature {
namespace {

// QUADPACK qk15 abscissae/weights; Gauss nodes are the odd entries.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr std::size_t kNodes = 15;

struct Interval {
  double a;
  double b;
  double value;
  double error;
};

struct ByError {
  bool operator()(const Interval& x, const Interval& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  }
};

void fill_nodes(double a, double b, double* x) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (std::size_t j = 0; j < 7; ++j) {
    x[2 * j] = c - h * kXgk[j];
    x[2 * j + 1] = c + h * kXgk[j];
  }
  x[14] = c;
}

Interval reduce(double a, double b, const double* f) {
  const double h = 0.5 * (b - a);
  double kronrod = kWgk[7] * f[14];
  double gauss = kWg[3] * f[14];
  for (std::size_t j = 0; j < 7; ++j) {
    const double pair = f[2 * j] + f[2 * j + 1];
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

std::vector<Interval> evaluate(const BatchIntegrand& f, std::span<const std::pair<double, double>> ranges) {
  std::vector<double> x(ranges.size() * kNodes);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    fill_nodes(ranges[i].first, ranges[i].second, x.data() + i * kNodes);
  }
  f(x, y);
  std::vector<Interval> out;
  out.reserve(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    out.push_back(reduce(ranges[i].first, ranges[i].second, y.data() + i * kNodes));
  }
  return out;
}

}  // namespace

Result integrate(const BatchIntegrand& f, double a, double b, const Options& options) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    fail(ErrorCode::kInvalidArgument, "integration bounds must be finite with b > a");
  }
  const std::size_t panels = std::max<std::size_t>(1, options.initial_panels);
  std::vector<std::pair<double, double>> ranges;
  ranges.reserve(panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t i = 0; i < panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = (i + 1 == panels) ? b : a + width * static_cast<double>(i + 1);
    ranges.emplace_back(lo, hi);
  }

  std::priority_queue<Interval, std::vector<Interval>, ByError> heap;
  double total = 0.0;
  double total_error = 0.0;
  for (const Interval& iv : evaluate(f, ranges)) {
    total += iv.value;
    total_error += iv.error;
    heap.push(iv);
  }

  auto done = [&] {
    return total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  };
  while (!done() && heap.size() < options.max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const std::array<std::pair<double, double>, 2> halves = {
        std::pair{worst.a, mid}, std::pair{mid, worst.b}};
    auto parts = evaluate(f, halves);
    total += parts[0].value + parts[1].value - worst.value;
    total_error += parts[0].error + parts[1].error - worst.error;
    heap.push(parts[0]);
    heap.push(parts[1]);
  }

  // Re-sum in interval order so the result does not depend on the running
  // accumulation history.
  std::vector<Interval> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });
  Result result;
  for (const Interval& iv : all) {
    result.value += iv.value;
    result.error += iv.error;
  }
  result.intervals = all.size();
  result.converged =
      result.error <= std::max(options.abs_tol, options.rel_tol * std::abs(result.value));
  return result;
}

}  // namespace taxisentinel::quadrature
