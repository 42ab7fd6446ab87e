#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cuberoot/core.hpp"

namespace cuberoot {

// Which adjacent interval's step value is attained exactly at a breakpoint.
enum class StepSide { Left, Right };

// Canonical objective form for d = 1 step criteria: a piecewise-constant part
// plus a concave quadratic q(t) = a t^2 + b t + c, a <= 0.
//
// The step part is stored as the value on each open interval between
// breakpoints plus the value attained exactly at each breakpoint (this
// subsumes per-breakpoint side flags and also handles coincident
// breakpoints of mixed sidedness).
struct StepPlusQuadratic1D {
  std::vector<double> breakpoints;      // strictly increasing, inside (lo, hi)
  std::vector<double> interval_values;  // size breakpoints.size() + 1
  std::vector<double> point_values;     // size breakpoints.size()
  double a = 0.0, b = 0.0, c = 0.0;     // a <= 0
  double lo = 0.0, hi = 0.0;

  double quad(double t) const { return (a * t + b) * t + c; }

  void validate() const {
    if (!(lo < hi)) throw std::invalid_argument("StepPlusQuadratic1D: empty domain");
    if (a > 0.0) throw std::invalid_argument("StepPlusQuadratic1D: quadratic must be concave");
    if (interval_values.size() != breakpoints.size() + 1 ||
        point_values.size() != breakpoints.size())
      throw std::invalid_argument("StepPlusQuadratic1D: inconsistent sizes");
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
      if (breakpoints[k] <= lo || breakpoints[k] >= hi ||
          (k > 0 && breakpoints[k] <= breakpoints[k - 1]))
        throw std::invalid_argument("StepPlusQuadratic1D: breakpoints must be strictly increasing inside domain");
    }
  }

  static StepPlusQuadratic1D from_sides(std::vector<double> breakpoints,
                                        const std::vector<StepSide>& sides,
                                        std::vector<double> interval_values,
                                        double a, double b, double c,
                                        double lo, double hi) {
    StepPlusQuadratic1D f;
    f.breakpoints = std::move(breakpoints);
    f.interval_values = std::move(interval_values);
    f.point_values.resize(f.breakpoints.size());
    for (std::size_t k = 0; k < f.breakpoints.size(); ++k)
      f.point_values[k] = sides[k] == StepSide::Left ? f.interval_values[k]
                                                     : f.interval_values[k + 1];
    f.a = a; f.b = b; f.c = c; f.lo = lo; f.hi = hi;
    f.validate();
    return f;
  }

  // Total value at t; breakpoints take their attained point value.
  double eval(double t) const {
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - breakpoints.begin());
    double step = (it != breakpoints.end() && *it == t) ? point_values[idx]
                                                        : interval_values[idx];
    return step + quad(t);
  }
};

struct ArgmaxResult {
  double t_star;
  double value;
};

namespace detail {

// For pure step objectives: midpoint of the leftmost maximizing region.
// Entries alternate interval, point, interval, ... over the domain.
inline ArgmaxResult step_only_argmax(const StepPlusQuadratic1D& f) {
  const std::size_t kb = f.breakpoints.size();
  double best = -std::numeric_limits<double>::infinity();
  for (double v : f.interval_values) best = std::max(best, v);
  for (double v : f.point_values) best = std::max(best, v);
  const double tol = 1e-12 * (1.0 + std::abs(best));

  auto edge = [&](std::size_t slot) {  // left edge position of entry `slot`
    // slot 2i   -> interval i, spanning (edge, breakpoints[i])
    // slot 2i+1 -> breakpoint i
    std::size_t i = slot / 2;
    if (slot % 2 == 1) return f.breakpoints[i];
    return i == 0 ? f.lo : f.breakpoints[i - 1];
  };
  auto value_at = [&](std::size_t slot) {
    std::size_t i = slot / 2;
    return slot % 2 == 1 ? f.point_values[i] : f.interval_values[i];
  };

  const std::size_t nslots = 2 * kb + 1;
  for (std::size_t s = 0; s < nslots; ++s) {
    if (value_at(s) < best - tol) continue;
    std::size_t e = s;
    while (e + 1 < nslots && value_at(e + 1) >= best - tol) ++e;
    double left = edge(s);
    double right = (e % 2 == 1) ? f.breakpoints[e / 2]
                                : (e / 2 == kb ? f.hi : f.breakpoints[e / 2]);
    if (s % 2 == 1 && e == s) return {f.breakpoints[s / 2], best};  // isolated point
    return {0.5 * (left + right), best};
  }
  return {0.5 * (f.lo + f.hi), best};  // unreachable
}

}  // namespace detail

// Exact global maximizer of a step-plus-concave-quadratic objective.
// Candidates per interval: the vertex clipped to the interval and both
// endpoints with the interval's one-sided step value; plus every breakpoint
// with its attained value.  Returns the supremum; when the supremum is a
// one-sided limit at a breakpoint the reported location is that breakpoint.
inline ArgmaxResult argmax_exact_1d(const StepPlusQuadratic1D& f) {
  f.validate();
  if (f.a == 0.0 && f.b == 0.0) {
    auto r = detail::step_only_argmax(f);
    return {r.t_star, r.value + f.c};
  }

  const std::size_t kb = f.breakpoints.size();
  double best_t = f.lo;
  double best_v = -std::numeric_limits<double>::infinity();
  auto consider = [&](double t, double v) {
    if (v > best_v || (v == best_v && t < best_t)) {
      best_v = v;
      best_t = t;
    }
  };

  for (std::size_t i = 0; i <= kb; ++i) {
    double l = i == 0 ? f.lo : f.breakpoints[i - 1];
    double r = i == kb ? f.hi : f.breakpoints[i];
    double sv = f.interval_values[i];
    consider(l, sv + f.quad(l));
    consider(r, sv + f.quad(r));
    if (f.a < 0.0) {
      double v = -f.b / (2.0 * f.a);
      if (v > l && v < r) consider(v, sv + f.quad(v));
    }
  }
  for (std::size_t k = 0; k < kb; ++k)
    consider(f.breakpoints[k], f.point_values[k] + f.quad(f.breakpoints[k]));
  return {best_t, best_v};
}

// Coarse-to-fine grid search: evaluate a full grid, shrink the box by 1/3
// around the best point, repeat.  Deterministic; fallback for d > 1 and for
// black-box probe objectives.
struct GridArgmaxResult {
  Vec theta;
  double value;
};

inline GridArgmaxResult argmax_grid(
    const std::function<double(std::span<const double>)>& objective,
    const Box& box, std::size_t grid_points_per_dim, std::size_t refine_rounds) {
  if (grid_points_per_dim < 3)
    throw std::invalid_argument("argmax_grid: need at least 3 points per dimension");
  const std::size_t d = box.dim();
  Vec lo = box.lo, hi = box.hi;
  Vec best_theta(d, 0.0);
  double best_value = -std::numeric_limits<double>::infinity();
  Vec theta(d);
  std::vector<std::size_t> idx(d);

  for (std::size_t round = 0; round <= refine_rounds; ++round) {
    std::fill(idx.begin(), idx.end(), 0);
    Vec round_best_theta = best_theta;
    double round_best = -std::numeric_limits<double>::infinity();
    while (true) {
      for (std::size_t k = 0; k < d; ++k)
        theta[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx[k]) /
                               static_cast<double>(grid_points_per_dim - 1);
      double v = objective(theta);
      if (!std::isfinite(v)) {
        std::string where = "argmax_grid: non-finite objective at theta = (";
        for (std::size_t k = 0; k < d; ++k)
          where += std::to_string(theta[k]) + (k + 1 < d ? ", " : ")");
        throw std::runtime_error(where);
      }
      if (v > round_best) {
        round_best = v;
        round_best_theta = theta;
      }
      std::size_t k = 0;
      while (k < d && ++idx[k] == grid_points_per_dim) idx[k++] = 0;
      if (k == d) break;
    }
    if (round_best > best_value) {
      best_value = round_best;
      best_theta = round_best_theta;
    }
    // Shrink around the best point by factor 1/3, clipped to the original box.
    for (std::size_t k = 0; k < d; ++k) {
      double half = (hi[k] - lo[k]) / 6.0;
      double c = best_theta[k];
      lo[k] = std::max(box.lo[k], c - half);
      hi[k] = std::min(box.hi[k], c + half);
    }
  }
  return {best_theta, best_value};
}

}  // namespace cuberoot
