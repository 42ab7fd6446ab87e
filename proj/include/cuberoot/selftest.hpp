#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "cuberoot/core.hpp"
#include "cuberoot/grenander.hpp"
#include "cuberoot/maxscore.hpp"
#include "cuberoot/optimize.hpp"
#include "cuberoot/rng.hpp"
#include "cuberoot/vdrift.hpp"

namespace cuberoot::selftest {

// Weighted isotonic (non-increasing) regression by pool-adjacent-violators.
// Used as the independent route for the Grenander/LCM equivalence check.
inline std::vector<double> pava_nonincreasing(const std::vector<double>& y,
                                              const std::vector<double>& w) {
  struct Block {
    double value, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].value < blocks.back().value) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.count += b.count;
    }
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const auto& b : blocks) fit.insert(fit.end(), b.count, b.value);
  return fit;
}

// Grenander slopes at the sorted data points must equal the isotonic
// regression of the raw histogram slopes.
inline bool check_lcm_pava(RngStream& rng, std::size_t trials, double tol,
                           std::ostream& log) {
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t n = 5 + rng.next_below(200);
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.exponential();
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    n = xs.size();

    std::vector<double> slopes(n), widths(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      widths[i] = xs[i] - prev;
      slopes[i] = (1.0 / static_cast<double>(n)) / widths[i];
      prev = xs[i];
    }
    auto iso = pava_nonincreasing(slopes, widths);
    for (std::size_t i = 0; i < n; ++i) {
      double g = grenander::grenander_estimate_sorted(xs, xs[i]);
      if (std::abs(g - iso[i]) > tol) {
        log << "selftest: LCM/PAVA mismatch at trial " << t << " point " << i
            << ": " << g << " vs " << iso[i] << "\n";
        return false;
      }
    }
  }
  return true;
}

// Exact 1-D solver vs direct per-row summation over the closed candidate set.
inline bool check_exact_solver(RngStream& rng, std::size_t trials, std::ostream& log) {
  Box box{{-3.0}, {3.0}};
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t n = 5 + rng.next_below(60);
    std::vector<double> flat;
    for (std::size_t i = 0; i < n; ++i) {
      flat.push_back(rng.next_below(2) ? 1.0 : 0.0);
      flat.push_back(2.0 * rng.uniform01() - 1.0);
      flat.push_back(2.0 * rng.uniform01() - 1.0);
    }
    Sample sample(3, std::move(flat));
    bool with_quad = rng.next_below(2) == 1;
    double V = 0.5 + rng.uniform01();
    Vec center{2.0 * rng.uniform01() - 1.0};
    DriftMatrix drift = DriftMatrix::scalar(V);

    StepPlusQuadratic1D f;
    try {
      f = maxscore::compile_ms_objective(sample, nullptr,
                                         with_quad ? &center : nullptr,
                                         with_quad ? &drift : nullptr, box);
    } catch (const std::runtime_error&) {
      continue;  // unidentified draw, skip
    }
    auto got = argmax_exact_1d(f);

    // Independent route: direct summation at breakpoints and near-breakpoint
    // probes plus clipped quadratic vertices.
    auto direct = [&](double theta) {
      double s = 0.0;
      Vec th{theta};
      for (std::size_t i = 0; i < n; ++i) s += maxscore::ms_criterion(sample.row(i), th);
      s /= static_cast<double>(n);
      if (with_quad) s -= 0.5 * V * (theta - center[0]) * (theta - center[0]);
      return s;
    };
    double best = std::max(direct(box.lo[0]), direct(box.hi[0]));
    std::vector<double> probes;
    for (double b : f.breakpoints) {
      probes.push_back(b);
      probes.push_back(b - 1e-9);
      probes.push_back(b + 1e-9);
    }
    if (with_quad) {
      double vx = center[0];
      probes.push_back(vx);
      for (std::size_t i = 0; i <= f.breakpoints.size(); ++i) {
        double l = i == 0 ? box.lo[0] : f.breakpoints[i - 1];
        double r = i == f.breakpoints.size() ? box.hi[0] : f.breakpoints[i];
        probes.push_back(std::clamp(vx, l, r));
      }
    }
    for (double p : probes)
      if (p >= box.lo[0] && p <= box.hi[0]) best = std::max(best, direct(p));
    if (got.value < best - 1e-9 || got.value > best + 1e-6) {
      log << "selftest: exact solver disagrees with direct-summation probe max "
             "at trial "
          << t << ": " << got.value << " vs " << best << "\n";
      return false;
    }
  }
  return true;
}

// Cross second differences are exact on concave quadratics.
inline bool check_hessian_quadratic(RngStream& rng, std::size_t trials,
                                    std::ostream& log) {
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t d = 1 + rng.next_below(3);
    DriftMatrix A(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        double v = 2.0 * rng.uniform01() - 1.0;
        A.at(i, j) = v;
        A.at(j, i) = v;
      }
      A.at(i, i) += static_cast<double>(d);  // diagonally dominant, PD
    }
    auto f = [&](std::span<const double> th) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += th[i] * A.at(i, j) * th[j];
      return -0.5 * s;
    };
    Box box{Vec(d, -1.0), Vec(d, 1.0)};
    auto V = numerical_hessian(f, Vec(d, 0.0), 0.05, box);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (std::abs(V.at(i, j) - A.at(i, j)) > 1e-9) {
          log << "selftest: hessian mismatch at trial " << t << " (" << i << ","
              << j << ")\n";
          return false;
        }
  }
  return true;
}

inline bool run_all(std::ostream& log, std::uint64_t seed = 20240817) {
  RngStream rng(seed);
  bool ok = true;
  RngStream r1 = rng.child("pava");
  bool a = check_lcm_pava(r1, 25, 1e-12, log);
  log << "selftest lcm/pava:        " << (a ? "ok" : "FAILED") << "\n";
  RngStream r2 = rng.child("solver");
  bool b = check_exact_solver(r2, 100, log);
  log << "selftest exact solver:    " << (b ? "ok" : "FAILED") << "\n";
  RngStream r3 = rng.child("hessian");
  bool c = check_hessian_quadratic(r3, 25, log);
  log << "selftest hessian:         " << (c ? "ok" : "FAILED") << "\n";
  ok = a && b && c;
  return ok;
}

}  // namespace cuberoot::selftest
