#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cuberoot/core.hpp"
#include "cuberoot/drift_matrix.hpp"
#include "cuberoot/rng.hpp"

namespace cuberoot {

// Recentered bootstrap statistics (theta* - theta_hat scale, not
// rate-multiplied).  rate_exponent e means r_n = n^e.
struct BootstrapDraws {
  std::vector<Vec> draws;
  double rate_exponent = 1.0 / 3.0;
  std::size_t n_effective = 0;

  std::size_t count() const { return draws.size(); }
};

// One bootstrap maximization problem handed to a solver:
//   maximize  M*_boot(theta) - [M_base(theta)] - [1/2 (theta-center)' V (theta-center)]
// over the criterion box.  base/center/drift are null for the plain
// (standard or m-out-of-n) bootstrap objective.
struct BootstrapObjective {
  const Criterion* crit = nullptr;
  const Sample* boot = nullptr;
  const Sample* base = nullptr;
  const Vec* center = nullptr;
  const DriftMatrix* drift = nullptr;

  double operator()(std::span<const double> theta) const {
    double v = empirical_objective(*crit, *boot, theta);
    if (base) v -= empirical_objective(*crit, *base, theta);
    if (center && drift) v -= drift->half_quad_form(theta, *center);
    return v;
  }
};

using Solver = std::function<Estimate(const BootstrapObjective&)>;

// M~*_n(theta) = M*_n(theta) - M_n(theta) - 1/2 (theta - theta_hat)' V (theta - theta_hat).
inline double reshaped_objective(const Criterion& crit, const Sample& sample,
                                 std::span<const double> theta_hat,
                                 const DriftMatrix& V, const Sample& boot_sample,
                                 std::span<const double> theta) {
  if (theta.size() != crit.dim || theta_hat.size() != crit.dim || V.dim() != crit.dim)
    throw std::invalid_argument("reshaped_objective: dimension mismatch");
  return empirical_objective(crit, boot_sample, theta) -
         empirical_objective(crit, sample, theta) -
         V.half_quad_form(theta, theta_hat);
}

namespace detail {

template <class MakeObjective>
BootstrapDraws run_bootstrap(const Criterion& crit, const Sample& sample,
                             std::size_t resample_size, std::size_t B,
                             const Solver& solver, const RngStream& rng,
                             std::span<const double> theta_hat,
                             MakeObjective&& make_objective,
                             const char* scheme_tag) {
  if (B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  BootstrapDraws out;
  out.rate_exponent = 1.0 / 3.0;
  out.n_effective = resample_size;
  out.draws.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    RngStream stream = rng.child(scheme_tag, b);
    Sample boot = resample_with_replacement(sample, resample_size, stream);
    Estimate est;
    try {
      est = solver(make_objective(boot));
    } catch (const std::exception& e) {
      throw std::runtime_error("bootstrap replicate " + std::to_string(b) + " (" +
                               scheme_tag + "): solver failed: " + e.what());
    }
    Vec draw(crit.dim);
    for (std::size_t k = 0; k < crit.dim; ++k) draw[k] = est.theta[k] - theta_hat[k];
    out.draws.push_back(std::move(draw));
  }
  return out;
}

}  // namespace detail

// B draws of argmax of the reshaped criterion, recentered at theta_hat.
inline BootstrapDraws reshaped_bootstrap_draws(const Criterion& crit,
                                               const Sample& sample,
                                               const Vec& theta_hat,
                                               const DriftMatrix& V, std::size_t B,
                                               const Solver& solver,
                                               const RngStream& rng) {
  return detail::run_bootstrap(
      crit, sample, sample.size(), B, solver, rng, theta_hat,
      [&](const Sample& boot) {
        return BootstrapObjective{&crit, &boot, &sample, &theta_hat, &V};
      },
      "reshaped");
}

// Standard nonparametric bootstrap (the inconsistent baseline).
inline BootstrapDraws standard_bootstrap_draws(const Criterion& crit,
                                               const Sample& sample,
                                               const Vec& theta_hat, std::size_t B,
                                               const Solver& solver,
                                               const RngStream& rng) {
  return detail::run_bootstrap(
      crit, sample, sample.size(), B, solver, rng, theta_hat,
      [&](const Sample& boot) { return BootstrapObjective{&crit, &boot}; },
      "standard");
}

// m-out-of-n bootstrap, recentered at the full-sample estimate.
inline BootstrapDraws m_out_of_n_draws(const Criterion& crit, const Sample& sample,
                                       const Vec& theta_hat, std::size_t m,
                                       std::size_t B, const Solver& solver,
                                       const RngStream& rng) {
  if (m < 1 || m > sample.size())
    throw std::invalid_argument("m_out_of_n_draws: need 1 <= m <= n");
  return detail::run_bootstrap(
      crit, sample, m, B, solver, rng, theta_hat,
      [&](const Sample& boot) { return BootstrapObjective{&crit, &boot}; },
      "standard");
}

// Empirical quantile: order statistics with linear interpolation at rank
// p (B - 1) + 1 (one-based).
inline double empirical_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  std::sort(v.begin(), v.end());
  double h = p * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= v.size()) return v.back();
  double frac = h - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

struct ConfidenceInterval {
  double lo, hi;
  double length() const { return hi - lo; }
  bool covers(double truth) const { return lo <= truth && truth <= hi; }
};

// Reflected percentile CI: quantiles of the recentered draws, reflected
// around the estimate.  Draws enter at face value for every scheme, so
// m-out-of-n with a small subsample gives a wide interval.  The `direct`
// flag gives the unreflected interval theta_hat + [q_lo, q_hi] instead.
inline ConfidenceInterval percentile_ci(const BootstrapDraws& draws,
                                        const Vec& theta_hat, std::size_t coordinate,
                                        double alpha, bool direct = false) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("percentile_ci: alpha must be in (0, 1)");
  if (draws.draws.empty()) throw std::invalid_argument("percentile_ci: no draws");
  std::vector<double> vals;
  vals.reserve(draws.count());
  for (const auto& d : draws.draws) vals.push_back(d[coordinate]);
  double q_lo = empirical_quantile(vals, alpha / 2.0);
  double q_hi = empirical_quantile(std::move(vals), 1.0 - alpha / 2.0);
  double center = theta_hat[coordinate];
  if (direct) return {center + q_lo, center + q_hi};
  return {center - q_hi, center - q_lo};
}

}  // namespace cuberoot
