#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuberoot/bootstrap.hpp"
#include "cuberoot/rng.hpp"

namespace cuberoot::grenander {

// Piecewise-linear interpolation input for LCM computation; x strictly increasing.
struct PlanarPointSet {
  std::vector<double> x;
  std::vector<double> v;
};

// Right-continuous empirical CDF over a sorted sample.
inline double ecdf_sorted(const std::vector<double>& sorted, double x) {
  if (sorted.empty()) throw std::invalid_argument("ecdf: empty sample");
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

inline double ecdf(std::vector<double> sample, double x) {
  std::sort(sample.begin(), sample.end());
  return ecdf_sorted(sample, x);
}

namespace detail {

// Upper concave hull vertices (monotone chain; input already sorted by x).
inline void upper_hull(const PlanarPointSet& ps, std::vector<double>& hx,
                       std::vector<double>& hv) {
  hx.clear();
  hv.clear();
  const std::size_t n = ps.x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double px = ps.x[i], pv = ps.v[i];
    while (hx.size() >= 2) {
      std::size_t s = hx.size();
      double cross = (hx[s - 1] - hx[s - 2]) * (pv - hv[s - 2]) -
                     (hv[s - 1] - hv[s - 2]) * (px - hx[s - 2]);
      if (cross <= 0.0)
        break;  // last vertex stays on or above the chord
      hx.pop_back();
      hv.pop_back();
    }
    hx.push_back(px);
    hv.push_back(pv);
  }
}

}  // namespace detail

// Slope of the LCM at x0; the segment to the left is used when x0 is a hull
// vertex.  x0 must satisfy min(x) < x0 <= max(x).
inline double lcm_left_derivative(const PlanarPointSet& ps, double x0) {
  if (ps.x.size() < 2) throw std::invalid_argument("lcm_left_derivative: need >= 2 points");
  if (!(x0 > ps.x.front() && x0 <= ps.x.back()))
    throw std::invalid_argument("lcm_left_derivative: x0 outside point range");
  std::vector<double> hx, hv;
  detail::upper_hull(ps, hx, hv);
  // First hull x with hx >= x0; left segment ends there.
  auto it = std::lower_bound(hx.begin(), hx.end(), x0);
  std::size_t j = static_cast<std::size_t>(it - hx.begin());
  // x0 in (hx[j-1], hx[j]]; left derivative is the slope of that segment.
  return (hv[j] - hv[j - 1]) / (hx[j] - hx[j - 1]);
}

namespace detail {

// ECDF vertex set {(0, 0)} u {(x_(i), i/n)}, tied observations collapsed.
inline PlanarPointSet ecdf_points(const std::vector<double>& sorted) {
  PlanarPointSet ps;
  ps.x.push_back(0.0);
  ps.v.push_back(0.0);
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;
    double xi = sorted[i];
    double vi = static_cast<double>(i + 1) / static_cast<double>(n);
    if (xi == ps.x.back()) {
      ps.v.back() = vi;
    } else {
      ps.x.push_back(xi);
      ps.v.push_back(vi);
    }
  }
  return ps;
}

}  // namespace detail

inline double grenander_estimate_sorted(const std::vector<double>& sorted, double x0) {
  if (sorted.empty()) throw std::invalid_argument("grenander_estimate: empty sample");
  if (!(x0 > 0.0 && x0 <= sorted.back()))
    throw std::invalid_argument("grenander_estimate: x0 must lie in (0, max(sample)]");
  return lcm_left_derivative(detail::ecdf_points(sorted), x0);
}

// Left derivative at x0 of the LCM of the empirical CDF, anchored at (0, 0).
inline double grenander_estimate(std::vector<double> sample, double x0) {
  std::sort(sample.begin(), sample.end());
  return grenander_estimate_sorted(sample, x0);
}

// Reshaped bootstrap CDF: the bootstrap ECDF with the original ECDF replaced,
// around x0, by its local quadratic model.
struct ReshapedCDF {
  std::vector<double> boot_points;  // sorted
  std::vector<double> orig_points;  // sorted
  double x0 = 0.0;
  double fhat_x0 = 0.0;     // point density estimate at x0
  double fprime_tilde = 0.0;  // local slope estimate, must be < 0
  double Fhat_x0 = 0.0;     // original ECDF at x0
};

inline double reshaped_cdf_eval(const ReshapedCDF& r, double x) {
  const double dx = x - r.x0;
  return ecdf_sorted(r.boot_points, x) - ecdf_sorted(r.orig_points, x) + r.Fhat_x0 +
         r.fhat_x0 * dx + 0.5 * r.fprime_tilde * dx * dx;
}

// Left derivative at x0 of the LCM of the reshaped CDF.  The hull is taken
// over a knot set holding every jump point, a point 1e-12 to its left (the
// step part's left limit), `knot_densification - 1` interior points per gap
// (tracking the quadratic between jumps), and the quadratic's unconstrained
// vertex.
inline double reshaped_grenander_draw(const ReshapedCDF& r,
                                      std::size_t knot_densification = 4) {
  if (!(r.fprime_tilde < 0.0))
    throw std::invalid_argument("reshaped_grenander_draw: fprime_tilde must be negative");
  if (knot_densification < 1)
    throw std::invalid_argument("reshaped_grenander_draw: knot_densification must be >= 1");

  std::vector<double> knots;
  knots.reserve(2 * (r.boot_points.size() + r.orig_points.size()) +
                4 * knot_densification);
  knots.push_back(0.0);
  knots.push_back(r.x0);
  auto add_jump = [&](double t) {
    knots.push_back(t);
    if (t > 1e-12) knots.push_back(t - 1e-12);
  };
  for (double t : r.boot_points) add_jump(t);
  for (double t : r.orig_points) add_jump(t);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const double xmax = knots.back();
  if (!(r.x0 > 0.0 && r.x0 <= xmax))
    throw std::invalid_argument("reshaped_grenander_draw: x0 at knot range boundary");

  const double vertex = r.x0 - r.fhat_x0 / r.fprime_tilde;
  if (vertex > 0.0 && vertex < xmax) {
    knots.push_back(vertex);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  }

  PlanarPointSet ps;
  ps.x.reserve(knots.size() * knot_densification);
  ps.v.reserve(knots.size() * knot_densification);
  auto add_point = [&](double t) {
    ps.x.push_back(t);
    ps.v.push_back(reshaped_cdf_eval(r, t));
  };
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i > 0 && knot_densification > 1) {
      const double gap = knots[i] - knots[i - 1];
      if (gap > 4e-12) {
        for (std::size_t j = 1; j < knot_densification; ++j)
          add_point(knots[i - 1] + gap * static_cast<double>(j) /
                        static_cast<double>(knot_densification));
      }
    }
    add_point(knots[i]);
  }
  return lcm_left_derivative(ps, r.x0);
}

// Kernel estimate of f'(x0): (n b^2)^{-1} sum Kdot((x0 - x_i)/b), Gaussian kernel.
inline double kernel_fprime(const std::vector<double>& sample, double x0, double b) {
  if (!(b > 0.0)) throw std::invalid_argument("kernel_fprime: bandwidth must be positive");
  if (sample.empty()) throw std::invalid_argument("kernel_fprime: empty sample");
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  double s = 0.0;
  for (double xi : sample) {
    const double u = (x0 - xi) / b;
    s += -u * inv_sqrt_2pi * std::exp(-0.5 * u * u);
  }
  return s / (static_cast<double>(sample.size()) * b * b);
}

// Symmetric difference of Grenander estimates; always <= 0.
inline double nd_fprime(const std::vector<double>& sample, double x0, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("nd_fprime: eps must be positive");
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  if (!(x0 - eps > 0.0 && x0 + eps <= sorted.back()))
    throw std::invalid_argument("nd_fprime: probe point outside data range");
  return (grenander_estimate_sorted(sorted, x0 + eps) -
          grenander_estimate_sorted(sorted, x0 - eps)) /
         (2.0 * eps);
}

// Density designs: DGP 1 Exponential(1), DGP 2 |Normal(0,1)|, DGP 3 |T_3|.
inline std::vector<double> gren_dgp(int dgp_id, std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gren_dgp: n must be >= 1");
  if (dgp_id < 1 || dgp_id > 3) throw std::invalid_argument("gren_dgp: unknown dgp_id");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (dgp_id) {
      case 1: out[i] = rng.exponential(); break;
      case 2: out[i] = std::abs(rng.normal()); break;
      default: out[i] = std::abs(rng.student_t3()); break;
    }
  }
  return out;
}

namespace detail {

inline std::vector<double> resample_sorted(const std::vector<double>& sorted_orig,
                                           std::size_t m, RngStream& rng) {
  std::vector<double> boot(m);
  const std::size_t n = sorted_orig.size();
  for (std::size_t j = 0; j < m; ++j) boot[j] = sorted_orig[rng.next_below(n)];
  std::sort(boot.begin(), boot.end());
  return boot;
}

}  // namespace detail

// Bootstrap draw vectors for f(x0) inference, matching the resampling and
// stream-derivation conventions of the generic bootstrap module.

inline BootstrapDraws reshaped_draws(const std::vector<double>& sorted_sample,
                                     double x0, double fhat_x0, double fprime_tilde,
                                     std::size_t B, const RngStream& rng,
                                     std::size_t knot_densification = 4) {
  BootstrapDraws out;
  out.rate_exponent = 1.0 / 3.0;
  out.n_effective = sorted_sample.size();
  out.draws.reserve(B);
  ReshapedCDF r;
  r.orig_points = sorted_sample;
  r.x0 = x0;
  r.fhat_x0 = fhat_x0;
  r.fprime_tilde = fprime_tilde;
  r.Fhat_x0 = ecdf_sorted(sorted_sample, x0);
  for (std::size_t b = 0; b < B; ++b) {
    RngStream stream = rng.child("reshaped", b);
    r.boot_points = detail::resample_sorted(sorted_sample, sorted_sample.size(), stream);
    out.draws.push_back({reshaped_grenander_draw(r, knot_densification) - fhat_x0});
  }
  return out;
}

inline BootstrapDraws standard_draws(const std::vector<double>& sorted_sample,
                                     double x0, double fhat_x0, std::size_t m,
                                     std::size_t B, const RngStream& rng) {
  if (m < 1 || m > sorted_sample.size())
    throw std::invalid_argument("grenander standard_draws: need 1 <= m <= n");
  BootstrapDraws out;
  out.rate_exponent = 1.0 / 3.0;
  out.n_effective = m;
  out.draws.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    RngStream stream = rng.child("standard", b);
    auto boot = detail::resample_sorted(sorted_sample, m, stream);
    if (!(x0 <= boot.back()))
      throw std::runtime_error("grenander bootstrap replicate " + std::to_string(b) +
                               ": x0 beyond resampled data range");
    out.draws.push_back({grenander_estimate_sorted(boot, x0) - fhat_x0});
  }
  return out;
}

}  // namespace cuberoot::grenander
