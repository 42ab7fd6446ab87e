#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cuberoot/bootstrap.hpp"
#include "cuberoot/core.hpp"
#include "cuberoot/drift_matrix.hpp"
#include "cuberoot/optimize.hpp"
#include "cuberoot/rng.hpp"
#include "cuberoot/vdrift.hpp"

namespace cuberoot::maxscore {

// Row layout: [y, x1, x2_1, ..., x2_d].

struct Kernel {
  std::function<double(double)> k;
  std::function<double(double)> kdot;
};

inline Kernel gaussian_kernel() {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  auto phi = [=](double u) { return inv_sqrt_2pi * std::exp(-0.5 * u * u); };
  return {phi, [=](double u) { return -u * phi(u); }};
}

// m(z, theta) = (2y - 1) 1(x1 + x2'theta >= 0); values in {-1, 0, 1}.
inline double ms_criterion(std::span<const double> row, std::span<const double> theta) {
  double idx = row[1];
  for (std::size_t k = 0; k < theta.size(); ++k) idx += row[2 + k] * theta[k];
  return idx >= 0.0 ? 2.0 * row[0] - 1.0 : 0.0;
}

inline Criterion make_criterion(std::size_t d, Box box) {
  return Criterion{d, [](std::span<const double> row, std::span<const double> theta) {
                     return ms_criterion(row, theta);
                   },
                   std::move(box)};
}

// Compile the (possibly reshaped) maximum score objective with d = 1 into
// the canonical step-plus-quadratic form.  As a function of theta the row
// indicator 1(x1 + x2 theta >= 0) flips at t = -x1/x2; it is on for
// theta >= t when x2 > 0 (right-closed) and for theta <= t when x2 < 0
// (left-closed).  Rows with x2 = 0 are theta-independent constants.
inline StepPlusQuadratic1D compile_ms_objective(const Sample& boot,
                                                const Sample* base,
                                                const Vec* center,
                                                const DriftMatrix* drift,
                                                const Box& box) {
  struct Contrib {
    double t;
    double w;
    bool on_right;  // indicator on for theta >= t, else theta <= t
  };
  const double lo = box.lo[0], hi = box.hi[0];
  std::vector<Contrib> contribs;
  double constant = 0.0;
  bool identified = false;

  auto add_sample = [&](const Sample& s, double sign) {
    const double w_unit = sign / static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto r = s.row(i);
      const double w = w_unit * (2.0 * r[0] - 1.0);
      const double x1 = r[1], x2 = r[2];
      if (x2 == 0.0) {
        if (x1 >= 0.0) constant += w;
        continue;
      }
      identified = true;
      const double t = -x1 / x2;
      const bool on_right = x2 > 0.0;
      if (t <= lo) {
        if (on_right) constant += w;  // always on over [lo, hi]
        continue;
      }
      if (t >= hi) {
        if (!on_right) constant += w;
        continue;
      }
      contribs.push_back({t, w, on_right});
    }
  };
  add_sample(boot, +1.0);
  if (base) add_sample(*base, -1.0);
  if (!identified)
    throw std::runtime_error("maximum score: all x2 are zero, theta is unidentified");

  std::sort(contribs.begin(), contribs.end(),
            [](const Contrib& a, const Contrib& b) { return a.t < b.t; });

  StepPlusQuadratic1D f;
  f.lo = lo;
  f.hi = hi;
  if (center && drift) {
    const double V = drift->at(0, 0), th = (*center)[0];
    f.a = -0.5 * V;
    f.b = V * th;
    f.c = -0.5 * V * th * th;
  }

  // First interval value: constant plus every left-closed indicator, all of
  // which are still on just right of lo.
  double value = constant;
  for (const auto& cb : contribs)
    if (!cb.on_right) value += cb.w;

  f.interval_values.push_back(value);
  std::size_t i = 0;
  while (i < contribs.size()) {
    std::size_t j = i;
    double right_w = 0.0, left_w = 0.0;
    while (j < contribs.size() && contribs[j].t == contribs[i].t) {
      (contribs[j].on_right ? right_w : left_w) += contribs[j].w;
      ++j;
    }
    f.breakpoints.push_back(contribs[i].t);
    f.point_values.push_back(value + right_w);  // both sides on exactly at t
    value += right_w - left_w;
    f.interval_values.push_back(value);
    i = j;
  }
  return f;
}

// Exact argmax engine for d = 1 maximum score bootstrap objectives.
struct MsExactSolver {
  Estimate operator()(const BootstrapObjective& p) const {
    if (p.crit->dim != 1)
      throw std::invalid_argument("MsExactSolver: only d = 1 is supported");
    auto f = compile_ms_objective(*p.boot, p.base, p.center, p.drift, p.crit->box);
    auto r = argmax_exact_1d(f);
    return Estimate{{r.t_star}, r.value, "ms_exact_1d"};
  }
};

// Exact maximum score point estimate (d = 1, midpoint tie-break).
inline Estimate ms_estimate(const Sample& sample, const Box& box) {
  auto f = compile_ms_objective(sample, nullptr, nullptr, nullptr, box);
  auto r = argmax_exact_1d(f);
  return Estimate{{r.t_star}, r.value, "ms_exact_1d"};
}

// Plug-in curvature estimate:
//   -(n h^2)^{-1} sum_i (2y_i - 1) Kdot((x1_i + x2_i'theta_hat)/h) x2_i x2_i',
// symmetrized and PSD-repaired.
inline DriftMatrix plugin_V_MS(const Sample& sample, const Vec& theta_hat, double h,
                               const Kernel& kernel) {
  if (!(h > 0.0)) throw std::invalid_argument("plugin_V_MS: bandwidth must be positive");
  const std::size_t d = theta_hat.size();
  DriftMatrix V(d);
  const std::size_t n = sample.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto r = sample.row(i);
    double idx = r[1];
    for (std::size_t k = 0; k < d; ++k) idx += r[2 + k] * theta_hat[k];
    const double w = -(2.0 * r[0] - 1.0) * kernel.kdot(idx / h);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l) V.at(k, l) += w * r[2 + k] * r[2 + l];
  }
  const double scale = 1.0 / (static_cast<double>(n) * h * h);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) V.at(k, l) *= scale;
  V.symmetrize();
  return psd_repair(V);
}

// Sample standard deviation of the fitted index x1 + x2'theta_hat.
inline double index_sd(const Sample& sample, const Vec& theta_hat) {
  const std::size_t n = sample.size();
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = sample.row(i);
    double idx = r[1];
    for (std::size_t k = 0; k < theta_hat.size(); ++k) idx += r[2 + k] * theta_hat[k];
    double delta = idx - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (idx - mean);
  }
  return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
}

// Rule-of-thumb bandwidth c * scale * n^(-1/7).
inline double rot_bandwidth_MS(std::size_t n, double c_rot, double scale) {
  if (n < 2) throw std::invalid_argument("rot_bandwidth_MS: n must be >= 2");
  return c_rot * scale * std::pow(static_cast<double>(n), -1.0 / 7.0);
}

// Simulation designs: x = (x1, x2)' ~ N((0, 1)', I), independent of the base
// error; y = 1(x1 + x2 theta0 + eps >= 0) with theta0 = 1.
//   DGP 1: eps ~ Logistic(0,1)/sqrt(2 pi^2/3)
//   DGP 2: eps ~ T_3/sqrt(3)
//   DGP 3: eps ~ (1 + 2(x1+x2)^2 + (x1+x2)^4) Logistic(0,1)/sqrt(pi^2/48)
inline Sample ms_dgp(int dgp_id, std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("ms_dgp: n must be >= 1");
  if (dgp_id < 1 || dgp_id > 3) throw std::invalid_argument("ms_dgp: unknown dgp_id");
  constexpr double theta0 = 1.0;
  const double pi = 3.14159265358979323846;
  std::vector<double> flat;
  flat.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.normal();
    const double x2 = 1.0 + rng.normal();
    double eps;
    switch (dgp_id) {
      case 1:
        eps = rng.logistic() / std::sqrt(2.0 * pi * pi / 3.0);
        break;
      case 2:
        eps = rng.student_t3() / std::sqrt(3.0);
        break;
      default: {
        const double s = x1 + x2;
        const double poly = 1.0 + 2.0 * s * s + s * s * s * s;
        eps = poly * rng.logistic() / std::sqrt(pi * pi / 48.0);
        break;
      }
    }
    const double y = (x1 + x2 * theta0 + eps >= 0.0) ? 1.0 : 0.0;
    flat.push_back(y);
    flat.push_back(x1);
    flat.push_back(x2);
  }
  return Sample(3, std::move(flat));
}

}  // namespace cuberoot::maxscore
