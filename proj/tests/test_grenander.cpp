#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cuberoot/grenander.hpp"

using namespace cuberoot;
using namespace cuberoot::grenander;

namespace {

// O(n^3) hull oracle: a point is a hull vertex iff no chord between an
// earlier and a later point passes strictly above it.  The left derivative at
// x0 is the slope between the consecutive vertices bracketing it.
double brute_lcm_left_derivative(const PlanarPointSet& ps, double x0) {
  const std::size_t n = ps.x.size();
  std::vector<std::size_t> verts;
  for (std::size_t k = 0; k < n; ++k) {
    bool dominated = false;
    for (std::size_t i = 0; i < k && !dominated; ++i)
      for (std::size_t j = k + 1; j < n && !dominated; ++j) {
        double chord = ps.v[i] + (ps.v[j] - ps.v[i]) * (ps.x[k] - ps.x[i]) /
                                     (ps.x[j] - ps.x[i]);
        if (chord > ps.v[k] + 1e-12) dominated = true;
      }
    if (!dominated) verts.push_back(k);
  }
  for (std::size_t t = 1; t < verts.size(); ++t) {
    double xl = ps.x[verts[t - 1]], xr = ps.x[verts[t]];
    if (x0 > xl && x0 <= xr)
      return (ps.v[verts[t]] - ps.v[verts[t - 1]]) / (xr - xl);
  }
  throw std::logic_error("brute_lcm_left_derivative: x0 not bracketed");
}

}  // namespace

TEST_CASE("ecdf: hand values and empty input") {
  std::vector<double> s{1.0, 2.0, 3.0};
  CHECK(ecdf(s, 0.5) == 0.0);
  CHECK(ecdf(s, 1.0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(ecdf(s, 2.5) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(ecdf(s, 3.0) == 1.0);
  CHECK(ecdf(s, 10.0) == 1.0);
  CHECK_THROWS_AS(ecdf_sorted({}, 0.0), std::invalid_argument);
}

TEST_CASE("lcm_left_derivative: concave points are kept") {
  PlanarPointSet ps{{0.0, 1.0, 2.0}, {0.0, 0.9, 1.0}};
  CHECK(lcm_left_derivative(ps, 0.5) == Catch::Approx(0.9).margin(1e-15));
  CHECK(lcm_left_derivative(ps, 1.0) == Catch::Approx(0.9).margin(1e-15));
  CHECK(lcm_left_derivative(ps, 1.5) == Catch::Approx(0.1).margin(1e-15));
  CHECK(lcm_left_derivative(ps, 2.0) == Catch::Approx(0.1).margin(1e-15));
}

TEST_CASE("lcm_left_derivative: a point below the chord is dropped") {
  PlanarPointSet ps{{0.0, 1.0, 2.0}, {0.0, 0.2, 1.0}};
  for (double x0 : {0.5, 1.0, 1.5, 2.0})
    CHECK(lcm_left_derivative(ps, x0) == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("lcm_left_derivative: domain checks") {
  PlanarPointSet ps{{0.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(lcm_left_derivative(ps, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lcm_left_derivative(ps, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(lcm_left_derivative({{0.0}, {0.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("lcm_left_derivative: matches O(n^3) hull oracle on random inputs") {
  RngStream rng(61);
  for (int t = 0; t < 25; ++t) {
    std::size_t n = 5 + rng.next_below(35);
    PlanarPointSet ps;
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x += 0.01 + rng.uniform01();
      ps.x.push_back(x);
      ps.v.push_back(rng.normal());
    }
    for (int q = 0; q < 8; ++q) {
      double x0 = ps.x.front() +
                  (ps.x.back() - ps.x.front()) * (0.05 + 0.95 * rng.uniform01());
      CHECK(lcm_left_derivative(ps, x0) ==
            Catch::Approx(brute_lcm_left_derivative(ps, x0)).margin(1e-9));
    }
  }
}

TEST_CASE("grenander_estimate: hand samples") {
  // {1, 2}: ECDF knots are collinear with the origin.
  for (double x0 : {0.5, 1.0, 1.7, 2.0})
    CHECK(grenander_estimate({1.0, 2.0}, x0) == Catch::Approx(0.5).margin(1e-15));

  CHECK(grenander_estimate({1.0}, 1.0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(grenander_estimate({1.0}, 0.25) == Catch::Approx(1.0).margin(1e-15));

  // {1, 1, 2}: slopes 2/3 on (0, 1] and 1/3 on (1, 2].
  std::vector<double> s{1.0, 1.0, 2.0};
  CHECK(grenander_estimate(s, 0.5) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(grenander_estimate(s, 1.0) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(grenander_estimate(s, 1.5) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(grenander_estimate(s, 2.0) == Catch::Approx(1.0 / 3.0).margin(1e-15));

  CHECK_THROWS_AS(grenander_estimate({1.0, 2.0}, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(grenander_estimate({1.0, 2.0}, 2.5), std::invalid_argument);
}

TEST_CASE("grenander_estimate: consistent for the Exponential(1) density at 1") {
  RngStream rng(62);
  auto s = gren_dgp(1, 100000, rng);
  double fhat = grenander_estimate(s, 1.0);
  CHECK(std::abs(fhat - std::exp(-1.0)) < 0.05);
}

TEST_CASE("grenander_estimate: non-increasing in x0 and integrates to one") {
  RngStream rng(63);
  auto s = gren_dgp(1, 400, rng);
  std::sort(s.begin(), s.end());
  double prev = 1e300;
  for (int q = 1; q <= 50; ++q) {
    double x0 = s.back() * q / 50.0;
    if (!(x0 > 0.0)) continue;
    double g = grenander_estimate_sorted(s, x0);
    CHECK(g <= prev + 1e-12);
    prev = g;
  }
  double mass = 0.0, left = 0.0;
  for (double xi : s) {
    if (xi > left) mass += grenander_estimate_sorted(s, xi) * (xi - left);
    left = xi;
  }
  CHECK(mass == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("reshaped_cdf_eval: term-by-term hand oracle") {
  ReshapedCDF r;
  r.boot_points = {1.0, 1.0, 3.0};
  r.orig_points = {1.0, 2.0, 3.0};
  r.x0 = 2.0;
  r.fhat_x0 = 0.4;
  r.fprime_tilde = -0.1;
  r.Fhat_x0 = ecdf_sorted(r.orig_points, r.x0);
  // At x = 2.5: boot ECDF 2/3, orig ECDF 2/3, dx = 0.5.
  double expected = 2.0 / 3.0 - 2.0 / 3.0 + 2.0 / 3.0 + 0.4 * 0.5 +
                    0.5 * (-0.1) * 0.25;
  CHECK(reshaped_cdf_eval(r, 2.5) == Catch::Approx(expected).margin(1e-15));
  // At x = x0 the step parts cancel against Fhat and the polynomial is flat.
  CHECK(reshaped_cdf_eval(r, 2.0) == Catch::Approx(r.Fhat_x0).margin(1e-15));
}

TEST_CASE("reshaped_grenander_draw: degenerate resample recovers fhat") {
  // boot == orig makes the step parts cancel, leaving the concave quadratic;
  // its LCM left derivative at x0 is fhat up to the knot spacing bias.
  ReshapedCDF r;
  r.orig_points = {0.5, 1.0, 1.5, 2.0};
  r.boot_points = r.orig_points;
  r.x0 = 1.0;
  r.fhat_x0 = 0.4;
  r.fprime_tilde = -0.01;
  r.Fhat_x0 = ecdf_sorted(r.orig_points, r.x0);
  CHECK(reshaped_grenander_draw(r, 8) == Catch::Approx(0.4).margin(1e-3));
}

TEST_CASE("reshaped_grenander_draw: input validation") {
  ReshapedCDF r;
  r.orig_points = {0.5, 1.0};
  r.boot_points = r.orig_points;
  r.x0 = 1.0;
  r.fhat_x0 = 0.4;
  r.fprime_tilde = 0.0;
  CHECK_THROWS_AS(reshaped_grenander_draw(r), std::invalid_argument);
  r.fprime_tilde = -0.1;
  CHECK_THROWS_AS(reshaped_grenander_draw(r, 0), std::invalid_argument);
  CHECK_NOTHROW(reshaped_grenander_draw(r, 1));
}

TEST_CASE("reshaped_grenander_draw: matches dense-grid hull oracle") {
  RngStream rng(64);
  for (int t = 0; t < 6; ++t) {
    RngStream data = rng.child("data", t);
    auto orig = gren_dgp(1, 15, data);
    std::sort(orig.begin(), orig.end());
    RngStream boot_rng = rng.child("boot", t);
    ReshapedCDF r;
    r.orig_points = orig;
    r.boot_points = orig;
    for (auto& v : r.boot_points) v = orig[boot_rng.next_below(orig.size())];
    std::sort(r.boot_points.begin(), r.boot_points.end());
    r.x0 = 0.8 * orig[orig.size() / 2];
    if (!(r.x0 > 0.0)) continue;
    r.fhat_x0 = grenander_estimate_sorted(orig, r.x0);
    r.fprime_tilde = -0.5;
    r.Fhat_x0 = ecdf_sorted(orig, r.x0);

    double got = reshaped_grenander_draw(r, 64);

    // Oracle: evaluate the reshaped CDF on a dense uniform grid augmented
    // with the exact jump locations, then query the hull oracle path
    // (lcm_left_derivative is already verified against the O(n^3) oracle).
    double xmax = std::max(orig.back(), r.boot_points.back());
    PlanarPointSet ps;
    const int grid = 200000;
    std::vector<double> xs;
    for (int i = 0; i <= grid; ++i) xs.push_back(xmax * i / static_cast<double>(grid));
    for (double j : orig) {
      xs.push_back(j);
      xs.push_back(j - 1e-12);
    }
    for (double j : r.boot_points) {
      xs.push_back(j);
      xs.push_back(j - 1e-12);
    }
    xs.push_back(r.x0);
    double vertex = r.x0 - r.fhat_x0 / r.fprime_tilde;
    if (vertex > 0.0 && vertex < xmax) xs.push_back(vertex);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    while (!xs.empty() && xs.front() < 0.0) xs.erase(xs.begin());
    for (double x : xs) {
      ps.x.push_back(x);
      ps.v.push_back(reshaped_cdf_eval(r, x));
    }
    double oracle = lcm_left_derivative(ps, r.x0);
    CHECK(got == Catch::Approx(oracle).margin(2e-3));
  }
}

TEST_CASE("kernel_fprime: hand values and consistency") {
  // Single observation at x0: Kdot(0) = 0.
  CHECK(kernel_fprime({1.0}, 1.0, 0.3) == 0.0);
  // Single observation with u = 1: Kdot(1) = -phi(1), scaled by 1/b^2.
  const double b = 0.5;
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * 3.14159265358979323846);
  CHECK(kernel_fprime({0.0}, b, b) == Catch::Approx(-phi1 / (b * b)).margin(1e-15));
  CHECK_THROWS_AS(kernel_fprime({1.0}, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_fprime({}, 1.0, 0.5), std::invalid_argument);

  RngStream rng(65);
  auto s = gren_dgp(1, 200000, rng);
  double fp = kernel_fprime(s, 1.0, 0.25);
  CHECK(std::abs(fp - (-std::exp(-1.0))) < 0.05);
}

TEST_CASE("nd_fprime: hand values from known Grenander slopes") {
  std::vector<double> s{1.0, 1.0, 2.0};
  // Both probes land on the (1, 2] segment: zero difference.
  CHECK(nd_fprime(s, 1.2, 0.1) == 0.0);
  // Probes straddle the kink at 1: (1/3 - 2/3)/0.6.
  CHECK(nd_fprime(s, 1.2, 0.3) == Catch::Approx(-5.0 / 9.0).margin(1e-12));
  CHECK_THROWS_AS(nd_fprime(s, 1.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nd_fprime(s, 0.1, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(nd_fprime(s, 1.95, 0.2), std::invalid_argument);
}

TEST_CASE("gren_dgp: design moments") {
  RngStream rng(66);
  RngStream r1 = rng.child("d", 1);
  auto e = gren_dgp(1, 100000, r1);
  double mean = 0.0;
  for (double v : e) {
    CHECK(v > 0.0);
    mean += v;
  }
  mean /= static_cast<double>(e.size());
  CHECK(std::abs(mean - 1.0) < 0.02);

  RngStream r2 = rng.child("d", 2);
  auto h = gren_dgp(2, 100000, r2);
  double mh = 0.0;
  for (double v : h) {
    CHECK(v >= 0.0);
    mh += v;
  }
  mh /= static_cast<double>(h.size());
  CHECK(std::abs(mh - std::sqrt(2.0 / 3.14159265358979323846)) < 0.02);

  RngStream r3 = rng.child("d", 3);
  auto t3 = gren_dgp(3, 1000, r3);
  for (double v : t3) CHECK(v >= 0.0);

  CHECK_THROWS_AS(gren_dgp(0, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(gren_dgp(4, 10, rng), std::invalid_argument);
}

TEST_CASE("reshaped_draws: deterministic and tagged with the cube-root rate") {
  RngStream rng(67);
  auto s = gren_dgp(1, 60, rng);
  std::sort(s.begin(), s.end());
  double x0 = s[s.size() / 2];
  double fhat = grenander_estimate_sorted(s, x0);
  RngStream a(404), b(404);
  auto da = reshaped_draws(s, x0, fhat, -0.3, 20, a);
  auto db = reshaped_draws(s, x0, fhat, -0.3, 20, b);
  REQUIRE(da.draws.size() == 20);
  CHECK(da.rate_exponent == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(da.n_effective == s.size());
  for (std::size_t i = 0; i < 20; ++i) CHECK(da.draws[i][0] == db.draws[i][0]);
}

TEST_CASE("standard_draws: m controls n_effective; degenerate range errors name the replicate") {
  RngStream rng(68);
  auto s = gren_dgp(1, 60, rng);
  std::sort(s.begin(), s.end());
  double x0 = s[10];
  double fhat = grenander_estimate_sorted(s, x0);
  RngStream stream(505);
  auto d = standard_draws(s, x0, fhat, 30, 15, stream);
  CHECK(d.n_effective == 30);
  REQUIRE(d.draws.size() == 15);

  CHECK_THROWS_AS(standard_draws(s, x0, fhat, 0, 5, stream), std::invalid_argument);
  CHECK_THROWS_AS(standard_draws(s, x0, fhat, s.size() + 1, 5, stream),
                  std::invalid_argument);
  // x0 at the sample maximum with m = 1 resamples: some replicate misses it.
  std::vector<double> tiny{1.0, 2.0};
  CHECK_THROWS_WITH(standard_draws(tiny, 2.0, 0.5, 1, 64, stream),
                    Catch::Matchers::ContainsSubstring("replicate"));
}
