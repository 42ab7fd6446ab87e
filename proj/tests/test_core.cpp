#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cuberoot/core.hpp"
#include "cuberoot/maxscore.hpp"

using namespace cuberoot;

namespace {

Criterion ms_crit() {
  return maxscore::make_criterion(1, Box{{-3.0}, {3.0}});
}

}  // namespace

TEST_CASE("empirical_objective: single-row mean with indicator at boundary") {
  Sample s(3, {1.0, 0.0, 1.0});  // y=1, x1=0, x2=1
  Vec theta{0.0};
  CHECK(empirical_objective(ms_crit(), s, theta) == 1.0);
}

TEST_CASE("empirical_objective: mean of identical rows is the row value") {
  std::vector<double> flat;
  for (int i = 0; i < 17; ++i) {
    flat.push_back(1.0);
    flat.push_back(-0.4);
    flat.push_back(0.9);
  }
  Sample s(3, std::move(flat));
  Vec theta{1.0};
  double row_value = maxscore::ms_criterion(s.row(0), theta);
  CHECK(empirical_objective(ms_crit(), s, theta) == Catch::Approx(row_value).margin(1e-15));
}

TEST_CASE("empirical_objective: matches direct per-row summation on a hand dataset") {
  Sample s = Sample::from_rows({{1, 0.3, 1.0},
                                {0, -0.2, 0.5},
                                {1, -0.8, 2.0},
                                {0, 0.1, -1.0},
                                {1, 0.6, -0.3}});
  Vec theta{0.5};
  double direct = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    direct += maxscore::ms_criterion(s.row(i), theta);
  direct /= static_cast<double>(s.size());
  CHECK(empirical_objective(ms_crit(), s, theta) == Catch::Approx(direct).margin(1e-15));
}

TEST_CASE("empirical_objective: dimension mismatch throws") {
  Sample s(3, {1.0, 0.0, 1.0});
  Vec theta{0.0, 1.0};
  CHECK_THROWS_AS(empirical_objective(ms_crit(), s, theta), std::invalid_argument);
}

TEST_CASE("empirical_objective: invariant under row permutation, bounded by max row value") {
  RngStream rng(11);
  std::vector<Vec> rows;
  for (int i = 0; i < 64; ++i)
    rows.push_back({static_cast<double>(rng.next_below(2)), rng.normal(), rng.normal()});
  Sample s = Sample::from_rows(rows);
  std::reverse(rows.begin(), rows.end());
  std::rotate(rows.begin(), rows.begin() + 13, rows.end());
  Sample permuted = Sample::from_rows(rows);

  for (double th : {-1.5, 0.0, 0.7, 2.2}) {
    Vec theta{th};
    double a = empirical_objective(ms_crit(), s, theta);
    double b = empirical_objective(ms_crit(), permuted, theta);
    CHECK(a == Catch::Approx(b).margin(1e-15));
    double max_abs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      max_abs = std::max(max_abs, std::abs(maxscore::ms_criterion(s.row(i), theta)));
    CHECK(std::abs(a) <= max_abs + 1e-15);
  }
}

TEST_CASE("resample_with_replacement: n=1 gives copies of the unique row") {
  Sample s(2, {3.5, -1.0});
  RngStream rng(5);
  Sample boot = resample_with_replacement(s, 3, rng);
  REQUIRE(boot.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(boot.row(i)[0] == 3.5);
    CHECK(boot.row(i)[1] == -1.0);
  }
}

TEST_CASE("resample_with_replacement: bit-exact under a fixed seed") {
  RngStream rng_data(99);
  std::vector<Vec> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({rng_data.normal()});
  Sample s = Sample::from_rows(rows);

  RngStream a(1234), b(1234);
  Sample ra = resample_with_replacement(s, 10, a);
  Sample rb = resample_with_replacement(s, 10, b);
  for (std::size_t i = 0; i < 10; ++i) CHECK(ra.row(i)[0] == rb.row(i)[0]);
}

TEST_CASE("resample_with_replacement: inclusion frequency matches 1-(9/10)^10") {
  std::vector<Vec> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({static_cast<double>(i)});
  Sample s = Sample::from_rows(rows);
  RngStream master(7);
  const int trials = 100000;
  int included = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream stream = master.child("resample", static_cast<std::uint64_t>(t));
    Sample boot = resample_with_replacement(s, 10, stream);
    for (std::size_t i = 0; i < 10; ++i)
      if (boot.row(i)[0] == 0.0) {
        ++included;
        break;
      }
  }
  double expected = 1.0 - std::pow(0.9, 10);  // analytic inclusion probability
  CHECK(std::abs(static_cast<double>(included) / trials - expected) < 0.01);
}

TEST_CASE("RngStream: child streams are stable regardless of parent consumption") {
  RngStream a(42), b(42);
  a.next_u64();
  a.next_u64();
  RngStream ca = a.child("tag", 3);
  RngStream cb = b.child("tag", 3);
  for (int i = 0; i < 5; ++i) CHECK(ca.next_u64() == cb.next_u64());
  // Different tags or indices diverge.
  CHECK(a.child("tag", 4).next_u64() != a.child("tag", 3).next_u64());
  CHECK(a.child("gat", 3).next_u64() != a.child("tag", 3).next_u64());
}
