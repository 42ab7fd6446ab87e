#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuberoot/rng.hpp"

namespace cuberoot {

using Vec = std::vector<double>;

namespace detail {

// Pairwise summation; keeps error O(log n) for the long averages of
// step-function criteria with values in {-1, 0, 1}.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

template <class F>
double pairwise_accumulate(std::size_t n, F&& f) {
  // Block-buffered pairwise accumulation without materializing all terms.
  std::vector<double> partials;
  double block[256];
  std::size_t filled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    block[filled++] = f(i);
    if (filled == 256) {
      partials.push_back(pairwise_sum(block, filled));
      filled = 0;
    }
  }
  if (filled > 0) partials.push_back(pairwise_sum(block, filled));
  return pairwise_sum(partials.data(), partials.size());
}

}  // namespace detail

// Ordered collection of flat observation records; the unit of resampling.
class Sample {
 public:
  Sample(std::size_t arity, std::vector<double> data)
      : arity_(arity), data_(std::move(data)) {
    if (arity_ == 0 || data_.empty() || data_.size() % arity_ != 0)
      throw std::invalid_argument("Sample: data size must be a positive multiple of arity");
  }

  static Sample from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw std::invalid_argument("Sample: no rows");
    std::size_t arity = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * arity);
    for (const auto& r : rows) {
      if (r.size() != arity) throw std::invalid_argument("Sample: ragged rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return Sample(arity, std::move(flat));
  }

  std::size_t size() const { return data_.size() / arity_; }
  std::size_t arity() const { return arity_; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * arity_, arity_};
  }

 private:
  std::size_t arity_;
  std::vector<double> data_;
};

// Closed per-coordinate parameter bounds.
struct Box {
  Vec lo, hi;

  std::size_t dim() const { return lo.size(); }

  bool contains(std::span<const double> theta) const {
    if (theta.size() != lo.size()) return false;
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (theta[k] < lo[k] || theta[k] > hi[k]) return false;
    return true;
  }
};

// An M-estimation problem: per-row criterion plus parameter-space box.
struct Criterion {
  std::size_t dim;
  std::function<double(std::span<const double> row, std::span<const double> theta)> eval;
  Box box;
};

struct Estimate {
  Vec theta;
  double value;
  std::string solver_tag;
};

// M_n(theta) = n^{-1} sum_i m(z_i, theta), pairwise-accumulated.
inline double empirical_objective(const Criterion& crit, const Sample& sample,
                                  std::span<const double> theta) {
  if (theta.size() != crit.dim)
    throw std::invalid_argument("empirical_objective: theta dimension mismatch");
  const std::size_t n = sample.size();
  double total = detail::pairwise_accumulate(
      n, [&](std::size_t i) { return crit.eval(sample.row(i), theta); });
  return total / static_cast<double>(n);
}

// m rows drawn i.i.d. uniform over positions; bit-exact for a given stream.
inline Sample resample_with_replacement(const Sample& sample, std::size_t m,
                                        RngStream& rng) {
  if (m < 1) throw std::invalid_argument("resample_with_replacement: m must be >= 1");
  const std::size_t n = sample.size();
  std::vector<double> flat;
  flat.reserve(m * sample.arity());
  for (std::size_t j = 0; j < m; ++j) {
    auto r = sample.row(rng.next_below(n));
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Sample(sample.arity(), std::move(flat));
}

}  // namespace cuberoot
