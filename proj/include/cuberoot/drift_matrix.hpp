#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cuberoot {

// Symmetric d x d curvature estimate; the reshaping quadratic's matrix.
class DriftMatrix {
 public:
  explicit DriftMatrix(std::size_t d) : d_(d), m_(d * d, 0.0) {
    if (d == 0) throw std::invalid_argument("DriftMatrix: dimension must be positive");
  }

  static DriftMatrix scalar(double v) {
    DriftMatrix out(1);
    out.at(0, 0) = v;
    return out;
  }

  static DriftMatrix identity(std::size_t d) {
    DriftMatrix out(d);
    for (std::size_t k = 0; k < d; ++k) out.at(k, k) = 1.0;
    return out;
  }

  std::size_t dim() const { return d_; }
  double& at(std::size_t i, std::size_t j) { return m_[i * d_ + j]; }
  double at(std::size_t i, std::size_t j) const { return m_[i * d_ + j]; }

  double symmetry_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i + 1; j < d_; ++j)
        worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
    return worst;
  }

  void symmetrize() {
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i + 1; j < d_; ++j) {
        double v = 0.5 * (at(i, j) + at(j, i));
        at(i, j) = v;
        at(j, i) = v;
      }
  }

  // (u - v)' M (u - v) / 2, the reshaping penalty.
  double half_quad_form(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != d_ || v.size() != d_)
      throw std::invalid_argument("DriftMatrix: quadratic form dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j)
        s += (u[i] - v[i]) * at(i, j) * (u[j] - v[j]);
    return 0.5 * s;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t k = 0; k < d_; ++k) t += at(k, k);
    return t;
  }

 private:
  std::size_t d_;
  std::vector<double> m_;
};

}  // namespace cuberoot
