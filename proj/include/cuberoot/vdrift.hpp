#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cuberoot/core.hpp"
#include "cuberoot/drift_matrix.hpp"

namespace cuberoot {

struct NDConfig {
  double epsilon = 0.0;       // derivative step; 0 means "use epsilon_rule"
  double c_rot = 1.0;         // proportionality constant for the n^(-1/7) rule
  double eigen_floor = 0.0;   // 0 means "use default_eigen_floor"
};

// Step rule c * n^(-1/7).
inline double epsilon_rule(std::size_t n, double c_rot) {
  if (n < 2) throw std::invalid_argument("epsilon_rule: n must be >= 2");
  if (!(c_rot > 0.0)) throw std::invalid_argument("epsilon_rule: c_rot must be positive");
  return c_rot * std::pow(static_cast<double>(n), -1.0 / 7.0);
}

// Cross second differences of the objective around theta_hat:
//   V_kl = -[f(+e_k eps + e_l eps) - f(+e_k eps - e_l eps)
//            - f(-e_k eps + e_l eps) + f(-e_k eps - e_l eps)] / (4 eps^2),
// symmetrized before return.  Probe points must stay inside `box`; they are
// never clamped since clamping would break the stencil symmetry.
inline DriftMatrix numerical_hessian(
    const std::function<double(std::span<const double>)>& objective,
    const Vec& theta_hat, double epsilon, const Box& box) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("numerical_hessian: epsilon must be positive");
  const std::size_t d = theta_hat.size();
  DriftMatrix V(d);
  Vec probe(d);
  auto f_at = [&](std::size_t k, double sk, std::size_t l, double sl) {
    probe = theta_hat;
    probe[k] += sk * epsilon;
    probe[l] += sl * epsilon;
    for (std::size_t c = 0; c < d; ++c)
      if (probe[c] < box.lo[c] || probe[c] > box.hi[c])
        throw std::invalid_argument("numerical_hessian: probe outside box in coordinate " +
                                    std::to_string(c));
    double v = objective(probe);
    if (!std::isfinite(v))
      throw std::runtime_error("numerical_hessian: non-finite objective at probe point");
    return v;
  };
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = k; l < d; ++l) {
      double v = -(f_at(k, 1, l, 1) - f_at(k, 1, l, -1) - f_at(k, -1, l, 1) +
                   f_at(k, -1, l, -1)) /
                 (4.0 * epsilon * epsilon);
      V.at(k, l) = v;
      V.at(l, k) = v;
    }
  return V;
}

// Scale-aware default repair threshold: 1e-8 * (1 + mean |diagonal|).
inline double default_eigen_floor(const DriftMatrix& V) {
  double t = 0.0;
  for (std::size_t k = 0; k < V.dim(); ++k) t += std::abs(V.at(k, k));
  return 1e-8 * (1.0 + t / static_cast<double>(V.dim()));
}

// Clamp eigenvalues below `eigen_floor` up to it; identity on matrices that
// are already sufficiently positive definite.  Idempotent.
inline DriftMatrix psd_repair(const DriftMatrix& V, double eigen_floor) {
  if (!(eigen_floor > 0.0)) throw std::invalid_argument("psd_repair: floor must be positive");
  const std::size_t d = V.dim();
  Eigen::MatrixXd M(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) M(i, j) = V.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.eigenvalues().minCoeff() >= eigen_floor) return V;
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(eigen_floor);
  Eigen::MatrixXd R = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  DriftMatrix out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = R(i, j);
  out.symmetrize();
  return out;
}

inline DriftMatrix psd_repair(const DriftMatrix& V) {
  return psd_repair(V, default_eigen_floor(V));
}

}  // namespace cuberoot
