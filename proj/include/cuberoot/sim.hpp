#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cuberoot/bootstrap.hpp"
#include "cuberoot/core.hpp"
#include "cuberoot/grenander.hpp"
#include "cuberoot/maxscore.hpp"
#include "cuberoot/vdrift.hpp"

namespace cuberoot::sim {

enum class Example { MaxScore, Grenander };
enum class MethodKind { Standard, MOutOfN, ReshapedPlugin, ReshapedND };
enum class ReportFormat { Csv, Markdown };

// Tuning value for the reshaped methods: a fixed number or the data-driven
// rule-of-thumb ("rot").
struct Tuning {
  bool rot = true;
  double value = 0.0;

  std::string label() const {
    if (rot) return "rot";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
  }
};

struct MethodSpec {
  MethodKind kind = MethodKind::Standard;
  std::size_t m = 0;  // subsample size, MOutOfN only
  Tuning tuning;      // Reshaped* only

  std::string label() const {
    switch (kind) {
      case MethodKind::Standard: return "standard";
      case MethodKind::MOutOfN: return "m_out_of_n(m=" + std::to_string(m) + ")";
      case MethodKind::ReshapedPlugin: return "reshaped_plugin";
      case MethodKind::ReshapedND: return "reshaped_nd";
    }
    return "?";
  }

  std::string tuning_label() const {
    if (kind == MethodKind::ReshapedPlugin || kind == MethodKind::ReshapedND)
      return tuning.label();
    return "-";
  }
};

struct SimConfig {
  Example example = Example::MaxScore;
  int dgp_id = 1;
  std::size_t n = 500;
  std::size_t S = 100;
  std::size_t B = 200;
  double alpha = 0.05;
  std::vector<MethodSpec> methods;
  std::uint64_t master_seed = 0;
  double x0 = 1.0;              // grenander evaluation point
  Box ms_box{{-2.0}, {4.0}};    // maximum score parameter box
  std::size_t threads = 1;
  std::size_t knot_densification = 4;
  bool direct_ci = false;  // unreflected percentile intervals

  void validate() const {
    if (S < 1 || B < 1 || n < 2) throw std::invalid_argument("SimConfig: need S >= 1, B >= 1, n >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SimConfig: alpha must be in (0, 1)");
    if (methods.empty()) throw std::invalid_argument("SimConfig: no methods");
    for (const auto& m : methods)
      if (m.kind == MethodKind::MOutOfN && (m.m < 1 || m.m > n))
        throw std::invalid_argument("SimConfig: m-out-of-n subsample must satisfy 1 <= m <= n");
  }
};

struct ReportRow {
  std::string method;
  std::string tuning;
  double coverage = 0.0;
  double avg_length = 0.0;
  double avg_tuning = 0.0;
  std::size_t failures = 0;
};

struct SimReport {
  std::vector<ReportRow> rows;
};

// Exact coverage targets.
inline double truth_value(const SimConfig& cfg) {
  if (cfg.example == Example::MaxScore) return 1.0;  // theta0 across all DGPs
  const double pi = 3.14159265358979323846;
  switch (cfg.dgp_id) {
    case 1:  // Exponential(1) density at x0
      return std::exp(-cfg.x0);
    case 2:  // half-normal: 2 phi(x0)
      return 2.0 / std::sqrt(2.0 * pi) * std::exp(-0.5 * cfg.x0 * cfg.x0);
    default: {  // |T_3|: 2 t_3(x0)
      const double c = std::tgamma(2.0) / (std::sqrt(3.0 * pi) * std::tgamma(1.5));
      return 2.0 * c * std::pow(1.0 + cfg.x0 * cfg.x0 / 3.0, -2.0);
    }
  }
}

namespace detail {

struct RepOutcome {
  bool covered = false;
  double length = 0.0;
  double tuning_used = 0.0;
  bool clamped = false;  // f' sign repair (grenander only)
};

inline double sample_sd(const std::vector<double>& v) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double delta = v[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v[i] - mean);
  }
  return v.size() > 1 ? std::sqrt(m2 / static_cast<double>(v.size() - 1)) : 0.0;
}

inline std::vector<RepOutcome> run_maxscore_rep(const SimConfig& cfg, std::size_t s) {
  const RngStream master(cfg.master_seed);
  RngStream dgp_stream = master.child("dgp", s);
  Sample sample = maxscore::ms_dgp(cfg.dgp_id, cfg.n, dgp_stream);
  Criterion crit = maxscore::make_criterion(1, cfg.ms_box);
  Estimate est = maxscore::ms_estimate(sample, cfg.ms_box);
  maxscore::MsExactSolver solver;
  const double truth = truth_value(cfg);

  std::vector<RepOutcome> out;
  out.reserve(cfg.methods.size());
  for (const auto& method : cfg.methods) {
    RngStream stream = master.child(method.label() + "/" + method.tuning_label(), s);
    RepOutcome o;
    BootstrapDraws draws;
    switch (method.kind) {
      case MethodKind::Standard:
        draws = standard_bootstrap_draws(crit, sample, est.theta, cfg.B, solver, stream);
        break;
      case MethodKind::MOutOfN:
        draws = m_out_of_n_draws(crit, sample, est.theta, method.m, cfg.B, solver, stream);
        break;
      case MethodKind::ReshapedPlugin: {
        const double h = method.tuning.rot
                             ? maxscore::rot_bandwidth_MS(cfg.n, 1.0,
                                                          maxscore::index_sd(sample, est.theta))
                             : method.tuning.value;
        o.tuning_used = h;
        DriftMatrix V = maxscore::plugin_V_MS(sample, est.theta, h, maxscore::gaussian_kernel());
        draws = reshaped_bootstrap_draws(crit, sample, est.theta, V, cfg.B, solver, stream);
        break;
      }
      case MethodKind::ReshapedND: {
        const double eps = method.tuning.rot ? epsilon_rule(cfg.n, 1.0) : method.tuning.value;
        o.tuning_used = eps;
        auto objective = [&](std::span<const double> theta) {
          return empirical_objective(crit, sample, theta);
        };
        DriftMatrix V = psd_repair(numerical_hessian(objective, est.theta, eps, cfg.ms_box));
        draws = reshaped_bootstrap_draws(crit, sample, est.theta, V, cfg.B, solver, stream);
        break;
      }
    }
    auto ci = percentile_ci(draws, est.theta, 0, cfg.alpha, cfg.direct_ci);
    o.covered = ci.covers(truth);
    o.length = ci.length();
    out.push_back(o);
  }
  return out;
}

inline std::vector<RepOutcome> run_grenander_rep(const SimConfig& cfg, std::size_t s) {
  const RngStream master(cfg.master_seed);
  RngStream dgp_stream = master.child("dgp", s);
  std::vector<double> sample = grenander::gren_dgp(cfg.dgp_id, cfg.n, dgp_stream);
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  const double fhat = grenander::grenander_estimate_sorted(sorted, cfg.x0);
  const double sd = sample_sd(sample);
  const double truth = truth_value(cfg);
  const Vec center{fhat};

  std::vector<RepOutcome> out;
  out.reserve(cfg.methods.size());
  for (const auto& method : cfg.methods) {
    RngStream stream = master.child(method.label() + "/" + method.tuning_label(), s);
    RepOutcome o;
    BootstrapDraws draws;
    switch (method.kind) {
      case MethodKind::Standard:
        draws = grenander::standard_draws(sorted, cfg.x0, fhat, cfg.n, cfg.B, stream);
        break;
      case MethodKind::MOutOfN:
        draws = grenander::standard_draws(sorted, cfg.x0, fhat, method.m, cfg.B, stream);
        break;
      case MethodKind::ReshapedPlugin:
      case MethodKind::ReshapedND: {
        const double rot_base = sd * std::pow(static_cast<double>(cfg.n), -1.0 / 7.0);
        double fp;
        if (method.kind == MethodKind::ReshapedPlugin) {
          const double b = method.tuning.rot ? 1.06 * rot_base : method.tuning.value;
          o.tuning_used = b;
          fp = grenander::kernel_fprime(sample, cfg.x0, b);
        } else {
          const double eps = method.tuning.rot ? rot_base : method.tuning.value;
          o.tuning_used = eps;
          fp = grenander::nd_fprime(sample, cfg.x0, eps);
        }
        if (fp >= 0.0) {  // the reshaping quadratic must be concave
          fp = -1e-3 * (fhat / cfg.x0 + 1e-6);
          o.clamped = true;
        }
        draws = grenander::reshaped_draws(sorted, cfg.x0, fhat, fp, cfg.B, stream,
                                          cfg.knot_densification);
        break;
      }
    }
    auto ci = percentile_ci(draws, center, 0, cfg.alpha, cfg.direct_ci);
    o.covered = ci.covers(truth);
    o.length = ci.length();
    out.push_back(o);
  }
  return out;
}

}  // namespace detail

inline std::size_t thread_cap_from_env(std::size_t requested) {
  if (const char* env = std::getenv("CUBEROOT_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<std::size_t>(cap) < requested)
      return static_cast<std::size_t>(cap);
  }
  return requested;
}

// Full Monte Carlo pass.  Replications are independent tasks over
// per-replicate substreams; the aggregation is a fold by replicate index, so
// the report is a pure function of the config regardless of thread count.
inline SimReport run_monte_carlo(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t threads = std::max<std::size_t>(1, thread_cap_from_env(cfg.threads));

  std::vector<std::vector<detail::RepOutcome>> results(cfg.S);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t s = next.fetch_add(1);
      if (s >= cfg.S) return;
      try {
        results[s] = cfg.example == Example::MaxScore
                         ? detail::run_maxscore_rep(cfg, s)
                         : detail::run_grenander_rep(cfg, s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          try {
            std::throw_with_nested(std::runtime_error(
                "replication " + std::to_string(s) + " (seed " +
                std::to_string(cfg.master_seed) + ") failed"));
          } catch (...) {
            first_error = std::current_exception();
          }
        }
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SimReport report;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    ReportRow row;
    row.method = cfg.methods[m].label();
    row.tuning = cfg.methods[m].tuning_label();
    for (std::size_t s = 0; s < cfg.S; ++s) {
      const auto& o = results[s][m];
      row.coverage += o.covered ? 1.0 : 0.0;
      row.avg_length += o.length;
      row.avg_tuning += o.tuning_used;
      row.failures += o.clamped ? 1 : 0;
    }
    const double S = static_cast<double>(cfg.S);
    row.coverage /= S;
    row.avg_length /= S;
    row.avg_tuning /= S;
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace detail {

inline std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// CSV: fixed header, 6 significant digits, LF line endings.  Markdown: the
// equivalent table.
inline std::string emit_report(const SimReport& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "method,tuning,coverage,avg_length,avg_tuning,failures\n";
    for (const auto& r : report.rows) {
      out += r.method + "," + r.tuning + "," + detail::g6(r.coverage) + "," +
             detail::g6(r.avg_length) + "," + detail::g6(r.avg_tuning) + "," +
             std::to_string(r.failures) + "\n";
    }
  } else {
    out = "| method | tuning | coverage | avg_length | avg_tuning | failures |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& r : report.rows) {
      out += "| " + r.method + " | " + r.tuning + " | " + detail::g6(r.coverage) +
             " | " + detail::g6(r.avg_length) + " | " + detail::g6(r.avg_tuning) +
             " | " + std::to_string(r.failures) + " |\n";
    }
  }
  return out;
}

}  // namespace cuberoot::sim
