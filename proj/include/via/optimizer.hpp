#ifndef VIA_OPTIMIZER_HPP
#define VIA_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include "via/analytics.hpp"
#include "via/policies.hpp"
#include "via/types.hpp"

namespace via {

/// Minimize the randomized-stationary average VIA subject to a per-slot
/// sampling budget (delta * p_sample <= delta_max) and an error cap
/// (P_E <= e_max).
struct OptimizationProblem {
  SourceParams src;
  ChannelParams ch;
  double delta;
  double delta_max;
  double e_max;

  OptimizationProblem(SourceParams src_, ChannelParams ch_, double delta_, double delta_max_,
                      double e_max_)
      : src(src_), ch(ch_), delta(delta_), delta_max(delta_max_), e_max(e_max_) {
    require_irreducible(src);
    if (!(delta > 0.0)) throw InvalidParameter("delta must be positive");
    if (!(delta_max >= 0.0)) throw InvalidParameter("delta_max must be non-negative");
    if (!(delta_max <= delta)) throw InvalidParameter("delta_max / delta must not exceed 1");
    if (!(e_max > 0.0 && e_max <= 1.0)) throw InvalidParameter("e_max must lie in (0, 1]");
  }

  /// Largest admissible sampling probability.
  double eta() const { return delta_max / delta; }
};

enum class OptimizationStatus { Optimal, Infeasible };

inline std::string_view to_string(OptimizationStatus status) {
  return status == OptimizationStatus::Optimal ? "optimal" : "infeasible";
}

struct OptimizationOutcome {
  OptimizationStatus status = OptimizationStatus::Infeasible;
  std::optional<double> p_star;
  double lower_bound = 0.0;  // clamped at 0
  double achieved_via = std::numeric_limits<double>::quiet_NaN();
  double achieved_pe = std::numeric_limits<double>::quiet_NaN();
  double achieved_cost = std::numeric_limits<double>::quiet_NaN();

  bool optimal() const { return status == OptimizationStatus::Optimal; }
};

struct Interval {
  double lower;
  double upper;
};

namespace detail {

/// Lower bound on p_sample from the error cap, before clamping. P_E is
/// strictly decreasing in the delivery rate, so the cap only ever bounds
/// p_sample from below.
inline double error_lower_bound(const OptimizationProblem& prob) {
  const double p = prob.src.p;
  const double q = prob.src.q;
  const double e = prob.e_max;
  const double num = 2.0 * p * q - e * (p + q) * (p + q);
  const double den = prob.ch.p_s * (2.0 * p * q + e * (p + q) * (1.0 - p - q));
  if (den <= 0.0) {
    // only p = q = 1 with e_max = 1 gets here; the numerator is negative
    return num <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / den;
}

}  // namespace detail

/// Closed interval of p_sample meeting both constraints, or nullopt.
inline std::optional<Interval> feasible_interval(const OptimizationProblem& prob) {
  const double p = prob.src.p;
  const double q = prob.src.q;
  const double eta = prob.eta();
  if (p * q == 0.0) return Interval{0.0, eta};
  if (prob.ch.p_s == 0.0) {
    const double pe0 = 2.0 * p * q / ((p + q) * (p + q));
    if (prob.e_max < pe0) {
      throw InvalidParameter("error cap unreachable: nothing is ever delivered at p_s = 0");
    }
    return Interval{0.0, eta};
  }
  const double lower = std::max(0.0, detail::error_lower_bound(prob));
  if (lower > eta) return std::nullopt;
  return Interval{lower, eta};
}

/// The objective falls strictly with p_sample, so the optimum sits at the
/// budget limit eta whenever the interval is nonempty.
inline OptimizationOutcome solve(const OptimizationProblem& prob) {
  OptimizationOutcome out;
  const double p = prob.src.p;
  const double q = prob.src.q;
  const double eta = prob.eta();

  if (p * q == 0.0) {
    // VIA and P_E are identically zero; the cheapest choice wins the tie.
    out.status = OptimizationStatus::Optimal;
    out.p_star = 0.0;
    out.lower_bound = 0.0;
    out.achieved_via = 0.0;
    out.achieved_pe = 0.0;
    out.achieved_cost = 0.0;
    return out;
  }

  const auto interval = feasible_interval(prob);
  out.lower_bound = prob.ch.p_s > 0.0 ? std::max(0.0, detail::error_lower_bound(prob)) : 0.0;
  if (!interval || eta == 0.0 || prob.ch.p_s == 0.0) return out;

  const auto policy = PolicySpec::randomized_stationary(eta);
  out.status = OptimizationStatus::Optimal;
  out.p_star = eta;
  out.achieved_via = analytics::avg_via(policy, prob.src, prob.ch);
  out.achieved_pe = analytics::reconstruction_error(policy, prob.src, prob.ch);
  out.achieved_cost = prob.delta * eta;
  return out;
}

struct GridScan {
  bool feasible = false;
  double argmin = std::numeric_limits<double>::quiet_NaN();
  double min_objective = std::numeric_limits<double>::infinity();
  std::uint64_t feasible_points = 0;
};

/// Brute-force scan of {step, 2 step, ..., 1} with 1e-12 constraint slack.
inline GridScan scan_grid(const OptimizationProblem& prob, double step) {
  if (!(step > 0.0 && step <= 0.01)) throw InvalidParameter("grid step must lie in (0, 0.01]");
  constexpr double slack = 1e-12;
  const bool degenerate = prob.src.p * prob.src.q == 0.0;
  const auto n = static_cast<std::uint64_t>(std::llround(1.0 / step));
  GridScan scan;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const double x = k == n ? 1.0 : static_cast<double>(k) * step;
    if (prob.delta * x > prob.delta_max + slack) break;
    const auto policy = PolicySpec::randomized_stationary(x);
    const double pe = analytics::reconstruction_error(policy, prob.src, prob.ch);
    if (pe > prob.e_max + slack) continue;
    double objective = 0.0;
    if (!degenerate) {
      if (prob.ch.p_s == 0.0) continue;
      objective = analytics::avg_via(policy, prob.src, prob.ch);
    }
    ++scan.feasible_points;
    scan.feasible = true;
    if (objective < scan.min_objective) {
      scan.min_objective = objective;
      scan.argmin = x;
    }
  }
  return scan;
}

/// Checks solve() against scan_grid(): same verdict, argmin within one step,
/// and no feasible grid point beating the closed-form optimum. A closed-form
/// interval narrower than the grid can hold no grid point; that case counts
/// as agreement.
inline bool verify_by_grid(const OptimizationProblem& prob, double step) {
  const auto scan = scan_grid(prob, step);
  const auto outcome = solve(prob);
  if (!outcome.optimal()) return !scan.feasible;
  const double p_star = *outcome.p_star;
  if (!scan.feasible) {
    const double lo = outcome.lower_bound;
    const double first = std::max(step, std::ceil(lo / step - 1e-9) * step);
    return first > p_star + 1e-12;
  }
  if (std::abs(scan.argmin - p_star) > step * (1.0 + 1e-9)) return false;
  const double tol = 1e-12 * std::max(1.0, std::abs(outcome.achieved_via));
  return outcome.achieved_via <= scan.min_objective + tol;
}

}  // namespace via

#endif  // VIA_OPTIMIZER_HPP
