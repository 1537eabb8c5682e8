#ifndef VIA_ANALYTICS_HPP
#define VIA_ANALYTICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "via/policies.hpp"
#include "via/types.hpp"

// Closed-form stationary laws and averages of VIA, AoIV and AoII for the
// two-state source over a packet-drop channel.
//
// Notation used in the comments below: rho is the per-slot delivery
// probability (p_sample * p_s for randomized stationary sampling, p_s for
// semantics-aware sampling), r = 1 - rho, Phi(x) = x + (1 - x) rho and
// D = p + q + (1 - p - q) rho.
//
// Degenerate sources with p * q = 0 (but p + q > 0) are absorbing. Every
// quantity then takes the value of the synced stationary law reached from
// the synced origin: zero error, zero ages.

namespace via::analytics {

inline constexpr std::size_t kDefaultTruncation = 200;

struct ViaStationary {
  PolicyKind policy;
  std::vector<double> pi0;  // Pr[X = 0, VIA = i]
  std::vector<double> pi1;  // Pr[X = 1, VIA = i]
  std::size_t truncation = 0;
  double tail_mass = 0.0;   // Pr[VIA > truncation]

  double marginal(std::size_t i) const { return pi0.at(i) + pi1.at(i); }

  double total_mass() const {
    return std::accumulate(pi0.begin(), pi0.end(), 0.0) +
           std::accumulate(pi1.begin(), pi1.end(), 0.0) + tail_mass;
  }
};

/// Stationary law of (X, X_hat, AoIV) over {0,1}^3.
struct AoivStationary {
  std::array<double, 8> entries{};

  static constexpr std::size_t index(int i, int j, int k) {
    return static_cast<std::size_t>(4 * i + 2 * j + k);
  }
  double at(int i, int j, int k) const { return entries[index(i, j, k)]; }
  double& at(int i, int j, int k) { return entries[index(i, j, k)]; }

  double total() const { return std::accumulate(entries.begin(), entries.end(), 0.0); }
};

/// Stationary law of (X, X_hat).
struct JointReconStationary {
  std::array<double, 4> entries{};

  double at(int i, int j) const { return entries[static_cast<std::size_t>(2 * i + j)]; }
  double& at(int i, int j) { return entries[static_cast<std::size_t>(2 * i + j)]; }

  double total() const { return std::accumulate(entries.begin(), entries.end(), 0.0); }
};

struct AoiiDistribution {
  PolicyKind policy;
  std::vector<double> pmf;  // Pr[AoII = i], i = 0..truncation
  double tail_mass = 0.0;   // Pr[AoII > truncation]
  double tail_moment = 0.0; // E[AoII; AoII > truncation]

  std::size_t truncation() const { return pmf.empty() ? 0 : pmf.size() - 1; }

  double truncated_mean() const {
    double mean = 0.0;
    for (std::size_t i = 1; i < pmf.size(); ++i) mean += static_cast<double>(i) * pmf[i];
    return mean;
  }
};

namespace detail {

inline bool degenerate(const SourceParams& src) { return src.p * src.q == 0.0; }

/// Delivery probability per slot for the policies whose (X, X_hat)
/// dynamics are those of independent per-slot delivery.
inline double delivery_probability(const PolicySpec& policy, const ChannelParams& ch) {
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary: return *policy.p_sample() * ch.p_s;
    case PolicyKind::SemanticsAware: return ch.p_s;
    case PolicyKind::ChangeAware: break;
  }
  throw UnsupportedPolicy("change-aware sampling has no per-slot delivery probability");
}

inline double phi(double x, double rho) { return x + (1.0 - x) * rho; }

inline double error_denominator(const SourceParams& src, double rho) {
  return src.p + src.q + (1.0 - src.p - src.q) * rho;
}

/// Sum over i > n of c * ratio^(i-1).
inline double geometric_tail(double c, double ratio, std::size_t n) {
  if (c == 0.0) return 0.0;
  return c * std::pow(ratio, static_cast<double>(n)) / (1.0 - ratio);
}

/// Sum over i > n of i * c * ratio^(i-1).
inline double geometric_tail_moment(double c, double ratio, std::size_t n) {
  if (c == 0.0) return 0.0;
  const double base = 1.0 - ratio;
  const double rn = std::pow(ratio, static_cast<double>(n));
  return c * (static_cast<double>(n + 1) * rn / base + rn * ratio / (base * base));
}

/// (pi_{0,i}, pi_{1,i}) of the randomized stationary (X, VIA) chain.
/// Exponents alternate with the parity of i: for even i the state-0 entry
/// carries one more factor q / Phi(p) than factors p / Phi(q).
inline std::pair<double, double> rs_via_entry(const SourceParams& src, double rho,
                                              std::size_t i) {
  const double p = src.p;
  const double q = src.q;
  const double k = (i % 2 == 0) ? static_cast<double>(i) / 2.0 : static_cast<double>(i + 1) / 2.0;
  const double w = (i % 2 == 0) ? static_cast<double>(i + 2) / 2.0 : static_cast<double>(i + 1) / 2.0;
  // Evaluated in log space: the individual powers over- and underflow long
  // before their product does.
  auto scaled = [](double log_base, double e) { return e == 0.0 ? 0.0 : e * log_base; };
  const double log_common =
      std::log(rho / (p + q)) + scaled(std::log(1.0 - rho), static_cast<double>(i));
  const double lp = std::log(p) - std::log(phi(q, rho));  // p / Phi(q)
  const double lq = std::log(q) - std::log(phi(p, rho));  // q / Phi(p)
  const double pi0 = std::exp(log_common + scaled(lp, k) + scaled(lq, w));
  const double pi1 = std::exp(log_common + scaled(lp, w) + scaled(lq, k));
  return {pi0, pi1};
}

}  // namespace detail

/// Left side of the VIA series convergence condition,
/// sqrt(pq) r / sqrt(Phi(p) Phi(q)).
inline double convergence_ratio(const SourceParams& src, const ChannelParams& ch,
                                double p_sample) {
  const double rho = p_sample * ch.p_s;
  const double num = std::sqrt(src.p * src.q) * (1.0 - rho);
  const double den = std::sqrt(detail::phi(src.p, rho) * detail::phi(src.q, rho));
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

inline bool check_convergence(const SourceParams& src, const ChannelParams& ch, double p_sample) {
  return convergence_ratio(src, ch, p_sample) < 1.0;
}

namespace detail {

inline double rs_rho_checked(const SourceParams& src, const ChannelParams& ch, double p_sample) {
  require_irreducible(src);
  const double rho = p_sample * ch.p_s;
  if (rho <= 0.0 || !check_convergence(src, ch, p_sample)) {
    throw NonConvergence("VIA diverges: p_sample * p_s must be positive");
  }
  return rho;
}

}  // namespace detail

inline ViaStationary via_stationary_rs(const SourceParams& src, const ChannelParams& ch,
                                       double p_sample,
                                       std::size_t truncation = kDefaultTruncation) {
  const double rho = detail::rs_rho_checked(src, ch, p_sample);
  ViaStationary out{PolicyKind::RandomizedStationary, {}, {}, truncation, 0.0};
  out.pi0.resize(truncation + 1);
  out.pi1.resize(truncation + 1);
  for (std::size_t i = 0; i <= truncation; ++i) {
    std::tie(out.pi0[i], out.pi1[i]) = detail::rs_via_entry(src, rho, i);
  }
  // Each parity subsequence is exactly geometric with the squared ratio.
  const double ratio = convergence_ratio(src, ch, p_sample);
  const double ratio2 = ratio * ratio;
  const auto [a0, a1] = detail::rs_via_entry(src, rho, truncation + 1);
  const auto [b0, b1] = detail::rs_via_entry(src, rho, truncation + 2);
  out.tail_mass = (a0 + a1 + b0 + b1) / (1.0 - ratio2);
  return out;
}

/// One-step transition probability of the VIA process alone, obtained by
/// conditioning the joint (X, VIA) chain on VIA(t) = i.
inline double via_transition_prob(const SourceParams& src, const ChannelParams& ch,
                                  double p_sample, std::size_t i, std::size_t j) {
  const double rho = detail::rs_rho_checked(src, ch, p_sample);
  if (j != 0 && j != i && j != i + 1) return 0.0;
  const auto [pi0, pi1] = detail::rs_via_entry(src, rho, i);
  const double mass = pi0 + pi1;
  if (mass <= 0.0) {
    throw InvalidParameter("Pr[VIA = i] is zero, conditional transition undefined");
  }
  const double w0 = pi0 / mass;
  const double w1 = pi1 / mass;
  const double r = 1.0 - rho;
  double prob = 0.0;
  if (j == 0) prob += rho;
  if (j == i) prob += ((1.0 - src.p) * w0 + (1.0 - src.q) * w1) * r;
  if (j == i + 1) prob += (src.p * w0 + src.q * w1) * r;
  return prob;
}

inline ViaStationary via_stationary_ca(const SourceParams& src, const ChannelParams& ch,
                                       std::size_t truncation = kDefaultTruncation) {
  require_irreducible(src);
  if (ch.p_s <= 0.0) throw InvalidParameter("change-aware VIA needs p_s > 0");
  const double p = src.p;
  const double q = src.q;
  const double ps = ch.p_s;
  ViaStationary out{PolicyKind::ChangeAware, {}, {}, truncation, 0.0};
  out.pi0.assign(truncation + 1, 0.0);
  out.pi1.assign(truncation + 1, 0.0);
  if (detail::degenerate(src)) {
    out.pi0[0] = q / (p + q);
    out.pi1[0] = p / (p + q);
    return out;
  }
  for (std::size_t i = 0; i <= truncation; ++i) {
    const double geo = ps * std::pow(1.0 - ps, static_cast<double>(i));
    out.pi0[i] = q * geo / (p + q);
    out.pi1[i] = p * geo / (p + q);
  }
  out.tail_mass = std::pow(1.0 - ps, static_cast<double>(truncation + 1));
  return out;
}

inline ViaStationary via_stationary(const PolicySpec& policy, const SourceParams& src,
                                    const ChannelParams& ch,
                                    std::size_t truncation = kDefaultTruncation) {
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary:
      return via_stationary_rs(src, ch, *policy.p_sample(), truncation);
    case PolicyKind::ChangeAware:
      return via_stationary_ca(src, ch, truncation);
    case PolicyKind::SemanticsAware:
      break;
  }
  throw UnsupportedPolicy("no closed-form VIA law for semantics-aware sampling");
}

/// Average VIA. Randomized stationary: 2pq r / ((p+q) rho).
/// Change-aware: (1 - p_s) / p_s.
inline double avg_via(const PolicySpec& policy, const SourceParams& src, const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary: {
      const double rho = detail::rs_rho_checked(src, ch, *policy.p_sample());
      return 2.0 * p * q * (1.0 - rho) / ((p + q) * rho);
    }
    case PolicyKind::ChangeAware:
      if (ch.p_s <= 0.0) throw NonConvergence("change-aware VIA diverges at p_s = 0");
      if (detail::degenerate(src)) return 0.0;
      return (1.0 - ch.p_s) / ch.p_s;
    case PolicyKind::SemanticsAware:
      break;
  }
  throw UnsupportedPolicy("no closed-form average VIA for semantics-aware sampling");
}

/// Smallest p_sample at which randomized stationary sampling matches the
/// change-aware average VIA: 2pq / (p + q + (2pq - p - q) p_s).
inline double rs_ca_threshold(const SourceParams& src, const ChannelParams& ch) {
  const double p = src.p;
  const double q = src.q;
  if (p * q == 0.0) return 0.0;
  return 2.0 * p * q / (p + q + (2.0 * p * q - p - q) * ch.p_s);
}

enum class ViaOrdering { RsLower, CaLower, Equal };

inline std::string_view to_string(ViaOrdering ordering) {
  switch (ordering) {
    case ViaOrdering::RsLower: return "rs_lower";
    case ViaOrdering::CaLower: return "ca_lower";
    case ViaOrdering::Equal: return "equal";
  }
  return "unknown";
}

/// Decided by comparing the two closed-form averages; a diverging average
/// counts as +infinity.
inline ViaOrdering compare_via_rs_ca(const SourceParams& src, const ChannelParams& ch,
                                     double p_sample) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto guarded = [&](const PolicySpec& policy) {
    try {
      return avg_via(policy, src, ch);
    } catch (const NonConvergence&) {
      return inf;
    }
  };
  const double rs = guarded(PolicySpec::randomized_stationary(p_sample));
  const double ca = guarded(PolicySpec::change_aware());
  if (rs == inf && ca == inf) return ViaOrdering::Equal;
  const double scale = std::max({1.0, std::abs(rs == inf ? 0.0 : rs), std::abs(ca == inf ? 0.0 : ca)});
  if (rs != inf && ca != inf && std::abs(rs - ca) <= 1e-12 * scale) return ViaOrdering::Equal;
  return rs < ca ? ViaOrdering::RsLower : ViaOrdering::CaLower;
}

/// Time-averaged reconstruction error P_E = Pr[X != X_hat].
inline double reconstruction_error(const PolicySpec& policy, const SourceParams& src,
                                   const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary: {
      const double rho = *policy.p_sample() * ch.p_s;
      return 2.0 * p * q * (1.0 - rho) / ((p + q) * (p + q + (1.0 - p - q) * rho));
    }
    case PolicyKind::ChangeAware:
      if (detail::degenerate(src)) return 0.0;
      return (1.0 - ch.p_s) / (2.0 - ch.p_s);
    case PolicyKind::SemanticsAware: {
      const double ps = ch.p_s;
      return 2.0 * p * q * (1.0 - ps) / ((p + q) * (p + q + (1.0 - p - q) * ps));
    }
  }
  return 0.0;
}

/// Average VIA expressed through the policy's own reconstruction error.
inline double avg_via_of_pe(const PolicySpec& policy, const SourceParams& src,
                            const ChannelParams& ch) {
  const double pe = reconstruction_error(policy, src, ch);
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary: {
      const double rho = detail::rs_rho_checked(src, ch, *policy.p_sample());
      return detail::error_denominator(src, rho) * pe / rho;
    }
    case PolicyKind::ChangeAware:
      if (ch.p_s <= 0.0) throw NonConvergence("change-aware VIA diverges at p_s = 0");
      return (2.0 / ch.p_s - 1.0) * pe;
    case PolicyKind::SemanticsAware:
      break;
  }
  throw UnsupportedPolicy("no VIA(P_E) relation for semantics-aware sampling");
}

inline AoivStationary aoiv_stationary(const PolicySpec& policy, const SourceParams& src,
                                      const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  AoivStationary out;
  if (policy.kind() == PolicyKind::ChangeAware) {
    if (detail::degenerate(src)) {
      out.at(0, 0, 0) = q / (p + q);
      out.at(1, 1, 0) = p / (p + q);
      return out;
    }
    const double den = (p + q) * (2.0 - ch.p_s);
    out.at(0, 0, 0) = q / den;
    out.at(0, 1, 1) = q * (1.0 - ch.p_s) / den;
    out.at(1, 1, 0) = p / den;
    out.at(1, 0, 1) = p * (1.0 - ch.p_s) / den;
    return out;
  }
  const double rho = detail::delivery_probability(policy, ch);
  const double den = (p + q) * detail::error_denominator(src, rho);
  out.at(0, 0, 0) = q * detail::phi(q, rho) / den;
  out.at(0, 1, 1) = p * q * (1.0 - rho) / den;
  out.at(1, 1, 0) = p * detail::phi(p, rho) / den;
  out.at(1, 0, 1) = p * q * (1.0 - rho) / den;
  return out;
}

/// AoIV is the error indicator for a two-state source, so its mean is the
/// erroneous mass pi_{0,1,1} + pi_{1,0,1}.
inline double avg_aoiv(const PolicySpec& policy, const SourceParams& src, const ChannelParams& ch) {
  const AoivStationary table = aoiv_stationary(policy, src, ch);
  return table.at(0, 1, 1) + table.at(1, 0, 1);
}

inline JointReconStationary joint_recon_stationary(const PolicySpec& policy,
                                                   const SourceParams& src,
                                                   const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  JointReconStationary out;
  if (policy.kind() == PolicyKind::ChangeAware) {
    const AoivStationary table = aoiv_stationary(policy, src, ch);
    out.at(0, 0) = table.at(0, 0, 0);
    out.at(0, 1) = table.at(0, 1, 1);
    out.at(1, 0) = table.at(1, 0, 1);
    out.at(1, 1) = table.at(1, 1, 0);
    return out;
  }
  const double rho = detail::delivery_probability(policy, ch);
  const double r = 1.0 - rho;
  const double den = (p + q) * (p * r + q + (1.0 - q) * rho);
  out.at(0, 0) = q * (q + (1.0 - q) * rho) / den;
  out.at(0, 1) = p * q * r / den;
  out.at(1, 0) = p * q * r / den;
  out.at(1, 1) = p * (p + (1.0 - p) * rho) / den;
  return out;
}

inline JointReconStationary joint_recon_stationary_rs(const SourceParams& src,
                                                      const ChannelParams& ch, double p_sample) {
  return joint_recon_stationary(PolicySpec::randomized_stationary(p_sample), src, ch);
}

/// Law of AoII truncated at `truncation`, with the remaining tail summed in
/// closed form. An erroneous run entered from (0,0) survives each further
/// slot with probability (1-q) times the non-delivery probability; from
/// (1,1) with (1-p) times it.
inline AoiiDistribution aoii_distribution(const PolicySpec& policy, const SourceParams& src,
                                          const ChannelParams& ch,
                                          std::size_t truncation = kDefaultTruncation) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  AoiiDistribution out{policy.kind(), std::vector<double>(truncation + 1, 0.0), 0.0, 0.0};

  double coeff_a = 0.0, ratio_a = 0.0;  // runs entered from (0,0)
  double coeff_b = 0.0, ratio_b = 0.0;  // runs entered from (1,1)
  if (policy.kind() == PolicyKind::ChangeAware) {
    if (detail::degenerate(src)) {
      out.pmf[0] = 1.0;
      return out;
    }
    const double base = p * q * (1.0 - ch.p_s) / ((p + q) * (2.0 - ch.p_s));
    out.pmf[0] = 1.0 / (2.0 - ch.p_s);
    coeff_a = base;
    ratio_a = 1.0 - q;
    coeff_b = base;
    ratio_b = 1.0 - p;
  } else {
    // Semantics-aware runs use Psi(x) = x + (1 - x) p_s, i.e. Phi with rho = p_s.
    const double rho = detail::delivery_probability(policy, ch);
    const double r = 1.0 - rho;
    const double den = (p + q) * detail::error_denominator(src, rho);
    out.pmf[0] = (p * p + q * q + (p + q - p * p - q * q) * rho) / den;
    const double base = p * q * r / den;
    coeff_a = base * detail::phi(q, rho);
    ratio_a = (1.0 - q) * r;
    coeff_b = base * detail::phi(p, rho);
    ratio_b = (1.0 - p) * r;
  }
  for (std::size_t i = 1; i <= truncation; ++i) {
    const double e = static_cast<double>(i - 1);
    out.pmf[i] = (coeff_a == 0.0 ? 0.0 : coeff_a * std::pow(ratio_a, e)) +
                 (coeff_b == 0.0 ? 0.0 : coeff_b * std::pow(ratio_b, e));
  }
  out.tail_mass = detail::geometric_tail(coeff_a, ratio_a, truncation) +
                  detail::geometric_tail(coeff_b, ratio_b, truncation);
  out.tail_moment = detail::geometric_tail_moment(coeff_a, ratio_a, truncation) +
                    detail::geometric_tail_moment(coeff_b, ratio_b, truncation);
  return out;
}

inline double avg_aoii(const PolicySpec& policy, const SourceParams& src, const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  if (detail::degenerate(src)) return 0.0;
  if (policy.kind() == PolicyKind::ChangeAware) {
    const double ps = ch.p_s;
    return (p * p + q * q) * (1.0 - ps) / (p * q * (p + q) * (2.0 - ps));
  }
  const double rho = detail::delivery_probability(policy, ch);
  const double phi_p = detail::phi(p, rho);
  const double phi_q = detail::phi(q, rho);
  return p * q * (1.0 - rho) * (p + q + (2.0 - p - q) * rho) /
         ((p + q) * phi_p * phi_q * detail::error_denominator(src, rho));
}

}  // namespace via::analytics

#endif  // VIA_ANALYTICS_HPP
