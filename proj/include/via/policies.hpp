#ifndef VIA_POLICIES_HPP
#define VIA_POLICIES_HPP

#include <optional>
#include <string>
#include <string_view>

#include "via/markov_core.hpp"
#include "via/types.hpp"

namespace via {

enum class PolicyKind { RandomizedStationary, ChangeAware, SemanticsAware };

inline std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::RandomizedStationary: return "randomized_stationary";
    case PolicyKind::ChangeAware: return "change_aware";
    case PolicyKind::SemanticsAware: return "semantics_aware";
  }
  return "unknown";
}

inline std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "randomized_stationary" || name == "rs") return PolicyKind::RandomizedStationary;
  if (name == "change_aware" || name == "ca") return PolicyKind::ChangeAware;
  if (name == "semantics_aware" || name == "sa") return PolicyKind::SemanticsAware;
  return std::nullopt;
}

/// Sampling/transmission policy. Only the randomized stationary policy
/// carries a parameter.
class PolicySpec {
 public:
  static PolicySpec randomized_stationary(double p_sample) {
    return PolicySpec(PolicyKind::RandomizedStationary,
                      detail::checked_probability(p_sample, "p_sample"));
  }
  static PolicySpec change_aware() { return PolicySpec(PolicyKind::ChangeAware, std::nullopt); }
  static PolicySpec semantics_aware() {
    return PolicySpec(PolicyKind::SemanticsAware, std::nullopt);
  }

  PolicyKind kind() const { return kind_; }
  std::optional<double> p_sample() const { return p_sample_; }

  double sample_probability() const {
    if (!p_sample_) throw UnsupportedPolicy("policy has no sampling probability");
    return *p_sample_;
  }

  bool operator==(const PolicySpec&) const = default;

 private:
  PolicySpec(PolicyKind kind, std::optional<double> p_sample)
      : kind_(kind), p_sample_(p_sample) {}

  PolicyKind kind_;
  std::optional<double> p_sample_;
};

/// Sampling decision for the current slot. Only the randomized stationary
/// policy consumes randomness.
template <typename Rng>
bool decide(const PolicySpec& policy, SourceState x_now, SourceState x_prev,
            SourceState x_hat, Rng& rng) {
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary:
      return rng.bernoulli(*policy.p_sample());
    case PolicyKind::ChangeAware:
      return x_now != x_prev;
    case PolicyKind::SemanticsAware:
      return x_now != x_hat;
  }
  return false;
}

template <typename Rng>
SlotState advance_slot(const SourceParams& src, const ChannelParams& ch,
                       const PolicySpec& policy, const SlotState& state, Rng& rng) {
  return advance_slot(
      src, ch,
      [&](SourceState now, SourceState prev, SourceState x_hat) {
        return decide(policy, now, prev, x_hat, rng);
      },
      state, rng);
}

/// Long-run fraction of slots in which the policy samples.
///
/// Change-aware samples on every source change, 2pq/(p+q). Semantics-aware
/// samples whenever the fresh source state differs from the reconstruction,
/// which in steady state happens with probability
/// 2pq / ((p+q) [p+q+(1-p-q) p_s]).
inline double sampling_rate(const PolicySpec& policy, const SourceParams& src,
                            const ChannelParams& ch) {
  require_irreducible(src);
  const double p = src.p;
  const double q = src.q;
  switch (policy.kind()) {
    case PolicyKind::RandomizedStationary:
      return *policy.p_sample();
    case PolicyKind::ChangeAware:
      return 2.0 * p * q / (p + q);
    case PolicyKind::SemanticsAware:
      return 2.0 * p * q / ((p + q) * (p + q + (1.0 - p - q) * ch.p_s));
  }
  return 0.0;
}

}  // namespace via

#endif  // VIA_POLICIES_HPP
