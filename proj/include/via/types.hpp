#ifndef VIA_TYPES_HPP
#define VIA_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace via {

/// Thrown when a parameter lies outside its domain.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A series or an iterative solve does not converge for the given inputs.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested quantity has no closed form for this policy.
class UnsupportedPolicy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReducibleChain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double checked_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidParameter(std::string(name) + " must lie in [0, 1], got " +
                           std::to_string(value));
  }
  return value;
}

}  // namespace detail

/// Two-state source chain: p is Pr[0 -> 1], q is Pr[1 -> 0] per slot.
struct SourceParams {
  double p;
  double q;

  SourceParams(double p_, double q_)
      : p(detail::checked_probability(p_, "p")),
        q(detail::checked_probability(q_, "q")) {}

  bool operator==(const SourceParams&) const = default;

  /// p + q > 0; required by every stationary formula.
  bool irreducible() const { return p + q > 0.0; }
};

/// Packet-drop channel with per-transmission success probability p_s.
struct ChannelParams {
  double p_s;

  explicit ChannelParams(double p_s_)
      : p_s(detail::checked_probability(p_s_, "p_s")) {}

  bool operator==(const ChannelParams&) const = default;
};

using SourceState = std::uint8_t;

/// Per-slot system state. x_hat is the receiver's reconstruction after the
/// slot's delivery attempt; sampled/delivered describe that attempt.
struct SlotState {
  SourceState x = 0;
  SourceState x_hat = 0;
  std::uint64_t via = 0;
  std::uint64_t aoiv = 0;
  std::uint64_t aoii = 0;
  bool sampled = false;
  bool delivered = false;

  bool operator==(const SlotState&) const = default;

  bool erroneous() const { return x != x_hat; }

  bool satisfies_invariants() const {
    if (x > 1 || x_hat > 1) return false;
    if (aoiv != (erroneous() ? 1u : 0u)) return false;
    if ((aoii == 0) == erroneous()) return false;
    if (delivered && !sampled) return false;
    return true;
  }
};

inline void require_irreducible(const SourceParams& src) {
  if (!src.irreducible()) {
    throw InvalidParameter("p + q must be positive (p = q = 0 freezes the source)");
  }
}

}  // namespace via

#endif  // VIA_TYPES_HPP
