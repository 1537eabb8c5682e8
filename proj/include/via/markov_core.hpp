#ifndef VIA_MARKOV_CORE_HPP
#define VIA_MARKOV_CORE_HPP

#include <array>

#include "via/rng.hpp"
#include "via/types.hpp"

namespace via {

/// One transition of the two-state source.
template <typename Rng>
SourceState step_source(const SourceParams& src, SourceState x, Rng& rng) {
  const double flip = (x == 0) ? src.p : src.q;
  return rng.bernoulli(flip) ? static_cast<SourceState>(1 - x) : x;
}

/// Stationary law (Pr[X=0], Pr[X=1]) = (q, p) / (p + q).
inline std::array<double, 2> source_stationary(const SourceParams& src) {
  require_irreducible(src);
  const double total = src.p + src.q;
  return {src.q / total, src.p / total};
}

/// h(t): a delivery needs a transmission, which succeeds with p_s.
template <typename Rng>
bool step_channel(const ChannelParams& ch, bool sampled, Rng& rng) {
  if (!sampled) return false;
  return rng.bernoulli(ch.p_s);
}

/// Advances the system by one slot.
///
/// Order within the slot: the source moves to x(t+1); the policy decides on
/// the fresh state, seeing (x(t+1), x(t), x_hat(t)); the channel resolves the
/// transmission; the receiver adopts x(t+1) on delivery; finally the three
/// ages are updated from the slot's source change and the post-delivery pair
/// (x(t+1), x_hat(t+1)).
///
/// `decide` is any callable `bool(SourceState now, SourceState prev,
/// SourceState x_hat)`.
template <typename Decide, typename Rng>
SlotState advance_slot(const SourceParams& src, const ChannelParams& ch, Decide&& decide,
                       const SlotState& state, Rng& rng) {
  SlotState next = state;
  next.x = step_source(src, state.x, rng);
  const bool changed = next.x != state.x;

  next.sampled = decide(next.x, state.x, state.x_hat);
  next.delivered = step_channel(ch, next.sampled, rng);
  if (next.delivered) next.x_hat = next.x;

  if (next.delivered) {
    next.via = 0;
  } else if (changed) {
    ++next.via;
  }

  const bool erroneous = next.x != next.x_hat;
  if (!erroneous) {
    next.aoiv = 0;
  } else if (changed) {
    ++next.aoiv;
  }

  next.aoii = erroneous ? state.aoii + 1 : 0;
  return next;
}

}  // namespace via

#endif  // VIA_MARKOV_CORE_HPP
