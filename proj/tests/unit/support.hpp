#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>

#include "via/rng.hpp"
#include "via/types.hpp"

namespace via_test {

/// Replays a fixed sequence of Bernoulli outcomes, ignoring the requested
/// probability. Running dry is a test bug.
struct ScriptedRng {
  std::deque<bool> script;
  std::size_t draws = 0;

  bool bernoulli(double) {
    if (script.empty()) throw std::logic_error("scripted rng ran dry");
    const bool b = script.front();
    script.pop_front();
    ++draws;
    return b;
  }
};

/// Random parameter draws for property sweeps.
struct Draws {
  via::RngHandle rng;

  explicit Draws(std::uint64_t seed) : rng(seed, 0x7e57) {}

  double open_unit(double lo = 0.01, double hi = 0.99) { return lo + (hi - lo) * rng.uniform(); }

  via::SourceParams source() { return {open_unit(), open_unit()}; }
  via::ChannelParams channel() { return via::ChannelParams(open_unit(0.05, 1.0)); }
};

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace via_test
