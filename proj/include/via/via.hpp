#ifndef VIA_VIA_HPP
#define VIA_VIA_HPP

#include "via/types.hpp"
#include "via/rng.hpp"
#include "via/markov_core.hpp"
#include "via/policies.hpp"
#include "via/analytics.hpp"
#include "via/oracle.hpp"
#include "via/simulator.hpp"
#include "via/optimizer.hpp"

#endif  // VIA_VIA_HPP
