#pragma once

#include <cstdint>

#include "reann/keyvalue.hpp"

namespace reann::checks {

/// Analytic gradient against central differences on random networks.
KeyValueFile gradient(int cases, std::uint64_t seed);

/// Every fuzzed activation lies within epsilon of its nearest representative.
KeyValueFile containment(int trials, std::uint64_t seed);

/// Sequential covering against a brute-force separability oracle on small
/// tables of binary attributes: exhaustive for short tables, random up to 12 rows.
KeyValueFile cover_oracle(int random_tables, std::uint64_t seed);

/// Discretized training accuracy never falls below the floor cluster() accepted.
KeyValueFile discretized_floor(int trials, std::uint64_t seed);

}  // namespace reann::checks
