#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dwass/measure.hpp"

namespace dwass {

struct SupportLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransportLimits {
  std::size_t max_support_per_side = 64;
};

/// Exact min-cost transportation between a supply and a demand vector with
/// integer arc costs, solved by successive shortest augmenting paths over
/// rationals. Requires sum(supply) == sum(demand). Knows nothing about the
/// lattice structure of measures; it is the independent check for the
/// closed-form distance.
Rational min_cost_transport(const std::vector<Rational>& supply,
                            const std::vector<Rational>& demand,
                            const std::vector<std::vector<int>>& cost);

/// Optimal transport cost between two probability measures under the 0/1
/// ground cost, via the generic solver over the two supports. Throws
/// SupportLimitError when either support exceeds the configured limit.
Rational oracle_min_cost(const ProbabilityMeasure<Rational>& mu,
                         const ProbabilityMeasure<Rational>& nu,
                         const TransportLimits& limits = {});

}  // namespace dwass
