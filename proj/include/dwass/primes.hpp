#pragma once

#include <cstddef>
#include <cstdint>

namespace dwass {

/// n-th prime, 1-based: nth_prime(1) == 2. Memoized trial division behind a
/// lock; safe for concurrent callers.
std::uint64_t nth_prime(std::size_t n);

}  // namespace dwass
