#include "dwass/primes.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

namespace dwass {
namespace {

std::mutex table_mutex;
std::vector<std::uint64_t> table = {2, 3, 5, 7, 11, 13};

bool is_prime(std::uint64_t candidate) {
  for (std::uint64_t p : table) {
    if (p * p > candidate) return true;
    if (candidate % p == 0) return false;
  }
  // The table always reaches sqrt(candidate) before this line: it grows one
  // prime at a time and primes gaps are far below squaring.
  return true;
}

}  // namespace

std::uint64_t nth_prime(std::size_t n) {
  if (n == 0) throw std::invalid_argument("prime index is 1-based");
  std::lock_guard<std::mutex> guard(table_mutex);
  while (table.size() < n) {
    std::uint64_t candidate = table.back() + 2;
    while (!is_prime(candidate)) candidate += 2;
    table.push_back(candidate);
  }
  return table[n - 1];
}

}  // namespace dwass
