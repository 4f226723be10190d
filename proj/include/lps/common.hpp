#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace lps {

// Raised when a caller breaks a documented precondition (bad parameters,
// illegal adversary scripts, packets off their paths, ...).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Raised when input data (files, configs) fails structural validation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

// Saturating integer power; quantities like |M|^c are compared against
// polynomially bounded inputs and must not wrap.
inline std::uint64_t pow_saturating(std::uint64_t base, unsigned exp) {
  std::uint64_t result = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    result *= base;
  }
  return result;
}

// Smallest k with 2^k >= x (x >= 1); 64 when x exceeds 2^63.
inline unsigned ceil_log2(std::uint64_t x) {
  unsigned k = 0;
  std::uint64_t v = 1;
  while (v < x) {
    if (k == 63) return 64;
    v <<= 1;
    ++k;
  }
  return k;
}

inline std::uint64_t next_pow2(std::uint64_t x) {
  const unsigned k = ceil_log2(x < 1 ? 1 : x);
  return k >= 64 ? (std::uint64_t{1} << 63) : (std::uint64_t{1} << k);
}

inline std::uint64_t add_saturating(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b
             ? std::numeric_limits<std::uint64_t>::max()
             : a + b;
}

inline std::uint64_t mul_saturating(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline bool is_pow2(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace lps
