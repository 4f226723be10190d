#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lps/common.hpp"
#include "lps/core.hpp"

// Seeded deterministic hash families standing in for the shared-randomness
// hash functions h : (sequence, identifier) -> {0, ..., L-1}. The mixing
// construction is fixed bit-exactly so certified seeds replay across
// platforms and processes.

namespace lps {

// Sentinel for virt(j, len(seq(j))): the job is complete.
inline constexpr std::uint64_t kVirtInfinity = ~std::uint64_t{0};

inline constexpr std::uint64_t kSplitMix64Gamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 output mixing function (finalizer only).
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Sebastiano Vigna's splitmix64 stream.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}
  constexpr std::uint64_t next() {
    state_ += kSplitMix64Gamma;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline constexpr std::uint64_t fnv1a_u32(std::uint64_t h, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    h ^= (v >> (i * 8)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

inline constexpr std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace detail

// A member of the hash family: deterministic map to {0, ..., L-1}, L a
// power of two. The canonical byte encoding (length, ids, identifier) is
// folded through seeded 64-bit FNV-1a, finalized with the SplitMix64 mixing
// function, and the top log2(L) bits are the output.
struct HashFamily {
  std::uint64_t seed = 0;
  std::uint64_t L = 1;

  HashFamily() = default;
  HashFamily(std::uint64_t seed_, std::uint64_t L_) : seed(seed_), L(L_) {
    require(is_pow2(L), "L must be a power of two");
  }

  std::uint64_t hash_job(const Sequence& seq, JobInd ind) const {
    std::uint64_t h = detail::kFnvOffset ^ seed;
    h = detail::fnv1a_u64(h, seq.size());
    for (MachineId m : seq) h = detail::fnv1a_u32(h, m);
    h = detail::fnv1a_u64(h, ind);
    return top_bits(splitmix64_mix(h));
  }

  std::uint64_t hash_job(const JobSpec& j) const { return hash_job(j.seq, j.ind); }

  // Appendix-A style hashing: paths carry no identifier; callers must
  // guarantee no two packets evaluate to the same path.
  std::uint64_t hash_path(const Path& p) const {
    std::uint64_t h = detail::kFnvOffset ^ seed;
    h = detail::fnv1a_u64(h, p.edges.size());
    for (EdgeId e : p.edges) h = detail::fnv1a_u32(h, e);
    return top_bits(splitmix64_mix(h));
  }

 private:
  std::uint64_t top_bits(std::uint64_t z) const {
    const unsigned bits = ceil_log2(L);
    return bits == 0 ? 0 : z >> (64 - bits);
  }
};

// virt(j, i) = h(j) + i while i < len, infinity at i = len.
inline std::uint64_t virt(std::uint64_t h_value, std::size_t i, std::size_t seq_len) {
  require(i <= seq_len, "position past end of sequence");
  return i == seq_len ? kVirtInfinity : h_value + i;
}

// An ordered set h_1, ..., h_k with distinct derived sub-seeds.
struct HashSet {
  std::vector<HashFamily> members;
  std::size_t size() const { return members.size(); }
};

// Sub-seed stream: a pure function of (master seed, scale index, member
// index). Scale index distinguishes draws at different points of the
// doubling schedule so every sample consumes fresh shared randomness.
inline std::uint64_t derive_subseed(std::uint64_t master_seed, std::uint64_t scale_index,
                                    std::uint64_t member_index) {
  std::uint64_t s = splitmix64_mix(master_seed + kSplitMix64Gamma * (scale_index + 1));
  return splitmix64_mix(s + kSplitMix64Gamma * (member_index + 1));
}

inline HashSet sample_hash_set(std::uint64_t master_seed, std::size_t k, std::uint64_t L,
                               std::uint64_t scale_index = 0) {
  require(k >= 1, "hash set needs k >= 1");
  require(is_pow2(L), "L must be a power of two");
  HashSet set;
  set.members.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    set.members.emplace_back(derive_subseed(master_seed, scale_index, i), L);
  return set;
}

// Scale overrides for desk-size runs. Defaults reproduce the formulas
// l = ceil(150 c ln|M| / ln ln|M|) and k = ceil(8 (b+1)(2c+1) ln|M| / ln l).
struct ScaleKnobs {
  double l_factor = 150.0;
  double k_factor = 8.0;
  std::optional<std::uint64_t> l_override;
  std::optional<std::uint64_t> k_override;
  std::optional<std::uint64_t> reps_override;
  std::optional<std::uint64_t> l_max_override;  // caps doubling sweeps

  bool is_default() const {
    return l_factor == 150.0 && k_factor == 8.0 && !l_override && !k_override &&
           !reps_override && !l_max_override;
  }
};

struct DerivedParams {
  std::uint64_t l = 1;  // small steps per large step
  std::uint64_t k = 1;  // hash functions per scale
  // Set when |M| is below the regime the probability analysis assumes
  // (the denominators were clamped or |M| < 32).
  bool theory_preconditions_violated = false;
};

inline DerivedParams derive_params(std::uint64_t m_size, unsigned c, unsigned b,
                                   const ScaleKnobs& knobs = {}) {
  require(m_size >= 2, "need at least two machines");
  DerivedParams p;
  const double ln_m = std::log(static_cast<double>(m_size));
  double denom = std::log(ln_m);
  if (denom < 1.0) {
    // ln ln|M| < 1 for |M| <= 15; the formula is outside its regime there.
    denom = 1.0;
    p.theory_preconditions_violated = true;
  }
  if (m_size < 32) p.theory_preconditions_violated = true;

  if (knobs.l_override) {
    p.l = std::max<std::uint64_t>(*knobs.l_override, 1);
  } else {
    p.l = static_cast<std::uint64_t>(std::ceil(knobs.l_factor * c * ln_m / denom));
    p.l = std::max<std::uint64_t>(p.l, 1);
  }

  if (knobs.k_override) {
    p.k = std::max<std::uint64_t>(*knobs.k_override, 1);
  } else {
    double ln_l = std::log(static_cast<double>(p.l));
    if (ln_l <= 0.0) {
      ln_l = std::log(2.0);
      p.theory_preconditions_violated = true;
    }
    p.k = static_cast<std::uint64_t>(
        std::ceil(knobs.k_factor * (b + 1) * (2 * c + 1) * ln_m / ln_l));
    p.k = std::max<std::uint64_t>(p.k, 1);
  }
  return p;
}

}  // namespace lps
