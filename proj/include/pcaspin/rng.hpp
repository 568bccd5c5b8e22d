#pragma once

#include <array>
#include <cstdint>

/// Counter-based random number generation.
///
/// Every random quantity consumed by the samplers is a pure function of
/// (seed, step, site, lane).  There is no mutable generator state, so a
/// parallel update can evaluate site i's variate on any worker thread -- or
/// re-evaluate it -- and always obtain the same bits.  This is what makes
/// simulation output bit-identical for every choice of thread count.
///
/// The block cipher is Philox4x32-10 (Salmon et al.'s counter-based
/// generator): a 128-bit counter is encrypted under a 64-bit key with ten
/// rounds of 32x32->64 multiply/xor mixing.  The counter packs (step, site,
/// lane); the key carries the user seed.
namespace pcaspin::rng {

namespace detail {
inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;  // golden-ratio Weyl
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;  // sqrt(3)-1 Weyl

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}
}  // namespace detail

/// Ten-round Philox4x32 block function: encrypts a 128-bit counter under a
/// 64-bit key and returns 128 bits of output.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(ctr, key);
    key[0] += detail::kPhiloxW0;
    key[1] += detail::kPhiloxW1;
  }
  return ctr;
}

/// Independent variate families drawn at the same (seed, step, site).
enum class Lane : std::uint32_t {
  kFlip = 0,    ///< parallel update: per-site acceptance variate
  kSelect = 1,  ///< sequential update: site-selection variate
  kSpin = 2,    ///< sequential update: spin-resampling variate
  kInit = 3,    ///< random initial configuration
};

/// 64 uniform random bits for the given (seed, step, site, lane).
inline std::uint64_t random_bits(std::uint64_t seed, std::uint64_t step,
                                 std::uint64_t site, Lane lane) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
      static_cast<std::uint32_t>(site),
      static_cast<std::uint32_t>(site >> 32) ^
          (static_cast<std::uint32_t>(lane) * detail::kPhiloxW0)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  std::array<std::uint32_t, 4> out = philox4x32(ctr, key);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform01(std::uint64_t seed, std::uint64_t step,
                        std::uint64_t site, Lane lane) {
  return static_cast<double>(random_bits(seed, step, site, lane) >> 11) *
         0x1.0p-53;
}

/// Uniform index in {0, ..., n-1} (fixed-point multiply; bias < 2^-57 for the
/// system sizes supported here).
inline std::uint64_t uniform_index(std::uint64_t seed, std::uint64_t step,
                                   std::uint64_t site, Lane lane,
                                   std::uint64_t n) {
  unsigned __int128 wide =
      static_cast<unsigned __int128>(random_bits(seed, step, site, lane)) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

/// Derives an independent sub-stream seed from (seed, tag); used to give each
/// Monte Carlo trial its own statistically independent stream.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(tag),
                                      static_cast<std::uint32_t>(tag >> 32),
                                      0x5EED5EEDu, 0x0Du};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  std::array<std::uint32_t, 4> out = philox4x32(ctr, key);
  return (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
}

}  // namespace pcaspin::rng
