/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_MATHUTIL_HPP
#define NBMIMO_MATHUTIL_HPP

#include <bit>
#include <cmath>
#include <cstdint>

namespace nbmimo {

// exp(x) with |rel err| < 4e-12, pure arithmetic (no libm), so results are
// reproducible across libm versions and the call is cheap enough for the
// message-passing hot loop.  Range-reduced x = k*ln2 + r, |r| <= ln2/2, with a
// degree-10 Taylor tail and 2^k applied through the exponent bits.
inline double fast_exp(double x) {
  if (x < -700.0) return 0.0;
  if (x > 700.0) x = 700.0;
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  double kd = x * kLog2e;
  kd = (kd >= 0.0) ? (double)(std::int64_t)(kd + 0.5) : (double)(std::int64_t)(kd - 0.5);
  const double r = (x - kd * kLn2Hi) - kd * kLn2Lo;
  // Taylor polynomial of exp on |r| <= 0.3466; remainder < 1e-12.
  double p = 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t k = (std::int64_t)kd;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(p);
  const std::int64_t expo = (std::int64_t)((bits >> 52) & 0x7ff) + k;
  if (expo <= 0) return 0.0;  // underflow to zero, fine for probabilities
  return std::bit_cast<double>((bits & ~(0x7ffULL << 52)) | ((std::uint64_t)expo << 52));
}

// SplitMix64 step; used to derive independent per-trial seeds from one master
// seed so results are independent of scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  (void)splitmix64(s);
  s ^= 0xc2b2ae3d27d4eb4fULL * (b + 1);
  (void)splitmix64(s);
  s ^= 0x165667b19e3779f9ULL * (c + 1);
  return splitmix64(s);
}

}  // namespace nbmimo

#endif
