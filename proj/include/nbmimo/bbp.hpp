/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_BBP_HPP
#define NBMIMO_BBP_HPP

#include <vector>

#include "nbmimo/channel.hpp"
#include "nbmimo/nbbp.hpp"

namespace nbmimo {

// Bit-level baseline: each rail symbol is expanded as sum_p 2^p b_p with
// b_p in {-1,+1}, giving the equivalent system y = H (I (x) m) b + w with
// m = [2^0 2^1 ... 2^{beta/2-1}].  The same Gaussian-interference BP then runs
// with the binary alphabet on the 2N x (K*beta) expansion.
struct BbpResult {
  std::vector<double> p_plus;  // Pr(bit = +1), 2K*bits_per_rail entries
  std::vector<int> bits;       // hard decisions, 1 means +1
  NbbpDiagnostics diag;
};

BbpResult bbp_detect(const RealSystem& sys, unsigned m, const NbbpConfig& cfg);

// Decomposes a rail level into its antipodal bits (LSB first); returns 0/1
// flags where 1 encodes +1.  level = sum_p 2^p (2*out[p]-1).
std::vector<int> antipodal_bits(double level, unsigned bits_per_rail);

// The expanded real system (exposed for tests).
RealSystem expand_bit_system(const RealSystem& sys, unsigned m);

}  // namespace nbmimo

#endif
