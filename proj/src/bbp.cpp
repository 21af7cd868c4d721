/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/bbp.hpp"

#include <cmath>

#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"

namespace nbmimo {

std::vector<int> antipodal_bits(double level, unsigned bits_per_rail) {
  // level = 2u - (2^B - 1) with u the natural binary weight of the bits.
  const long u = std::lround((level + (double)((1u << bits_per_rail) - 1)) / 2.0);
  std::vector<int> out(bits_per_rail);
  for (unsigned p = 0; p < bits_per_rail; ++p) out[p] = (u >> p) & 1;
  return out;
}

RealSystem expand_bit_system(const RealSystem& sys, unsigned m) {
  const PamAlphabet pam = PamAlphabet::make(m);
  const unsigned B = pam.bits_per_rail;
  RealSystem b;
  b.n2 = sys.n2;
  b.k2 = sys.k2 * (int)B;
  b.noise_var = sys.noise_var;
  b.y = sys.y;
  b.h.resize((std::size_t)b.n2 * b.k2);
  for (int i = 0; i < sys.n2; ++i)
    for (int j = 0; j < sys.k2; ++j) {
      const double hij = sys.h[(std::size_t)i * sys.k2 + j];
      for (unsigned p = 0; p < B; ++p)
        b.h[(std::size_t)i * b.k2 + (std::size_t)j * B + p] = hij * (double)(1u << p);
    }
  b.x.resize(b.k2);
  for (int j = 0; j < sys.k2; ++j) {
    auto bits = antipodal_bits(sys.x[j], B);
    for (unsigned p = 0; p < B; ++p) b.x[(std::size_t)j * B + p] = bits[p] ? 1.0 : -1.0;
  }
  return b;
}

BbpResult bbp_detect(const RealSystem& sys, unsigned m, const NbbpConfig& cfg) {
  const RealSystem b = expand_bit_system(sys, m);
  static const std::vector<double> kBinary = {-1.0, 1.0};
  NbbpDetector det(b, kBinary, cfg);
  det.run();
  PosteriorTable post = det.posteriors();
  BbpResult res;
  res.diag = det.diagnostics();
  res.p_plus.resize(b.k2);
  res.bits.resize(b.k2);
  for (int j = 0; j < b.k2; ++j) {
    res.p_plus[j] = post.row(j)[1];
    res.bits[j] = post.row(j)[1] > post.row(j)[0] ? 1 : 0;
  }
  return res;
}

}  // namespace nbmimo
