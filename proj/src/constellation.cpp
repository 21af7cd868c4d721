/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/constellation.hpp"

#include <cmath>

#include "nbmimo/common.hpp"

namespace nbmimo {

unsigned gray_decode(unsigned g) {
  unsigned i = g;
  while (g >>= 1) i ^= g;
  return i;
}

PamAlphabet PamAlphabet::make(unsigned m) {
  unsigned beta = 0;
  while ((1u << beta) < m) ++beta;
  if ((1u << beta) != m || beta % 2 != 0 || m < 4 || m > 65536)
    throw ConfigError("qam order must be an even power of two in [4, 65536]");
  PamAlphabet p;
  p.m = m;
  p.side = 1u << (beta / 2);
  p.bits_per_rail = beta / 2;
  p.levels.resize(p.side);
  for (unsigned i = 0; i < p.side; ++i) p.levels[i] = 2.0 * i - (double)(p.side - 1);
  p.rail_energy = (double)(m - 1) / 3.0;
  p.symbol_energy = 2.0 * p.rail_energy;
  return p;
}

unsigned PamAlphabet::slice(double v) const {
  // Levels are 2i - (side-1); invert and clamp.
  double idx = (v + (double)(side - 1)) * 0.5;
  long i = std::lround(idx);
  if (i < 0) i = 0;
  if (i >= (long)side) i = side - 1;
  return (unsigned)i;
}

std::vector<double> symbol_prior_from_rails(const QamMapper& map, const double* p_re,
                                            const double* p_im) {
  const unsigned m = map.pam.m;
  std::vector<double> prior(m);
  double sum = 0.0;
  for (unsigned c = 0; c < m; ++c) {
    prior[c] = p_re[map.rail_index_re((std::uint16_t)c)] *
               p_im[map.rail_index_im((std::uint16_t)c)];
    sum += prior[c];
  }
  if (sum <= 0.0) {
    for (unsigned c = 0; c < m; ++c) prior[c] = 1.0 / m;
  } else {
    for (unsigned c = 0; c < m; ++c) prior[c] /= sum;
  }
  return prior;
}

}  // namespace nbmimo
