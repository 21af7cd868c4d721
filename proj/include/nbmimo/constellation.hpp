/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_CONSTELLATION_HPP
#define NBMIMO_CONSTELLATION_HPP

#include <complex>
#include <cstdint>
#include <vector>

namespace nbmimo {

inline unsigned gray_encode(unsigned i) { return i ^ (i >> 1); }
unsigned gray_decode(unsigned g);

// Amplitude levels of one rail (I or Q) of a square M-QAM constellation:
// {-(sqrt(M)-1), ..., -3, -1, +1, +3, ..., +(sqrt(M)-1)} in ascending order.
struct PamAlphabet {
  unsigned m = 0;          // full QAM order
  unsigned side = 0;       // sqrt(m), number of levels per rail
  unsigned bits_per_rail = 0;
  std::vector<double> levels;
  double rail_energy = 0.0;    // mean(levels^2) = (m-1)/3
  double symbol_energy = 0.0;  // complex-symbol mean energy = 2*rail_energy

  // m must be an even power of two in [4, 65536].
  static PamAlphabet make(unsigned m);

  // Nearest level index for an unquantized estimate (ties to lower index).
  unsigned slice(double v) const;

  // Per-rail Gray label of the level at a given index.
  unsigned label(unsigned level_idx) const { return gray_encode(level_idx); }
  unsigned index_of_label(unsigned lab) const { return gray_decode(lab); }
};

// Bijection between GF(2^beta) symbols (beta = log2 m) and QAM points.  The
// low beta/2 bits of the symbol are the Gray label of the I rail, the high
// beta/2 bits the label of the Q rail.
struct QamMapper {
  PamAlphabet pam;

  static QamMapper make(unsigned m) { return QamMapper{PamAlphabet::make(m)}; }

  unsigned rail_index_re(std::uint16_t sym) const {
    return pam.index_of_label(sym & (pam.side - 1));
  }
  unsigned rail_index_im(std::uint16_t sym) const {
    return pam.index_of_label((sym >> pam.bits_per_rail) & (pam.side - 1));
  }
  std::complex<double> map(std::uint16_t sym) const {
    return {pam.levels[rail_index_re(sym)], pam.levels[rail_index_im(sym)]};
  }
  std::uint16_t symbol_of_indices(unsigned idx_re, unsigned idx_im) const {
    return (std::uint16_t)(pam.label(idx_re) | (pam.label(idx_im) << pam.bits_per_rail));
  }
  std::uint16_t slice(std::complex<double> v) const {
    return symbol_of_indices(pam.slice(v.real()), pam.slice(v.imag()));
  }
};

// Combines per-rail posteriors (one row of length side per rail) into a prior
// over the m field symbols, normalized to sum 1.
std::vector<double> symbol_prior_from_rails(const QamMapper& map, const double* p_re,
                                            const double* p_im);

}  // namespace nbmimo

#endif
