/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/gf.hpp"

#include <stdexcept>

#include "nbmimo/common.hpp"

namespace nbmimo::gf {

std::uint32_t default_poly(unsigned beta) {
  // Minimal-weight primitive polynomials, LSB = constant term.
  static const std::uint32_t kPoly[17] = {
      0,
      0x3,      // x + 1
      0x7,      // x^2 + x + 1
      0xB,      // x^3 + x + 1
      0x13,     // x^4 + x + 1
      0x25,     // x^5 + x^2 + 1
      0x43,     // x^6 + x + 1
      0x89,     // x^7 + x^3 + 1
      0x11D,    // x^8 + x^4 + x^3 + x^2 + 1
      0x211,    // x^9 + x^4 + 1
      0x409,    // x^10 + x^3 + 1
      0x805,    // x^11 + x^2 + 1
      0x1053,   // x^12 + x^6 + x^4 + x + 1
      0x201B,   // x^13 + x^4 + x^3 + x + 1
      0x4443,   // x^14 + x^10 + x^6 + x + 1
      0x8003,   // x^15 + x + 1
      0x1100B,  // x^16 + x^12 + x^3 + x + 1
  };
  if (beta < 1 || beta > 16) throw ConfigError("field size out of range: beta must be in [1,16]");
  return kPoly[beta];
}

Field Field::make(unsigned beta) { return make(beta, default_poly(beta)); }

Field Field::make(unsigned beta, std::uint32_t poly) {
  if (beta < 1 || beta > 16) throw ConfigError("field size out of range: beta must be in [1,16]");
  if (poly >> beta != 1u)
    throw ConfigError("reduction polynomial degree does not match field size");

  Field f;
  f.beta_ = beta;
  f.q_ = 1u << beta;
  f.poly_ = poly;
  f.antilog_.assign(f.q_ - 1, 0);
  f.log_.assign(f.q_, 0);

  // antilog_[i] = alpha^i built by multiplying by x and reducing; the table
  // must enumerate every nonzero element exactly once or poly is not
  // primitive.
  std::uint32_t v = 1;
  for (std::uint32_t i = 0; i < f.q_ - 1; ++i) {
    f.antilog_[i] = (Elem)v;
    if (i > 0 && v == 1) throw ConfigError("reduction polynomial is not primitive");
    v <<= 1;
    if (v & f.q_) v ^= poly;
  }
  v <<= 0;
  // Closing the cycle: alpha^(q-1) must come back to 1.
  std::uint32_t w = f.antilog_[f.q_ - 2];
  w <<= 1;
  if (w & f.q_) w ^= poly;
  if (w != 1) throw ConfigError("reduction polynomial is not primitive");

  for (std::uint32_t i = 0; i < f.q_ - 1; ++i) {
    if (f.antilog_[i] == 0 || (i > 0 && f.log_[f.antilog_[i]] != 0))
      throw ConfigError("reduction polynomial is not primitive");
    f.log_[f.antilog_[i]] = (Elem)i;
  }
  return f;
}

Elem Field::inv(Elem a) const {
  if (a == 0) throw std::domain_error("gf inverse of zero");
  std::uint32_t e = q_ - 1 - log_[a];
  if (e >= q_ - 1) e -= q_ - 1;  // a == 1
  return antilog_[e];
}

}  // namespace nbmimo::gf
