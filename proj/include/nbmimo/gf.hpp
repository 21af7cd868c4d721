/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_GF_HPP
#define NBMIMO_GF_HPP

#include <cstdint>
#include <vector>

namespace nbmimo::gf {

using Elem = std::uint16_t;

// GF(2^beta) under a primitive reduction polynomial, with multiplication via
// log/antilog tables.  Addition is XOR.  Elements are the integers 0..q-1 read
// as bit vectors of polynomial coefficients.
class Field {
 public:
  // Uses the built-in primitive polynomial for beta in [1,16].
  static Field make(unsigned beta);
  // poly includes the leading x^beta term, e.g. 0x13 = x^4+x+1 for beta=4.
  // Throws ConfigError if poly is not primitive of the right degree.
  static Field make(unsigned beta, std::uint32_t poly);

  unsigned beta() const { return beta_; }
  std::uint32_t q() const { return q_; }
  std::uint32_t poly() const { return poly_; }

  static Elem add(Elem a, Elem b) { return a ^ b; }

  Elem mul(Elem a, Elem b) const {
    if (a == 0 || b == 0) return 0;
    std::uint32_t e = (std::uint32_t)log_[a] + log_[b];
    if (e >= q_ - 1) e -= q_ - 1;
    return antilog_[e];
  }

  // Throws std::domain_error on a == 0.
  Elem inv(Elem a) const;

  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

  // alpha^e for e >= 0 (alpha = x, the primitive element).
  Elem alpha_pow(std::uint32_t e) const { return antilog_[e % (q_ - 1)]; }

  Elem log(Elem a) const { return log_[a]; }  // a != 0

  const std::vector<Elem>& log_table() const { return log_; }
  const std::vector<Elem>& antilog_table() const { return antilog_; }

 private:
  Field() = default;
  unsigned beta_ = 0;
  std::uint32_t q_ = 0;
  std::uint32_t poly_ = 0;
  std::vector<Elem> log_;      // length q; log_[0] unused
  std::vector<Elem> antilog_;  // length q-1; antilog_[i] = alpha^i
};

// Built-in primitive polynomial for each beta in [1,16].
std::uint32_t default_poly(unsigned beta);

}  // namespace nbmimo::gf

#endif
