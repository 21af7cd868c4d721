/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/channel.hpp"

#include <cmath>

#include "nbmimo/common.hpp"

namespace nbmimo {

ComplexChannel draw_channel(int n, int k, const std::vector<double>& user_var, Rng& rng) {
  if (n <= 0 || k <= 0) throw ConfigError("channel dimensions must be positive");
  if ((int)user_var.size() != k) throw ConfigError("user_var size must equal user count");
  ComplexChannel c;
  c.n = n;
  c.k = k;
  c.user_var = user_var;
  c.h.resize((std::size_t)n * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      const double s = std::sqrt(user_var[j] * 0.5);
      c.at(i, j) = {s * rng.gaussian(), s * rng.gaussian()};
    }
  return c;
}

double noise_variance(double snr_db, double symbol_energy, double sum_user_var) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double n0 = sum_user_var * symbol_energy / snr;
  return 0.5 * n0;
}

std::vector<double> realify(const ComplexChannel& c) {
  const int n2 = 2 * c.n, k2 = 2 * c.k;
  std::vector<double> h((std::size_t)n2 * k2);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.k; ++j) {
      const double re = c.at(i, j).real(), im = c.at(i, j).imag();
      h[(std::size_t)i * k2 + j] = re;
      h[(std::size_t)i * k2 + c.k + j] = -im;
      h[(std::size_t)(c.n + i) * k2 + j] = im;
      h[(std::size_t)(c.n + i) * k2 + c.k + j] = re;
    }
  return h;
}

RealSystem assemble_system(const ComplexChannel& c,
                           const std::vector<std::complex<double>>& x_complex,
                           double noise_var, Rng& rng) {
  if ((int)x_complex.size() != c.k) throw ConfigError("x size must equal user count");
  RealSystem s;
  s.n2 = 2 * c.n;
  s.k2 = 2 * c.k;
  s.noise_var = noise_var;
  s.h = realify(c);
  s.x.resize(s.k2);
  for (int j = 0; j < c.k; ++j) {
    s.x[j] = x_complex[j].real();
    s.x[c.k + j] = x_complex[j].imag();
  }
  s.y.assign(s.n2, 0.0);
  const double sd = std::sqrt(noise_var);
  for (int i = 0; i < s.n2; ++i) {
    double acc = 0.0;
    const double* row = &s.h[(std::size_t)i * s.k2];
    for (int j = 0; j < s.k2; ++j) acc += row[j] * s.x[j];
    s.y[i] = acc + sd * rng.gaussian();
  }
  return s;
}

}  // namespace nbmimo
