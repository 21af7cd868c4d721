/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_CHANNEL_HPP
#define NBMIMO_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "nbmimo/rng.hpp"

namespace nbmimo {

// N x K complex channel, row-major, entry (i,j) ~ CN(0, user_var[j]).
struct ComplexChannel {
  int n = 0, k = 0;
  std::vector<std::complex<double>> h;
  std::vector<double> user_var;

  std::complex<double>& at(int i, int j) { return h[(std::size_t)i * k + j]; }
  const std::complex<double>& at(int i, int j) const { return h[(std::size_t)i * k + j]; }
};

ComplexChannel draw_channel(int n, int k, const std::vector<double>& user_var, Rng& rng);

// Average per-receive-antenna SNR convention: snr = sum_j(user_var_j) *
// symbol_energy / N0 with N0 the complex noise variance.  Returns the noise
// variance per real component (N0/2).
double noise_variance(double snr_db, double symbol_energy, double sum_user_var);

// Real-valued decomposition y = Hx + w with H = [[Re,-Im],[Im,Re]] (2N x 2K),
// x = [Re(xc); Im(xc)], w i.i.d. N(0, noise_var) per component.
struct RealSystem {
  int n2 = 0, k2 = 0;
  std::vector<double> h;  // 2N x 2K row-major
  std::vector<double> x;  // transmitted (known to the simulator, not detectors)
  std::vector<double> y;
  double noise_var = 0.0;

  double hat(int i, int j) const { return h[(std::size_t)i * k2 + j]; }
};

// The 2N x 2K real expansion of the channel matrix.
std::vector<double> realify(const ComplexChannel& c);

// Assembles a full real system for one channel use: realifies the channel,
// splits x into rails, and adds fresh noise.
RealSystem assemble_system(const ComplexChannel& c,
                           const std::vector<std::complex<double>>& x_complex,
                           double noise_var, Rng& rng);

}  // namespace nbmimo

#endif
