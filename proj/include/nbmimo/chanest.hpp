/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_CHANEST_HPP
#define NBMIMO_CHANEST_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "nbmimo/channel.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/linear.hpp"
#include "nbmimo/nbbp.hpp"
#include "nbmimo/rng.hpp"

namespace nbmimo::chanest {

// Scaled-DFT pilot matrix, K x K column-major (column t is the pilot vector
// sent at channel use t).  Columns are orthogonal with per-entry power equal
// to `symbol_energy`, so pilots spend the same power as data symbols and the
// estimator decouples per user.
std::vector<std::complex<double>> dft_pilots(int k, double symbol_energy);

// One transmission frame: a K-use pilot block followed by l data blocks of K
// channel uses each, all over one fixed channel draw.
struct Frame {
  ComplexChannel channel;
  int l = 0;
  unsigned qam_order = 16;
  std::vector<std::complex<double>> pilots;  // K x K column-major
  std::vector<std::uint16_t> data;           // l*K uses x K users, use-major

  int uses() const { return (l + 1) * channel.k; }
};

Frame make_frame(int n, int k, int l, unsigned qam_order,
                 const std::vector<double>& user_var, Rng& rng);

// Per-use received vectors.  noise_var is per real component, matching the
// library's RealSystem convention (the complex noise variance is twice it).
struct FrameObservation {
  int n = 0, k = 0, l = 0;
  std::vector<std::complex<double>> y_pilot;  // N x K column-major
  std::vector<std::complex<double>> y_data;   // l*K uses, N entries per use
  double noise_var = 0.0;
};

FrameObservation transmit(const Frame& frame, double noise_var, Rng& rng);

// Linear MMSE channel estimate from one observed block:
//   H_hat = Y X^H (X X^H + diag(2*noise_var / prior_var_j))^-1,
// with Y (n x uses) and X (k x uses) column-major, one column per channel
// use.  prior_var holds the known per-user channel variances.  A
// rank-deficient regressor with no regularization (noise_var == 0) raises
// ConfigError.
ComplexChannel mmse_estimate(const std::vector<std::complex<double>>& y,
                             const std::vector<std::complex<double>>& x,
                             int n, int k, double noise_var,
                             const std::vector<double>& prior_var);

// Re-runs the estimator on the pilot block plus every data block, treating
// the detected symbol vectors as extra pilots (a k x (l+1)*k stacked
// regressor).  If the stack is rank-deficient at zero noise it falls back to
// the pilot-only estimate.  `detected` is l*K uses x K users, use-major.
ComplexChannel refine_estimate(const FrameObservation& obs,
                               const std::vector<std::complex<double>>& x_pilot,
                               const std::vector<std::complex<double>>& detected,
                               double noise_var,
                               const std::vector<double>& prior_var);

// Mean squared estimation error per channel entry.
double channel_mse(const ComplexChannel& estimate, const ComplexChannel& truth);

enum class DetectorKind { kNbbp, kMf, kZf, kMmse };

struct ReceiveConfig {
  DetectorKind detector = DetectorKind::kNbbp;
  NbbpConfig nbbp;      // settings for the message-passing detector
  int est_iters = 2;    // estimation-detection rounds (1 = pilot-only)
  bool perfect_csi = false;
};

// Detects the K transmitted symbols of one channel use under the given
// channel estimate; the exact call used inside iterative_receive, exposed so
// perfect-CSI equivalence is testable against direct detection.
std::vector<std::uint16_t> detect_use(const ComplexChannel& channel_est,
                                      const std::complex<double>* y,
                                      double noise_var, const QamMapper& mapper,
                                      const ReceiveConfig& cfg);

struct ReceiveResult {
  std::vector<std::uint16_t> decisions;  // l*K uses x K users, use-major
  std::vector<double> mse_trace;  // MSE of the estimate used in each pass
                                  // (empty under perfect CSI)
  ComplexChannel estimate;        // last estimate used (the true channel
                                  // under perfect CSI)
};

// Pilot estimate -> detect all data blocks -> refine from the detections ->
// re-detect, for est_iters detection passes in total.
ReceiveResult iterative_receive(const Frame& frame, const FrameObservation& obs,
                                const ReceiveConfig& cfg);

}  // namespace nbmimo::chanest

#endif
