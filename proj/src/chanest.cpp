/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/chanest.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "nbmimo/common.hpp"

namespace nbmimo::chanest {
namespace {

using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;
using CMap = Eigen::Map<const CMat>;

ComplexChannel estimate_from(const CMat& y, const CMat& x, double noise_var,
                             const std::vector<double>& prior_var,
                             bool throw_on_deficiency) {
  const int n = (int)y.rows();
  const int k = (int)x.rows();
  if (y.cols() != x.cols()) throw ConfigError("chanest: Y and X column mismatch");
  if ((int)prior_var.size() != k)
    throw ConfigError("chanest: prior_var must have one entry per user");
  for (double v : prior_var)
    if (!(v > 0.0)) throw ConfigError("chanest: prior variances must be positive");
  if (noise_var < 0.0) throw ConfigError("chanest: negative noise variance");

  CMat gram = x * x.adjoint();
  if (noise_var == 0.0) {
    // No regularizer: the solve is only defined for a full-rank regressor.
    Eigen::ColPivHouseholderQR<CMat> qr(x.transpose());
    if (qr.rank() < k) {
      if (throw_on_deficiency)
        throw ConfigError("chanest: rank-deficient pilot matrix");
      ComplexChannel fail;
      fail.n = -1;  // sentinel consumed by refine_estimate's fallback
      return fail;
    }
  } else {
    const double n0 = 2.0 * noise_var;  // complex noise variance
    for (int j = 0; j < k; ++j) gram(j, j) += n0 / prior_var[j];
  }

  CMat rhs = y * x.adjoint();  // n x k
  ComplexChannel est;
  est.n = n;
  est.k = k;
  est.user_var = prior_var;
  est.h.resize((std::size_t)n * k);
  // Solve H * gram = rhs row by row: gram^T * H^T = rhs^T.
  const CMat ht = gram.transpose().partialPivLu().solve(rhs.transpose());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) est.at(i, j) = ht(j, i);
  return est;
}

}  // namespace

std::vector<std::complex<double>> dft_pilots(int k, double symbol_energy) {
  if (k < 1) throw ConfigError("chanest: pilot size must be >= 1");
  std::vector<std::complex<double>> p((std::size_t)k * k);
  const double amp = std::sqrt(symbol_energy);
  const double step = -2.0 * std::numbers::pi / k;
  for (int t = 0; t < k; ++t)
    for (int u = 0; u < k; ++u) {
      const double ph = step * (double)u * (double)t;
      p[(std::size_t)t * k + u] = {amp * std::cos(ph), amp * std::sin(ph)};
    }
  return p;
}

Frame make_frame(int n, int k, int l, unsigned qam_order,
                 const std::vector<double>& user_var, Rng& rng) {
  if (n < 1 || k < 1) throw ConfigError("chanest: frame needs n, k >= 1");
  if (l < 1) throw ConfigError("chanest: frame needs at least one data block");
  Frame f;
  f.channel = draw_channel(n, k, user_var, rng);
  f.l = l;
  f.qam_order = qam_order;
  const PamAlphabet pam = PamAlphabet::make(qam_order);
  f.pilots = dft_pilots(k, pam.symbol_energy);
  f.data.resize((std::size_t)l * k * k);
  for (auto& s : f.data) s = (std::uint16_t)rng.below(qam_order);
  return f;
}

FrameObservation transmit(const Frame& frame, double noise_var, Rng& rng) {
  if (noise_var < 0.0) throw ConfigError("chanest: negative noise variance");
  const int n = frame.channel.n, k = frame.channel.k;
  const QamMapper mapper = QamMapper::make(frame.qam_order);
  FrameObservation obs;
  obs.n = n;
  obs.k = k;
  obs.l = frame.l;
  obs.noise_var = noise_var;
  const double sd = std::sqrt(noise_var);

  const auto receive = [&](const std::complex<double>* x, std::complex<double>* y) {
    for (int i = 0; i < n; ++i) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < k; ++j) acc += frame.channel.at(i, j) * x[j];
      y[i] = acc + std::complex<double>(sd * rng.gaussian(), sd * rng.gaussian());
    }
  };

  obs.y_pilot.resize((std::size_t)n * k);
  for (int t = 0; t < k; ++t)
    receive(&frame.pilots[(std::size_t)t * k], &obs.y_pilot[(std::size_t)t * n]);

  const int uses = frame.l * k;
  obs.y_data.resize((std::size_t)uses * n);
  std::vector<std::complex<double>> x(k);
  for (int t = 0; t < uses; ++t) {
    for (int j = 0; j < k; ++j) x[j] = mapper.map(frame.data[(std::size_t)t * k + j]);
    receive(x.data(), &obs.y_data[(std::size_t)t * n]);
  }
  return obs;
}

ComplexChannel mmse_estimate(const std::vector<std::complex<double>>& y,
                             const std::vector<std::complex<double>>& x,
                             int n, int k, double noise_var,
                             const std::vector<double>& prior_var) {
  if (n < 1 || k < 1) throw ConfigError("chanest: estimator needs n, k >= 1");
  if (x.size() % k != 0 || x.empty())
    throw ConfigError("chanest: pilot matrix size must be a multiple of k");
  const int uses = (int)(x.size() / k);
  if ((int)y.size() != n * uses)
    throw ConfigError("chanest: observation size must be n x uses");
  return estimate_from(CMap(y.data(), n, uses), CMap(x.data(), k, uses),
                       noise_var, prior_var, /*throw_on_deficiency=*/true);
}

ComplexChannel refine_estimate(const FrameObservation& obs,
                               const std::vector<std::complex<double>>& x_pilot,
                               const std::vector<std::complex<double>>& detected,
                               double noise_var,
                               const std::vector<double>& prior_var) {
  const int n = obs.n, k = obs.k;
  const int data_uses = obs.l * k;
  if ((int)x_pilot.size() != k * k)
    throw ConfigError("chanest: pilot matrix must be k x k");
  if ((int)detected.size() != data_uses * k)
    throw ConfigError("chanest: detected data must cover every data block");
  const int uses = k + data_uses;
  CMat y(n, uses), x(k, uses);
  for (int t = 0; t < k; ++t)
    for (int i = 0; i < n; ++i) y(i, t) = obs.y_pilot[(std::size_t)t * n + i];
  for (int t = 0; t < data_uses; ++t)
    for (int i = 0; i < n; ++i)
      y(i, k + t) = obs.y_data[(std::size_t)t * n + i];
  for (int t = 0; t < k; ++t)
    for (int u = 0; u < k; ++u) x(u, t) = x_pilot[(std::size_t)t * k + u];
  for (int t = 0; t < data_uses; ++t)
    for (int u = 0; u < k; ++u) x(u, k + t) = detected[(std::size_t)t * k + u];

  const ComplexChannel est =
      estimate_from(y, x, noise_var, prior_var, /*throw_on_deficiency=*/false);
  if (est.n < 0)
    return mmse_estimate(obs.y_pilot, x_pilot, n, k, noise_var, prior_var);
  return est;
}

double channel_mse(const ComplexChannel& estimate, const ComplexChannel& truth) {
  if (estimate.n != truth.n || estimate.k != truth.k)
    throw ConfigError("chanest: MSE of mismatched channel dimensions");
  double acc = 0.0;
  for (std::size_t t = 0; t < truth.h.size(); ++t)
    acc += std::norm(estimate.h[t] - truth.h[t]);
  return acc / (double)truth.h.size();
}

std::vector<std::uint16_t> detect_use(const ComplexChannel& channel_est,
                                      const std::complex<double>* y,
                                      double noise_var, const QamMapper& mapper,
                                      const ReceiveConfig& cfg) {
  const int n = channel_est.n, k = channel_est.k;
  RealSystem sys;
  sys.n2 = 2 * n;
  sys.k2 = 2 * k;
  sys.h = realify(channel_est);
  sys.x.assign(sys.k2, 0.0);  // unknown to the receiver
  sys.y.resize(sys.n2);
  for (int i = 0; i < n; ++i) {
    sys.y[i] = y[i].real();
    sys.y[n + i] = y[i].imag();
  }
  sys.noise_var = noise_var;

  std::vector<int> rails;
  if (cfg.detector == DetectorKind::kNbbp) {
    const PosteriorTable post = nbbp_detect(sys, mapper.pam, cfg.nbbp);
    rails = hard_decisions(post);
  } else {
    const LinearKind kind = cfg.detector == DetectorKind::kMf  ? LinearKind::MF
                            : cfg.detector == DetectorKind::kZf ? LinearKind::ZF
                                                                : LinearKind::MMSE;
    rails = linear_detect(kind, sys, mapper.pam).decisions;
  }
  std::vector<std::uint16_t> out(k);
  for (int u = 0; u < k; ++u)
    out[u] = mapper.symbol_of_indices((unsigned)rails[u], (unsigned)rails[k + u]);
  return out;
}

ReceiveResult iterative_receive(const Frame& frame, const FrameObservation& obs,
                                const ReceiveConfig& cfg) {
  if (cfg.est_iters < 1)
    throw ConfigError("chanest: est_iters must be >= 1");
  const int n = frame.channel.n, k = frame.channel.k;
  if (obs.n != n || obs.k != k || obs.l != frame.l)
    throw ConfigError("chanest: observation does not match the frame");
  const QamMapper mapper = QamMapper::make(frame.qam_order);
  const int data_uses = frame.l * k;

  ReceiveResult res;
  ComplexChannel est =
      cfg.perfect_csi
          ? frame.channel
          : mmse_estimate(obs.y_pilot, frame.pilots, n, k, obs.noise_var,
                          frame.channel.user_var);
  std::vector<std::complex<double>> detected_x((std::size_t)data_uses * k);
  for (int pass = 0; pass < cfg.est_iters; ++pass) {
    if (!cfg.perfect_csi) res.mse_trace.push_back(channel_mse(est, frame.channel));
    res.decisions.assign((std::size_t)data_uses * k, 0);
    for (int t = 0; t < data_uses; ++t) {
      const auto syms = detect_use(est, &obs.y_data[(std::size_t)t * n],
                                   obs.noise_var, mapper, cfg);
      for (int u = 0; u < k; ++u) res.decisions[(std::size_t)t * k + u] = syms[u];
    }
    if (cfg.perfect_csi || pass + 1 >= cfg.est_iters) break;
    for (int t = 0; t < data_uses; ++t)
      for (int u = 0; u < k; ++u)
        detected_x[(std::size_t)t * k + u] =
            mapper.map(res.decisions[(std::size_t)t * k + u]);
    est = refine_estimate(obs, frame.pilots, detected_x, obs.noise_var,
                          frame.channel.user_var);
  }
  res.estimate = std::move(est);
  return res;
}

}  // namespace nbmimo::chanest
