/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/nbbp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nbmimo/common.hpp"
#include "nbmimo/mathutil.hpp"

namespace nbmimo {

namespace {
constexpr int kMaxSide = 256;
// Messages below exp(kLogTiny) ~ 1e-30 make the divide-out path unreliable.
constexpr double kLogTiny = -69.077552789821368;
}  // namespace

NbbpDetector::NbbpDetector(const RealSystem& sys, const std::vector<double>& levels,
                           const NbbpConfig& cfg)
    : n2_(sys.n2),
      k2_(sys.k2),
      side_((int)levels.size()),
      sigma2_(sys.noise_var),
      cfg_(cfg),
      h_(sys.h.data()),
      y_(sys.y.data()),
      levels_(levels) {
  if (side_ < 2 || side_ > kMaxSide) throw ConfigError("alphabet size out of range");
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (cfg.damping < 0.0 || cfg.damping >= 1.0) throw ConfigError("damping must be in [0,1)");
  var_floor_ = std::max(sigma2_, 1e-12);

  const std::size_t edges = (std::size_t)n2_ * k2_;
  lev2_.resize(side_);
  for (int s = 0; s < side_; ++s) lev2_[s] = levels_[s] * levels_[s];
  h2_.resize(edges);
  hs_.resize(edges * side_);
  for (std::size_t e = 0; e < edges; ++e) {
    const double hij = h_[e];
    h2_[e] = hij * hij;
    for (int s = 0; s < side_; ++s) hs_[e * side_ + s] = hij * levels_[s];
  }
  v_.assign(edges * side_, 0.0);
  a_log_.assign(edges * side_, 0.0);
  m1_.assign(edges, 0.0);
  m2_.assign(edges, 0.0);
  node_mean_.assign(n2_, 0.0);
  node_var_.assign(n2_, 0.0);

  if (cfg.priors) {
    if ((int)cfg.priors->size() != k2_ * side_)
      throw ConfigError("prior table must be k2 x side");
    log_prior_.resize((std::size_t)k2_ * side_);
    for (std::size_t t = 0; t < log_prior_.size(); ++t)
      log_prior_[t] = std::log(std::max((*cfg.priors)[t], 1e-300));
  }
}

void NbbpDetector::init_messages() {
  const double u = 1.0 / side_;
  if (cfg_.priors) {
    const auto& pr = *cfg_.priors;
    for (int i = 0; i < n2_; ++i)
      for (int j = 0; j < k2_; ++j) {
        double* vv = &v_[((std::size_t)i * k2_ + j) * side_];
        double sum = 0.0;
        for (int s = 0; s < side_; ++s) sum += pr[(std::size_t)j * side_ + s];
        for (int s = 0; s < side_; ++s)
          vv[s] = sum > 0.0 ? pr[(std::size_t)j * side_ + s] / sum : u;
      }
  } else {
    std::fill(v_.begin(), v_.end(), u);
  }
  std::fill(a_log_.begin(), a_log_.end(), 0.0);
  diag_ = NbbpDiagnostics{};
}

void NbbpDetector::node_moments() {
  const int S = side_;
  double acc[kMaxSide];
  for (int i = 0; i < n2_; ++i) {
    const double* hrow = &h_[(std::size_t)i * k2_];
    const double* h2row = &h2_[(std::size_t)i * k2_];
    const double* vrow = &v_[((std::size_t)i * k2_) * S];
    for (int s = 0; s < S; ++s) acc[s] = 0.0;
    for (int j = 0; j < k2_; ++j) {
      const double hij = hrow[j];
      const double* vv = vrow + (std::size_t)j * S;
      for (int s = 0; s < S; ++s) acc[s] += hij * vv[s];
    }
    double mu = 0.0;
    for (int s = 0; s < S; ++s) mu += levels_[s] * acc[s];

    double var = sigma2_;
    double* m1row = &m1_[(std::size_t)i * k2_];
    double* m2row = &m2_[(std::size_t)i * k2_];
    for (int j = 0; j < k2_; ++j) {
      const double* vv = vrow + (std::size_t)j * S;
      double a = 0.0, b = 0.0;
      for (int s = 0; s < S; ++s) {
        a += levels_[s] * vv[s];
        b += lev2_[s] * vv[s];
      }
      m1row[j] = a;
      m2row[j] = b;
      var += h2row[j] * (b - a * a);
    }
    node_mean_[i] = mu;
    node_var_[i] = var;
  }
  // 2S mults/adds per column in the distributive pass, 2S for the mu dot
  // product, 4S + 4 per edge for moments and the variance term.
  diag_.op_count += (std::uint64_t)n2_ *
                    ((std::uint64_t)k2_ * 2 * S + 2 * S + (std::uint64_t)k2_ * (4 * S + 4));
}

void NbbpDetector::observation_update() {
  const int S = side_;
  for (int i = 0; i < n2_; ++i) {
    const double yi = y_[i];
    const double mu_i = node_mean_[i];
    const double var_i = node_var_[i];
    const double* hrow = &h_[(std::size_t)i * k2_];
    const double* h2row = &h2_[(std::size_t)i * k2_];
    const double* m1row = &m1_[(std::size_t)i * k2_];
    const double* m2row = &m2_[(std::size_t)i * k2_];
    for (int j = 0; j < k2_; ++j) {
      const double m1 = m1row[j];
      const double mu_ij = mu_i - hrow[j] * m1;
      double var_ij = var_i - h2row[j] * (m2row[j] - m1 * m1);
      if (var_ij < var_floor_) {
        var_ij = var_floor_;
        ++diag_.clamped_edges;
      }
      const double inv2 = 0.5 / var_ij;
      const double d = yi - mu_ij;
      const double* hs = &hs_[((std::size_t)i * k2_ + j) * S];
      double* la = &a_log_[((std::size_t)i * k2_ + j) * S];
      double best = -1e300;
      for (int s = 0; s < S; ++s) {
        const double r = d - hs[s];
        const double t = -(r * r) * inv2;
        la[s] = t;
        if (t > best) best = t;
      }
      for (int s = 0; s < S; ++s) la[s] -= best;
    }
  }
  // Per edge: leave-one-out mean/var (6), one division, 3S for the residual
  // quadratics and the normalization subtraction.
  diag_.op_count += (std::uint64_t)n2_ * k2_ * (3 * S + 7);
}

void NbbpDetector::variable_update() {
  const int S = side_;
  const double dmp = cfg_.damping, omd = 1.0 - dmp;
  double L[kMaxSide], t[kMaxSide], e[kMaxSide];
  std::uint64_t fallbacks = 0;
  for (int j = 0; j < k2_; ++j) {
    for (int s = 0; s < S; ++s) L[s] = 0.0;
    for (int i = 0; i < n2_; ++i) {
      const double* la = &a_log_[((std::size_t)i * k2_ + j) * S];
      for (int s = 0; s < S; ++s) L[s] += la[s];
    }
    const double* lp = log_prior_.empty() ? nullptr : &log_prior_[(std::size_t)j * S];
    if (lp)
      for (int s = 0; s < S; ++s) L[s] += lp[s];

    for (int i = 0; i < n2_; ++i) {
      double* la = &a_log_[((std::size_t)i * k2_ + j) * S];
      bool direct = cfg_.force_direct;
      if (!direct)
        for (int s = 0; s < S; ++s)
          if (la[s] < kLogTiny) {
            direct = true;
            break;
          }
      if (direct) {
        ++fallbacks;
        for (int s = 0; s < S; ++s) t[s] = lp ? lp[s] : 0.0;
        for (int l = 0; l < n2_; ++l) {
          if (l == i) continue;
          const double* lb = &a_log_[((std::size_t)l * k2_ + j) * S];
          for (int s = 0; s < S; ++s) t[s] += lb[s];
        }
      } else {
        for (int s = 0; s < S; ++s) t[s] = L[s] - la[s];
      }
      double tm = t[0];
      for (int s = 1; s < S; ++s) tm = std::max(tm, t[s]);
      double z = 0.0;
      for (int s = 0; s < S; ++s) {
        e[s] = fast_exp(t[s] - tm);
        z += e[s];
      }
      const double invz = 1.0 / z;
      double* vv = &v_[((std::size_t)i * k2_ + j) * S];
      double zd = 0.0;
      for (int s = 0; s < S; ++s) {
        const double d = omd * (e[s] * invz) + dmp * vv[s];
        e[s] = d;
        zd += d;
      }
      const double invzd = 1.0 / zd;
      for (int s = 0; s < S; ++s) vv[s] = e[s] * invzd;
    }
  }
  diag_.fallback_edges += cfg_.force_direct ? 0 : fallbacks;
  // Column sums (S per edge) plus per-edge softmax/damp/renormalize (~9S+2);
  // each direct fallback rereads the whole column.
  diag_.op_count += (std::uint64_t)k2_ * n2_ * (10 * S + 2) + fallbacks * (std::uint64_t)n2_ * S;
}

void NbbpDetector::iterate() {
  node_moments();
  observation_update();
  variable_update();
  ++diag_.iterations_run;
}

void NbbpDetector::run() {
  init_messages();
  if (cfg_.convergence_tol > 0.0) {
    std::vector<double> prev;
    for (int m = 0; m < cfg_.iterations; ++m) {
      prev = v_;
      iterate();
      double delta = 0.0;
      for (std::size_t t = 0; t < v_.size(); ++t)
        delta = std::max(delta, std::abs(v_[t] - prev[t]));
      if (delta < cfg_.convergence_tol) break;
    }
  } else {
    for (int m = 0; m < cfg_.iterations; ++m) iterate();
  }
}

PosteriorTable NbbpDetector::posteriors() const {
  const int S = side_;
  PosteriorTable post;
  post.k2 = k2_;
  post.side = S;
  post.p.resize((std::size_t)k2_ * S);
  double L[kMaxSide];
  for (int j = 0; j < k2_; ++j) {
    for (int s = 0; s < S; ++s) L[s] = 0.0;
    for (int i = 0; i < n2_; ++i) {
      const double* la = &a_log_[((std::size_t)i * k2_ + j) * S];
      for (int s = 0; s < S; ++s) L[s] += la[s];
    }
    double tm = L[0];
    for (int s = 1; s < S; ++s) tm = std::max(tm, L[s]);
    double z = 0.0;
    double* row = &post.p[(std::size_t)j * S];
    for (int s = 0; s < S; ++s) {
      row[s] = fast_exp(L[s] - tm);
      z += row[s];
    }
    for (int s = 0; s < S; ++s) row[s] /= z;
  }
  return post;
}

double NbbpDetector::leave_one_out_mean(int i, int j) const {
  return node_mean_[i] - h_[(std::size_t)i * k2_ + j] * m1_[(std::size_t)i * k2_ + j];
}

double NbbpDetector::leave_one_out_var(int i, int j) const {
  const std::size_t e = (std::size_t)i * k2_ + j;
  return node_var_[i] - h2_[e] * (m2_[e] - m1_[e] * m1_[e]);
}

PosteriorTable nbbp_detect(const RealSystem& sys, const PamAlphabet& pam,
                           const NbbpConfig& cfg, NbbpDiagnostics* diag) {
  NbbpDetector det(sys, pam.levels, cfg);
  det.run();
  if (diag) *diag = det.diagnostics();
  return det.posteriors();
}

std::vector<double> bit_probabilities(const PosteriorTable& post, const PamAlphabet& pam) {
  const unsigned B = pam.bits_per_rail;
  std::vector<double> out((std::size_t)post.k2 * B, 0.0);
  for (int j = 0; j < post.k2; ++j) {
    const double* row = post.row(j);
    for (int idx = 0; idx < post.side; ++idx) {
      const unsigned lab = pam.label((unsigned)idx);
      for (unsigned p = 0; p < B; ++p)
        if (lab & (1u << p)) out[(std::size_t)j * B + p] += row[idx];
    }
  }
  return out;
}

std::vector<int> hard_decisions(const PosteriorTable& post) {
  std::vector<int> out(post.k2);
  for (int j = 0; j < post.k2; ++j) {
    const double* row = post.row(j);
    int best = 0;
    for (int s = 1; s < post.side; ++s)
      if (row[s] > row[best]) best = s;
    out[j] = best;
  }
  return out;
}

OpCountEstimate op_count_estimate(int n_ant, int k_users, unsigned m) {
  const double S = std::sqrt((double)m);
  const double n2 = 2.0 * n_ant, k2 = 2.0 * k_users;
  OpCountEstimate e;
  e.mu_per_node = (1.0 + 4.0 * k_users) * S - 1.0;
  e.per_iteration = n2 * (k2 * 2 * S + 2 * S + k2 * (4 * S + 4))  // node moments
                    + n2 * k2 * (3 * S + 7)                       // observation update
                    + k2 * n2 * (10 * S + 2);                     // variable update
  return e;
}

}  // namespace nbmimo
