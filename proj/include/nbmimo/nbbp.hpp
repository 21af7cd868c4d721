/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_NBBP_HPP
#define NBMIMO_NBBP_HPP

#include <cstdint>
#include <vector>

#include "nbmimo/channel.hpp"
#include "nbmimo/constellation.hpp"

namespace nbmimo {

struct NbbpConfig {
  int iterations = 40;
  double damping = 0.2;  // fraction of the previous message kept
  // When > 0, run() stops once the largest per-entry change of the variable
  // messages in one iteration falls below this value.  Off by default so that
  // detection work is a fixed, data-independent function of the dimensions.
  double convergence_tol = 0.0;
  // Optional per-rail symbol priors, k2 x side row-major (linear domain).
  // Used by the turbo/EXIT path; detection treats them as a priori info and
  // excludes them from the extrinsic posterior.
  const std::vector<double>* priors = nullptr;
  // Test hook: compute every leave-one-out product directly instead of by
  // dividing out of the full product.
  bool force_direct = false;
};

struct NbbpDiagnostics {
  std::uint64_t op_count = 0;        // adds/mults/divs/exp actually executed
  std::uint64_t clamped_edges = 0;   // variance floor activations
  std::uint64_t fallback_edges = 0;  // direct leave-one-out recomputations
  int iterations_run = 0;
};

// Per-rail symbol posteriors, k2 x side row-major.
struct PosteriorTable {
  int k2 = 0;
  int side = 0;
  std::vector<double> p;
  const double* row(int j) const { return &p[(std::size_t)j * side]; }
};

// Gaussian-interference message-passing detector on the real system
// y = Hx + w with x drawn per rail from `levels`.  Messages are vectors over
// the rail alphabet; observation->variable messages are kept in log domain
// (per-edge max-normalized), variable->observation messages as probability
// vectors.  The public update steps allow schedule-level tests; detect() runs
// the full schedule.
class NbbpDetector {
 public:
  NbbpDetector(const RealSystem& sys, const std::vector<double>& levels,
               const NbbpConfig& cfg);

  void init_messages();
  // Full-sum node moments: mu_i by the per-level distributive accumulation
  // over columns, sigma_i^2 from per-edge means/variances plus the noise
  // variance.  Also refreshes the cached per-edge first/second moments.
  void node_moments();
  // Leave-one-out means/variances and the log-domain observation messages.
  void observation_update();
  // Leave-one-out products of observation messages (divide-out with direct
  // fallback), softmax, damping, renormalization.
  void variable_update();
  void iterate();
  void run();

  PosteriorTable posteriors() const;  // prior-free (extrinsic) combination

  int n2() const { return n2_; }
  int k2() const { return k2_; }
  int side() const { return side_; }
  const std::vector<double>& v() const { return v_; }          // [i][j][s]
  const std::vector<double>& log_a() const { return a_log_; }  // [i][j][s]
  double node_mean(int i) const { return node_mean_[i]; }
  double node_var(int i) const { return node_var_[i]; }
  double edge_mean(int i, int j) const { return m1_[(std::size_t)i * k2_ + j]; }
  double edge_second_moment(int i, int j) const { return m2_[(std::size_t)i * k2_ + j]; }
  double leave_one_out_mean(int i, int j) const;
  double leave_one_out_var(int i, int j) const;  // unclamped value
  const NbbpDiagnostics& diagnostics() const { return diag_; }

 private:
  int n2_, k2_, side_;
  double sigma2_, var_floor_;
  NbbpConfig cfg_;
  const double* h_;  // borrowed from the system (2N x 2K row-major)
  const double* y_;
  std::vector<double> levels_, lev2_;
  std::vector<double> h2_, hs_;       // h^2 per edge; h*level per edge per s
  std::vector<double> v_, a_log_;     // edge messages
  std::vector<double> m1_, m2_;       // per-edge moments of v
  std::vector<double> node_mean_, node_var_;
  std::vector<double> log_prior_;     // empty when no priors
  NbbpDiagnostics diag_;
};

// One-call detection.
PosteriorTable nbbp_detect(const RealSystem& sys, const PamAlphabet& pam,
                           const NbbpConfig& cfg, NbbpDiagnostics* diag = nullptr);

// Pr(label bit p == 1) for each rail, k2 x bits_per_rail row-major, using the
// per-rail Gray labels.
std::vector<double> bit_probabilities(const PosteriorTable& post, const PamAlphabet& pam);

// Argmax level index per rail.
std::vector<int> hard_decisions(const PosteriorTable& post);

// Analytic per-iteration operation counts (the model the complexity scenario
// plots next to instrumented counts).
struct OpCountEstimate {
  double mu_per_node;    // (1 + 4K)*sqrt(M) - 1
  double per_iteration;  // all three update phases
};
OpCountEstimate op_count_estimate(int n_ant, int k_users, unsigned m);

}  // namespace nbmimo

#endif
