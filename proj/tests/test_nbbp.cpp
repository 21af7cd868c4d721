/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nbmimo/channel.hpp"
#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/mathutil.hpp"
#include "nbmimo/nbbp.hpp"

using namespace nbmimo;

namespace {

RealSystem random_instance(int n, int k, unsigned m, double snr_db, std::uint64_t seed,
                           std::vector<std::uint16_t>* tx = nullptr) {
  Rng rng(seed);
  QamMapper map = QamMapper::make(m);
  ComplexChannel c = draw_channel(n, k, std::vector<double>(k, 1.0), rng);
  std::vector<std::complex<double>> x(k);
  std::vector<std::uint16_t> syms(k);
  for (int j = 0; j < k; ++j) {
    syms[j] = (std::uint16_t)rng.below(m);
    x[j] = map.map(syms[j]);
  }
  if (tx) *tx = syms;
  const double nv = noise_variance(snr_db, map.pam.symbol_energy, (double)k);
  return assemble_system(c, x, nv, rng);
}

}  // namespace

TEST_CASE("fast_exp matches std::exp") {
  for (double x = -80.0; x <= 80.0; x += 0.00917) {
    const double a = fast_exp(x), b = std::exp(x);
    REQUIRE(std::abs(a - b) <= 4e-12 * b);
  }
  CHECK(fast_exp(-800.0) == 0.0);
  CHECK(fast_exp(0.0) == 1.0);
}

TEST_CASE("messages stay normalized through the schedule") {
  RealSystem sys = random_instance(4, 3, 16, 8.0, 42);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  cfg.iterations = 10;
  NbbpDetector det(sys, pam.levels, cfg);
  det.init_messages();
  const int S = det.side();
  for (double v : det.v()) CHECK(v == doctest::Approx(1.0 / S));
  for (int it = 0; it < 10; ++it) {
    det.iterate();
    const auto& v = det.v();
    for (int e = 0; e < det.n2() * det.k2(); ++e) {
      double sum = 0.0;
      for (int s = 0; s < S; ++s) {
        REQUIRE(v[(std::size_t)e * S + s] >= 0.0);
        sum += v[(std::size_t)e * S + s];
      }
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  auto post = det.posteriors();
  for (int j = 0; j < det.k2(); ++j) {
    double sum = 0.0;
    for (int s = 0; s < S; ++s) sum += post.row(j)[s];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("node moments match the full-sum formulas") {
  RealSystem sys = random_instance(4, 3, 16, 10.0, 7);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  NbbpDetector det(sys, pam.levels, cfg);
  det.init_messages();
  det.iterate();
  det.iterate();
  det.node_moments();
  const auto& v = det.v();
  const int S = det.side();
  for (int i = 0; i < det.n2(); ++i) {
    double mu = 0.0, var = sys.noise_var;
    for (int j = 0; j < det.k2(); ++j) {
      const double hij = sys.hat(i, j);
      double m1 = 0.0, m2 = 0.0;
      for (int s = 0; s < S; ++s) {
        const double p = v[((std::size_t)i * det.k2() + j) * S + s];
        m1 += pam.levels[s] * p;
        m2 += pam.levels[s] * pam.levels[s] * p;
      }
      mu += hij * m1;
      var += hij * hij * (m2 - m1 * m1);
      CHECK(det.edge_mean(i, j) == doctest::Approx(m1).epsilon(1e-12));
    }
    CHECK(det.node_mean(i) == doctest::Approx(mu).epsilon(1e-11));
    CHECK(det.node_var(i) == doctest::Approx(var).epsilon(1e-11));
  }
}

TEST_CASE("leave-one-out consistency") {
  RealSystem sys = random_instance(5, 4, 16, 9.0, 13);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  NbbpDetector det(sys, pam.levels, cfg);
  det.init_messages();
  for (int it = 0; it < 3; ++it) det.iterate();
  det.node_moments();
  for (int i = 0; i < det.n2(); ++i)
    for (int j = 0; j < det.k2(); ++j) {
      const double mu_ij = det.node_mean(i) - sys.hat(i, j) * det.edge_mean(i, j);
      CHECK(det.leave_one_out_mean(i, j) == doctest::Approx(mu_ij).epsilon(1e-9));
      // The leave-one-out variance never exceeds the full-sum variance and
      // keeps the single noise term.
      CHECK(det.leave_one_out_var(i, j) <= det.node_var(i) + 1e-12);
      CHECK(det.leave_one_out_var(i, j) >= sys.noise_var - 1e-9);
    }
}

TEST_CASE("observation messages follow the Gaussian likelihood differences") {
  RealSystem sys = random_instance(4, 3, 16, 10.0, 21);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  NbbpDetector det(sys, pam.levels, cfg);
  det.init_messages();
  det.node_moments();
  det.observation_update();
  const int S = det.side();
  const auto& la = det.log_a();
  for (int i = 0; i < det.n2(); ++i)
    for (int j = 0; j < det.k2(); ++j) {
      const double mu_ij = det.leave_one_out_mean(i, j);
      const double var_ij = std::max(det.leave_one_out_var(i, j), std::max(sys.noise_var, 1e-12));
      for (int s = 1; s < S; ++s) {
        const double r0 = sys.y[i] - mu_ij - sys.hat(i, j) * pam.levels[0];
        const double rs = sys.y[i] - mu_ij - sys.hat(i, j) * pam.levels[s];
        const double expect = -(rs * rs - r0 * r0) / (2.0 * var_ij);
        const std::size_t base = ((std::size_t)i * det.k2() + j) * S;
        CHECK(la[base + s] - la[base + 0] == doctest::Approx(expect).epsilon(1e-9));
      }
    }
}

TEST_CASE("equal columns receive equal observation messages") {
  RealSystem sys;
  sys.n2 = 2;
  sys.k2 = 2;
  sys.h = {0.8, 0.8, -1.3, -1.3};
  sys.x = {1, 1};
  sys.y = {0.4, -2.0};
  sys.noise_var = 1.0;
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  NbbpDetector det(sys, pam.levels, cfg);
  det.init_messages();
  for (int it = 0; it < 5; ++it) {
    det.iterate();
    const auto& la = det.log_a();
    for (int i = 0; i < 2; ++i)
      for (int s = 0; s < det.side(); ++s)
        REQUIRE(la[((std::size_t)i * 2 + 0) * det.side() + s] ==
                doctest::Approx(la[((std::size_t)i * 2 + 1) * det.side() + s]).epsilon(1e-12));
  }
}

TEST_CASE("divide-out path equals the direct leave-one-out product") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    RealSystem sys = random_instance(6, 4, 16, 12.0, seed);
    PamAlphabet pam = PamAlphabet::make(16);
    NbbpConfig a;
    a.iterations = 3;
    a.damping = 0.0;
    NbbpConfig b = a;
    b.force_direct = true;
    NbbpDetector da(sys, pam.levels, a), db(sys, pam.levels, b);
    da.run();
    db.run();
    for (std::size_t t = 0; t < da.v().size(); ++t)
      REQUIRE(da.v()[t] == doctest::Approx(db.v()[t]).epsilon(1e-8));
  }
}

TEST_CASE("damping is the stated convex combination") {
  RealSystem sys = random_instance(4, 3, 16, 8.0, 31);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig c0;
  c0.damping = 0.0;
  NbbpConfig c5;
  c5.damping = 0.5;
  NbbpDetector d0(sys, pam.levels, c0), d5(sys, pam.levels, c5);
  d0.init_messages();
  d5.init_messages();
  d0.iterate();
  d5.iterate();
  const int S = d0.side();
  const double u = 1.0 / S;
  for (std::size_t t = 0; t < d0.v().size(); ++t) {
    const double expct = 0.5 * d0.v()[t] + 0.5 * u;
    REQUIRE(d5.v()[t] == doctest::Approx(expct).epsilon(1e-12));
    REQUIRE(d5.v()[t] >= std::min(d0.v()[t], u) - 1e-15);
    REQUIRE(d5.v()[t] <= std::max(d0.v()[t], u) + 1e-15);
  }
}

TEST_CASE("single-rail awgn reduces to scalar demapping") {
  // 1x1 complex channel with h = 1: the real system is the identity and each
  // rail is a clean PAM-over-AWGN observation.
  PamAlphabet pam = PamAlphabet::make(4);
  RealSystem sys;
  sys.n2 = 2;
  sys.k2 = 2;
  sys.h = {1, 0, 0, 1};
  sys.x = {1, -1};
  sys.noise_var = 0.5;
  sys.y = {0.7, -0.2};
  NbbpConfig cfg;
  cfg.iterations = 2;
  NbbpDetector det(sys, pam.levels, cfg);
  det.run();
  auto post = det.posteriors();
  for (int j = 0; j < 2; ++j) {
    double w[2], z = 0.0;
    for (int s = 0; s < 2; ++s) {
      const double r = sys.y[j] - pam.levels[s];
      w[s] = std::exp(-r * r / (2.0 * sys.noise_var));
      z += w[s];
    }
    for (int s = 0; s < 2; ++s)
      CHECK(post.row(j)[s] == doctest::Approx(w[s] / z).epsilon(1e-9));
  }
}

TEST_CASE("posterior argmax matches exact map marginals on small instances") {
  // Exhaustive-enumeration oracle over all 2^(2K) hypotheses at M=4.
  const int k = 2, n = 3;
  const unsigned m = 4;
  PamAlphabet pam = PamAlphabet::make(m);
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    RealSystem sys = random_instance(n, k, m, 15.0, 1000 + seed);
    NbbpConfig cfg;
    NbbpDetector det(sys, pam.levels, cfg);
    det.run();
    auto dec = hard_decisions(det.posteriors());

    const int k2 = sys.k2, n2 = sys.n2;
    std::vector<double> marg((std::size_t)k2 * 2, 0.0);
    for (unsigned mask = 0; mask < (1u << k2); ++mask) {
      double dist = 0.0;
      for (int i = 0; i < n2; ++i) {
        double acc = sys.y[i];
        for (int j = 0; j < k2; ++j)
          acc -= sys.hat(i, j) * pam.levels[(mask >> j) & 1];
        dist += acc * acc;
      }
      const double w = std::exp(-dist / (2.0 * sys.noise_var));
      for (int j = 0; j < k2; ++j) marg[(std::size_t)j * 2 + ((mask >> j) & 1)] += w;
    }
    for (int j = 0; j < k2; ++j) {
      const int map_idx = marg[(std::size_t)j * 2 + 1] > marg[(std::size_t)j * 2] ? 1 : 0;
      agree += (dec[j] == map_idx);
      ++total;
    }
  }
  CHECK((double)agree / total >= 0.95);
}

TEST_CASE("negating one column flips that rail's posterior") {
  RealSystem sys = random_instance(4, 3, 16, 10.0, 77);
  const int jneg = 2;
  RealSystem neg = sys;
  for (int i = 0; i < sys.n2; ++i) neg.h[(std::size_t)i * sys.k2 + jneg] *= -1.0;
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  cfg.iterations = 5;
  NbbpDetector da(sys, pam.levels, cfg), db(neg, pam.levels, cfg);
  da.run();
  db.run();
  auto pa = da.posteriors(), pb = db.posteriors();
  const int S = da.side();
  for (int j = 0; j < sys.k2; ++j)
    for (int s = 0; s < S; ++s) {
      const double expect = (j == jneg) ? pa.row(j)[S - 1 - s] : pa.row(j)[s];
      REQUIRE(pb.row(j)[s] == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("variance floor engages at zero noise without producing non-finite output") {
  // Identity channel with zero noise: the leave-one-out variance of the only
  // contributing column is exactly zero, so the floor must fire immediately.
  PamAlphabet pam = PamAlphabet::make(16);
  RealSystem sys;
  sys.n2 = 2;
  sys.k2 = 2;
  sys.h = {1, 0, 0, 1};
  sys.x = {3, -1};
  sys.y = {3, -1};
  sys.noise_var = 0.0;
  NbbpConfig cfg;
  cfg.iterations = 15;
  NbbpDetector det(sys, pam.levels, cfg);
  det.run();
  CHECK(det.diagnostics().clamped_edges > 0);
  auto post = det.posteriors();
  for (double p : post.p) REQUIRE(std::isfinite(p));
  for (int j = 0; j < det.k2(); ++j) {
    double sum = std::accumulate(post.row(j), post.row(j) + det.side(), 0.0);
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("operation counts") {
  auto est = op_count_estimate(64, 64, 16);
  CHECK(est.mu_per_node == doctest::Approx((1 + 4 * 64) * 4 - 1));  // 1027
  RealSystem sys = random_instance(8, 8, 16, 10.0, 9);
  NbbpConfig cfg;
  cfg.iterations = 7;
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpDetector det(sys, pam.levels, cfg);
  det.run();
  const auto& d = det.diagnostics();
  auto e8 = op_count_estimate(8, 8, 16);
  CHECK(d.iterations_run == 7);
  CHECK((double)(d.op_count - d.fallback_edges * det.n2() * det.side()) ==
        doctest::Approx(7.0 * e8.per_iteration));
}

TEST_CASE("frozen bit probability example") {
  PosteriorTable post;
  post.k2 = 1;
  post.side = 4;
  post.p = {0.1, 0.2, 0.3, 0.4};
  PamAlphabet pam = PamAlphabet::make(16);
  auto bp = bit_probabilities(post, pam);
  // Gray labels by level index: 0,1,3,2 -> bit0 on indices 1,2; bit1 on 2,3.
  CHECK(bp[0] == doctest::Approx(0.5));
  CHECK(bp[1] == doctest::Approx(0.7));
}

TEST_CASE("detection is deterministic for a fixed instance") {
  RealSystem sys = random_instance(4, 4, 16, 9.0, 1234);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig cfg;
  auto p1 = nbbp_detect(sys, pam, cfg);
  auto p2 = nbbp_detect(sys, pam, cfg);
  REQUIRE(p1.p == p2.p);
}

TEST_CASE("convergence stop matches the full run once messages settle") {
  RealSystem sys = random_instance(8, 4, 16, 14.0, 77);
  PamAlphabet pam = PamAlphabet::make(16);
  NbbpConfig full;
  full.iterations = 40;
  NbbpDiagnostics dfull;
  auto pf = nbbp_detect(sys, pam, full, &dfull);
  REQUIRE(dfull.iterations_run == 40);

  NbbpConfig stopped = full;
  stopped.convergence_tol = 1e-9;
  NbbpDiagnostics dstop;
  auto ps = nbbp_detect(sys, pam, stopped, &dstop);
  CHECK(dstop.iterations_run <= 40);
  // Stopping when messages move < 1e-9 leaves the posteriors equal to the
  // full run at the scale of the stopped motion.
  for (std::size_t i = 0; i < pf.p.size(); ++i)
    CHECK(ps.p[i] == doctest::Approx(pf.p[i]).epsilon(1e-6).scale(1.0));

  // Deterministic, and a zero tolerance reproduces the fixed schedule.
  NbbpDiagnostics dstop2;
  auto ps2 = nbbp_detect(sys, pam, stopped, &dstop2);
  CHECK(ps2.p == ps.p);
  CHECK(dstop2.iterations_run == dstop.iterations_run);
  NbbpConfig off = full;
  off.convergence_tol = 0.0;
  auto poff = nbbp_detect(sys, pam, off);
  CHECK(poff.p == pf.p);
}

TEST_CASE("configuration validation") {
  RealSystem sys = random_instance(2, 2, 4, 10.0, 1);
  PamAlphabet pam = PamAlphabet::make(4);
  NbbpConfig bad;
  bad.iterations = 0;
  CHECK_THROWS_AS(NbbpDetector(sys, pam.levels, bad), ConfigError);
  bad.iterations = 1;
  bad.damping = 1.0;
  CHECK_THROWS_AS(NbbpDetector(sys, pam.levels, bad), ConfigError);
  NbbpConfig pri;
  std::vector<double> wrong(3, 0.5);
  pri.priors = &wrong;
  CHECK_THROWS_AS(NbbpDetector(sys, pam.levels, pri), ConfigError);
}
