/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nbmimo/bbp.hpp"
#include "nbmimo/channel.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/linear.hpp"

using namespace nbmimo;

namespace {

RealSystem random_instance(int n, int k, unsigned m, double snr_db, std::uint64_t seed) {
  Rng rng(seed);
  QamMapper map = QamMapper::make(m);
  ComplexChannel c = draw_channel(n, k, std::vector<double>(k, 1.0), rng);
  std::vector<std::complex<double>> x(k);
  for (int j = 0; j < k; ++j) x[j] = map.map((std::uint16_t)rng.below(m));
  const double nv = noise_variance(snr_db, map.pam.symbol_energy, (double)k);
  return assemble_system(c, x, nv, rng);
}

}  // namespace

TEST_CASE("all linear detectors recover the symbols through a scaled identity") {
  PamAlphabet pam = PamAlphabet::make(16);
  RealSystem sys;
  sys.n2 = 4;
  sys.k2 = 4;
  sys.h = {2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2};
  sys.x = {3, -1, 1, -3};
  sys.noise_var = 0.0;
  sys.y.resize(4);
  for (int i = 0; i < 4; ++i) sys.y[i] = 2.0 * sys.x[i];
  for (auto kind : {LinearKind::MF, LinearKind::ZF, LinearKind::MMSE}) {
    auto res = linear_detect(kind, sys, pam);
    REQUIRE(res.solver_ok);
    for (int j = 0; j < 4; ++j) {
      CHECK(res.estimate[j] == doctest::Approx(sys.x[j]).epsilon(1e-9));
      CHECK(pam.levels[res.decisions[j]] == sys.x[j]);
      CHECK(res.posterior.row(j)[res.decisions[j]] == 1.0);
    }
  }
}

TEST_CASE("matched filter on one column is the normalized projection") {
  PamAlphabet pam = PamAlphabet::make(4);
  RealSystem sys;
  sys.n2 = 2;
  sys.k2 = 1;
  sys.h = {1, 1};
  sys.x = {1};
  sys.y = {3, 5};
  sys.noise_var = 1.0;
  auto res = linear_detect(LinearKind::MF, sys, pam);
  CHECK(res.estimate[0] == doctest::Approx(4.0));  // (3+5)/2
}

TEST_CASE("zf equals an independent inverse route") {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  PamAlphabet pam = PamAlphabet::make(16);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RealSystem sys = random_instance(6, 4, 16, 12.0, seed);
    auto res = linear_detect(LinearKind::ZF, sys, pam);
    REQUIRE(res.solver_ok);
    Eigen::Map<const RowMat> h(sys.h.data(), sys.n2, sys.k2);
    Eigen::Map<const Eigen::VectorXd> y(sys.y.data(), sys.n2);
    Eigen::VectorXd oracle = h.colPivHouseholderQr().solve(y);  // LS == ZF for tall H
    for (int j = 0; j < sys.k2; ++j)
      CHECK(res.estimate[j] == doctest::Approx(oracle(j)).epsilon(1e-9));
  }
}

TEST_CASE("mmse equals the augmented least-squares oracle") {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  PamAlphabet pam = PamAlphabet::make(16);
  for (std::uint64_t seed : {10u, 11u, 12u, 13u}) {
    RealSystem sys = random_instance(5, 5, 16, 8.0, seed);
    auto res = linear_detect(LinearKind::MMSE, sys, pam);
    Eigen::Map<const RowMat> h(sys.h.data(), sys.n2, sys.k2);
    Eigen::Map<const Eigen::VectorXd> y(sys.y.data(), sys.n2);
    const double lam = std::sqrt(sys.noise_var / pam.rail_energy);
    Eigen::MatrixXd aug(sys.n2 + sys.k2, sys.k2);
    aug.topRows(sys.n2) = h;
    aug.bottomRows(sys.k2) = lam * Eigen::MatrixXd::Identity(sys.k2, sys.k2);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.n2 + sys.k2);
    rhs.head(sys.n2) = y;
    Eigen::VectorXd oracle = aug.colPivHouseholderQr().solve(rhs);
    for (int j = 0; j < sys.k2; ++j)
      REQUIRE(res.estimate[j] == doctest::Approx(oracle(j)).epsilon(1e-8));
  }
}

TEST_CASE("mmse approaches zf as noise vanishes") {
  PamAlphabet pam = PamAlphabet::make(16);
  RealSystem sys = random_instance(6, 3, 16, 10.0, 4);
  sys.noise_var = 1e-12;
  auto mmse = linear_detect(LinearKind::MMSE, sys, pam);
  auto zf = linear_detect(LinearKind::ZF, sys, pam);
  for (int j = 0; j < sys.k2; ++j)
    CHECK(mmse.estimate[j] == doctest::Approx(zf.estimate[j]).epsilon(1e-6));
}

TEST_CASE("zf flags singular systems instead of crashing") {
  PamAlphabet pam = PamAlphabet::make(16);
  RealSystem sys;
  sys.n2 = 4;
  sys.k2 = 2;
  sys.h = {1, 1, 2, 2, -1, -1, 0.5, 0.5};  // duplicate columns
  sys.x = {1, 1};
  sys.y = {1, 2, 3, 4};
  sys.noise_var = 1.0;
  auto res = linear_detect(LinearKind::ZF, sys, pam);
  CHECK(!res.solver_ok);
  CHECK((int)res.decisions.size() == 2);
}

TEST_CASE("mmse residuals are uncorrelated with the observation") {
  PamAlphabet pam = PamAlphabet::make(16);
  QamMapper map = QamMapper::make(16);
  const int n = 4, k = 2, trials = 20000;
  Rng rng(555);
  const double nv = noise_variance(10.0, map.pam.symbol_energy, (double)k);
  std::vector<double> acc((std::size_t)2 * k * 2 * n, 0.0), acc2(acc.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    ComplexChannel c = draw_channel(n, k, std::vector<double>(k, 1.0), rng);
    std::vector<std::complex<double>> x(k);
    for (int j = 0; j < k; ++j) x[j] = map.map((std::uint16_t)rng.below(16));
    RealSystem sys = assemble_system(c, x, nv, rng);
    auto res = linear_detect(LinearKind::MMSE, sys, pam);
    for (int j = 0; j < sys.k2; ++j)
      for (int i = 0; i < sys.n2; ++i) {
        const double p = (res.estimate[j] - sys.x[j]) * sys.y[i];
        acc[(std::size_t)j * sys.n2 + i] += p;
        acc2[(std::size_t)j * sys.n2 + i] += p * p;
      }
  }
  for (std::size_t t = 0; t < acc.size(); ++t) {
    const double mean = acc[t] / trials;
    const double var = acc2[t] / trials - mean * mean;
    const double stderr_ = std::sqrt(var / trials);
    REQUIRE(std::abs(mean) < 6.0 * stderr_ + 1e-12);
  }
}

TEST_CASE("antipodal bit decomposition round-trips") {
  for (unsigned B : {1u, 2u, 3u, 4u}) {
    const int side = 1 << B;
    for (int i = 0; i < side; ++i) {
      const double level = 2.0 * i - (side - 1);
      auto bits = antipodal_bits(level, B);
      double rec = 0.0;
      for (unsigned p = 0; p < B; ++p) rec += (double)(1u << p) * (bits[p] ? 1.0 : -1.0);
      REQUIRE(rec == level);
    }
  }
}

TEST_CASE("bit expansion uses powers of two per rail") {
  RealSystem sys = random_instance(3, 2, 16, 10.0, 77);
  RealSystem b = expand_bit_system(sys, 16);
  REQUIRE(b.k2 == sys.k2 * 2);
  for (int i = 0; i < sys.n2; ++i)
    for (int j = 0; j < sys.k2; ++j) {
      CHECK(b.h[(std::size_t)i * b.k2 + 2 * j] == sys.hat(i, j));
      CHECK(b.h[(std::size_t)i * b.k2 + 2 * j + 1] == 2.0 * sys.hat(i, j));
    }
  // Expanded transmit vector reproduces the rail levels.
  for (int j = 0; j < sys.k2; ++j)
    CHECK(b.x[2 * j] + 2.0 * b.x[2 * j + 1] == doctest::Approx(sys.x[j]));
}

TEST_CASE("bit-level bp at m=4 is numerically identical to the symbol detector") {
  PamAlphabet pam = PamAlphabet::make(4);
  for (std::uint64_t seed : {5u, 6u}) {
    RealSystem sys = random_instance(4, 3, 4, 20.0, seed);
    NbbpConfig cfg;
    NbbpDetector det(sys, pam.levels, cfg);
    det.run();
    auto post = det.posteriors();
    auto bbp = bbp_detect(sys, 4, cfg);
    for (int j = 0; j < sys.k2; ++j) {
      REQUIRE(bbp.p_plus[j] == post.row(j)[1]);
      REQUIRE(bbp.bits[j] == (post.row(j)[1] > post.row(j)[0] ? 1 : 0));
    }
  }
}

TEST_CASE("mmse operation count formula") {
  // 2K=128, 2N=128: gram + cholesky/3 + solves + matvec
  CHECK(mmse_op_count(64, 64) == 128ull * 128 * 128 + 128ull * 128 * 128 / 3 +
                                     2ull * 128 * 128 + 128ull * 128);
}
