/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <complex>

#include "nbmimo/channel.hpp"
#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"

using namespace nbmimo;

TEST_CASE("pam alphabet levels and energy") {
  PamAlphabet p = PamAlphabet::make(16);
  REQUIRE(p.side == 4);
  CHECK(p.levels == std::vector<double>{-3, -1, 1, 3});
  CHECK(p.rail_energy == doctest::Approx(5.0));
  CHECK(p.symbol_energy == doctest::Approx(10.0));

  PamAlphabet q = PamAlphabet::make(4);
  CHECK(q.levels == std::vector<double>{-1, 1});
  CHECK(q.rail_energy == doctest::Approx(1.0));

  PamAlphabet r = PamAlphabet::make(64);
  CHECK(r.levels.front() == -7);
  CHECK(r.levels.back() == 7);
  CHECK(r.rail_energy == doctest::Approx(21.0));

  // Zero mean for every supported order.
  for (unsigned m : {4u, 16u, 64u, 256u}) {
    PamAlphabet a = PamAlphabet::make(m);
    double mean = 0;
    for (double v : a.levels) mean += v;
    CHECK(mean == doctest::Approx(0.0));
  }

  CHECK_THROWS_AS(PamAlphabet::make(8), ConfigError);
  CHECK_THROWS_AS(PamAlphabet::make(3), ConfigError);
  CHECK_THROWS_AS(PamAlphabet::make(2), ConfigError);
}

TEST_CASE("gray labels differ in one bit between adjacent levels") {
  for (unsigned m : {4u, 16u, 64u, 256u}) {
    PamAlphabet p = PamAlphabet::make(m);
    for (unsigned i = 0; i + 1 < p.side; ++i)
      CHECK(std::popcount(p.label(i) ^ p.label(i + 1)) == 1);
    for (unsigned i = 0; i < p.side; ++i) CHECK(p.index_of_label(p.label(i)) == i);
  }
}

TEST_CASE("qam mapping is a bijection and slices back exactly") {
  for (unsigned m : {4u, 16u, 64u, 256u}) {
    QamMapper map = QamMapper::make(m);
    std::vector<std::complex<double>> pts;
    double energy = 0;
    for (unsigned c = 0; c < m; ++c) {
      auto z = map.map((std::uint16_t)c);
      energy += std::norm(z);
      for (auto& w : pts) REQUIRE(std::abs(w - z) > 0.5);
      pts.push_back(z);
      REQUIRE(map.slice(z) == c);
    }
    CHECK(energy / m == doctest::Approx(map.pam.symbol_energy));
  }
}

TEST_CASE("slicing picks the nearest level") {
  PamAlphabet p = PamAlphabet::make(16);
  CHECK(p.levels[p.slice(0.2)] == 1);
  CHECK(p.levels[p.slice(-0.2)] == -1);
  CHECK(p.levels[p.slice(2.2)] == 3);
  CHECK(p.levels[p.slice(1.9)] == 1);
  CHECK(p.levels[p.slice(99.0)] == 3);
  CHECK(p.levels[p.slice(-99.0)] == -3);
}

TEST_CASE("symbol prior combines rails") {
  QamMapper map = QamMapper::make(16);
  // Point masses on rails -> point mass on the symbol.
  double pre[4] = {0, 0, 1, 0};  // level +1
  double pim[4] = {0, 0, 0, 1};  // level +3
  auto prior = symbol_prior_from_rails(map, pre, pim);
  const std::uint16_t sym = map.symbol_of_indices(2, 3);
  for (unsigned c = 0; c < 16; ++c) CHECK(prior[c] == doctest::Approx(c == sym ? 1.0 : 0.0));

  double u[4] = {0.25, 0.25, 0.25, 0.25};
  auto flat = symbol_prior_from_rails(map, u, u);
  for (unsigned c = 0; c < 16; ++c) CHECK(flat[c] == doctest::Approx(1.0 / 16));
}

TEST_CASE("realify reproduces complex multiplication") {
  Rng rng(123);
  ComplexChannel c = draw_channel(5, 3, {1.0, 1.0, 1.0}, rng);
  std::vector<std::complex<double>> x = {{0.7, -1.3}, {2.0, 0.1}, {-0.4, 0.9}};
  // Complex oracle.
  std::vector<std::complex<double>> yx(5, 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) yx[i] += c.at(i, j) * x[j];
  RealSystem s = assemble_system(c, x, 0.0, rng);
  for (int i = 0; i < 5; ++i) {
    CHECK(s.y[i] == doctest::Approx(yx[i].real()).epsilon(1e-12));
    CHECK(s.y[5 + i] == doctest::Approx(yx[i].imag()).epsilon(1e-12));
  }
}

TEST_CASE("channel draws match per-user variances") {
  Rng rng(99);
  const int n = 100, k = 4, reps = 250;  // 25k entries per user
  std::vector<double> uv = {1.0, 0.5, 2.0, 1.5};
  std::vector<double> acc(k, 0.0);
  for (int r = 0; r < reps; ++r) {
    ComplexChannel c = draw_channel(n, k, uv, rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) acc[j] += std::norm(c.at(i, j));
  }
  for (int j = 0; j < k; ++j)
    CHECK(acc[j] / (n * reps) == doctest::Approx(uv[j]).epsilon(0.03));
}

TEST_CASE("noise variance frozen value") {
  // snr 10 dB, Es = 10, sum var = 4 users: N0 = 4*10/10 = 4, per-component 2.
  CHECK(noise_variance(10.0, 10.0, 4.0) == doctest::Approx(2.0));
  CHECK(noise_variance(0.0, 2.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("empirical per-antenna snr matches the convention within 0.1 dB") {
  const int n = 8, k = 4, uses = 20000;
  const double snr_db = 7.0;
  QamMapper map = QamMapper::make(16);
  std::vector<double> uv(k, 1.0);
  const double nv = noise_variance(snr_db, map.pam.symbol_energy, (double)k);
  Rng rng(2024);
  double sig = 0.0, noi = 0.0;
  for (int t = 0; t < uses; ++t) {
    ComplexChannel c = draw_channel(n, k, uv, rng);
    std::vector<std::complex<double>> x(k);
    for (int j = 0; j < k; ++j) x[j] = map.map((std::uint16_t)rng.below(16));
    RealSystem s = assemble_system(c, x, 0.0, rng);
    for (int i = 0; i < s.n2; ++i) sig += s.y[i] * s.y[i];
    const double sd = std::sqrt(nv);
    for (int i = 0; i < s.n2; ++i) {
      double w = sd * rng.gaussian();
      noi += w * w;
    }
  }
  const double snr_emp = 10.0 * std::log10(sig / noi);
  CHECK(std::abs(snr_emp - snr_db) < 0.1);
}
