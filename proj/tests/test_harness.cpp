/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "nbmimo/channel.hpp"
#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/rng.hpp"
#include "nbmimo/sim.hpp"

using namespace nbmimo;
using namespace nbmimo::sim;

namespace {

// Restores NBMIMO_WORKERS on scope exit so env-dependent cases cannot leak
// into each other.
struct WorkerEnvGuard {
  std::string saved;
  bool had = false;
  WorkerEnvGuard() {
    const char* v = std::getenv("NBMIMO_WORKERS");
    if (v != nullptr) {
      had = true;
      saved = v;
    }
  }
  ~WorkerEnvGuard() {
    if (had)
      setenv("NBMIMO_WORKERS", saved.c_str(), 1);
    else
      unsetenv("NBMIMO_WORKERS");
  }
};

// Independent Wilson interval, written from the textbook formula.
std::pair<double, double> wilson_oracle(double e, double nb) {
  const double z = 1.959963984540054;
  const double p = e / nb;
  const double c = (p + z * z / (2 * nb)) / (1 + z * z / nb);
  const double h = z / (1 + z * z / nb) * std::sqrt(p * (1 - p) / nb + z * z / (4 * nb * nb));
  return {std::max(0.0, c - h), std::min(1.0, c + h)};
}

std::string line_of(const std::string& text, int idx) {
  std::size_t pos = 0;
  for (int i = 0; i < idx; ++i) {
    pos = text.find('\n', pos);
    REQUIRE(pos != std::string::npos);
    ++pos;
  }
  const std::size_t end = text.find('\n', pos);
  return text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

int count_fields(const std::string& line) {
  return 1 + (int)std::count(line.begin(), line.end(), ',');
}

SimConfig tiny_uncoded() {
  SimConfig cfg;
  cfg.scenario = Scenario::kUncodedBer;
  cfg.n_antennas = 4;
  cfg.n_users = 2;
  cfg.qam_order = 4;
  cfg.snr_db = {0.0, 10.0};
  cfg.detector = "zf";
  cfg.iterations = 5;
  cfg.trials = 8;
  cfg.target_error_events = 0;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("scenario names round trip and the detect-ber alias maps to uncoded") {
  for (Scenario s : {Scenario::kUncodedBer, Scenario::kCodedBer, Scenario::kExit,
                     Scenario::kDesignCode, Scenario::kCsiBer, Scenario::kComplexity})
    CHECK(scenario_from_name(scenario_name(s)) == s);
  CHECK(scenario_from_name("detect-ber") == Scenario::kUncodedBer);
  CHECK_THROWS_AS(scenario_from_name("bogus"), ConfigError);
}

TEST_CASE("config serialization round trips through the parser") {
  SimConfig cfg;
  cfg.scenario = Scenario::kCodedBer;
  cfg.n_antennas = 16;
  cfg.n_users = 12;
  cfg.qam_order = 64;
  cfg.snr_db = {1.5, 2.25, 3.0};
  cfg.detector = "mmse";
  cfg.iterations = 17;
  cfg.damping = 0.35;
  cfg.code = "regular-3-6";
  cfg.block_length = 120;
  cfg.decode_iterations = 9;
  cfg.data_blocks = 3;
  cfg.est_iters = 4;
  cfg.perfect_csi = true;
  cfg.trials = 77;
  cfg.target_error_events = 11;
  cfg.target_frame_errors = 5;
  cfg.curve_trials = 1234;
  cfg.variable_degrees = {2, 3, 9};
  cfg.check_degrees = {5, 7};
  cfg.rate_target = 0.25;
  cfg.sweep = "k";
  cfg.sweep_values = {8, 16, 32};
  cfg.seed = 987654321;

  const std::string text = write_config(cfg);
  const SimConfig back = parse_config(text);
  CHECK(write_config(back) == text);
  CHECK(back.scenario == cfg.scenario);
  CHECK(back.snr_db == cfg.snr_db);
  CHECK(back.sweep_values == cfg.sweep_values);
  CHECK(back.perfect_csi == cfg.perfect_csi);
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("config parser reports the offending line") {
  auto expect_line = [](const std::string& text, const char* needle) {
    try {
      parse_config(text);
      CHECK(false);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      INFO(msg);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };
  // Unknown key on line 2.
  expect_line("seed = 1\nbogus_key = 3\n", "config line 2");
  // Missing '=' on line 3.
  expect_line("seed = 1\n# comment\njust words\n", "config line 3");
  // Malformed number on line 1.
  expect_line("n_antennas = twelve\n", "config line 1");
  // Duplicate key on line 2.
  expect_line("seed = 1\nseed = 2\n", "duplicate key");
  // trials = 0 is rejected at parse time, with its line number.
  expect_line("trials = 0\n", "config line 1");
  expect_line("scenario = uncoded-ber\ntrials = 0\n", "trials must be >= 1");
  // Range violations.
  expect_line("damping = 1.0\n", "damping");
  expect_line("qam_order = 8\n", "qam_order");
  expect_line("detector = turbo\n", "detector");
  expect_line("snr_db = \n", "snr_db");
  // Comments and blank lines do not shift the numbering.
  expect_line("# header\n\nn_users = 0\n", "config line 3");
}

TEST_CASE("config validation enforces scenario rules") {
  SimConfig cfg = tiny_uncoded();
  CHECK_NOTHROW(cfg.validate());

  SimConfig exit_cfg = cfg;
  exit_cfg.scenario = Scenario::kExit;
  exit_cfg.detector = "mmse";
  CHECK_THROWS_AS(exit_cfg.validate(), ConfigError);
  exit_cfg.detector = "nbbp";
  CHECK_NOTHROW(exit_cfg.validate());

  SimConfig csi_cfg = cfg;
  csi_cfg.scenario = Scenario::kCsiBer;
  csi_cfg.detector = "bbp";
  CHECK_THROWS_AS(csi_cfg.validate(), ConfigError);

  SimConfig design_cfg = cfg;
  design_cfg.scenario = Scenario::kDesignCode;
  design_cfg.detector = "nbbp";
  CHECK_THROWS_AS(design_cfg.validate(), ConfigError);  // two SNR points
  design_cfg.snr_db = {6.0};
  CHECK_NOTHROW(design_cfg.validate());
  design_cfg.variable_degrees = {1};
  CHECK_THROWS_AS(design_cfg.validate(), ConfigError);

  SimConfig cx_cfg = cfg;
  cx_cfg.scenario = Scenario::kComplexity;
  CHECK_THROWS_AS(cx_cfg.validate(), ConfigError);  // empty sweep_values
  cx_cfg.sweep_values = {8, 16};
  CHECK_NOTHROW(cx_cfg.validate());
  cx_cfg.sweep = "m";
  CHECK_THROWS_AS(cx_cfg.validate(), ConfigError);  // 8 is not a QAM order
  cx_cfg.sweep_values = {4, 16};
  CHECK_NOTHROW(cx_cfg.validate());
}

TEST_CASE("wilson interval matches the closed form and its contract examples") {
  BerRecord rec;
  rec.bit_errors = 0;
  rec.bits_counted = 1000000;
  auto [lo0, hi0] = ber_confidence(rec);
  CHECK(lo0 == 0.0);
  CHECK(hi0 < 4e-6);
  CHECK(hi0 > 0.0);

  rec.bit_errors = 500;
  rec.bits_counted = 1000;
  auto [lo5, hi5] = ber_confidence(rec);
  CHECK(std::abs((lo5 + hi5) / 2.0 - 0.5) < 1e-6);
  CHECK(lo5 < 0.5);
  CHECK(hi5 > 0.5);

  // Independent recomputation across a spread of counts.
  for (auto [e, n] : {std::pair<double, double>{3, 100}, {17, 4096}, {123456, 1000000}}) {
    rec.bit_errors = (std::uint64_t)e;
    rec.bits_counted = (std::uint64_t)n;
    auto [lo, hi] = ber_confidence(rec);
    auto [olo, ohi] = wilson_oracle(e, n);
    CHECK(lo == doctest::Approx(olo).epsilon(1e-12));
    CHECK(hi == doctest::Approx(ohi).epsilon(1e-12));
  }

  // Fixed ratio, growing sample: the interval width must shrink.
  double prev_width = 1.0;
  for (double nb : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    rec.bit_errors = (std::uint64_t)(0.1 * nb);
    rec.bits_counted = (std::uint64_t)nb;
    auto [lo, hi] = ber_confidence(rec);
    CHECK(hi - lo < prev_width);
    prev_width = hi - lo;
  }

  rec.bits_counted = 0;
  CHECK_THROWS_AS(ber_confidence(rec), ConfigError);
}

TEST_CASE("awgn reference reduces to the scalar Q-function for 4-QAM") {
  const double snr = 9.6;
  const double gamma = std::pow(10.0, snr / 10.0);
  const double expected = 0.5 * std::erfc(std::sqrt(gamma) / std::sqrt(2.0));
  const double got = siso_awgn_reference(4, {snr})[0];
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(1.26e-3).epsilon(0.02));
}

TEST_CASE("awgn reference approaches the random-guess plateau and decreases in snr") {
  for (unsigned m : {4u, 16u, 64u}) {
    const double deep = siso_awgn_reference(m, {-60.0})[0];
    CHECK(deep == doctest::Approx(0.5).epsilon(0.01));
    const std::vector<double> grid = {-10, -5, 0, 5, 10, 15, 20};
    const std::vector<double> ber = siso_awgn_reference(m, grid);
    for (std::size_t i = 1; i < ber.size(); ++i) CHECK(ber[i] < ber[i - 1]);
    CHECK(ber.back() > 0.0);
  }
  CHECK_THROWS_AS(siso_awgn_reference(8, {0.0}), ConfigError);
}

TEST_CASE("awgn reference agrees with a monte-carlo receiver") {
  const QamMapper mapper = QamMapper::make(16);
  const unsigned bpr = mapper.pam.bits_per_rail;
  for (double snr : {6.0, 10.0}) {
    const double nv = noise_variance(snr, mapper.pam.symbol_energy, 1.0);
    const double sigma = std::sqrt(nv);
    Rng rng(1234 + (std::uint64_t)snr);
    std::uint64_t errs = 0, bits = 0;
    for (int t = 0; t < 300000; ++t) {
      const std::uint16_t s = (std::uint16_t)rng.below(16);
      const std::complex<double> x = mapper.map(s);
      const double yr = x.real() + sigma * rng.gaussian();
      const double yi = x.imag() + sigma * rng.gaussian();
      const std::uint16_t shat = mapper.slice({yr, yi});
      unsigned diff = (unsigned)(shat ^ s);
      while (diff) {
        errs += diff & 1u;
        diff >>= 1;
      }
      bits += 2 * bpr;
    }
    BerRecord rec;
    rec.bit_errors = errs;
    rec.bits_counted = bits;
    auto [lo, hi] = ber_confidence(rec);
    const double analytic = siso_awgn_reference(16, {snr})[0];
    INFO("snr ", snr, " mc ", (double)errs / (double)bits, " analytic ", analytic);
    CHECK(analytic >= lo);
    CHECK(analytic <= hi);
  }
}

TEST_CASE("worker count env variable is validated") {
  WorkerEnvGuard guard;
  unsetenv("NBMIMO_WORKERS");
  CHECK(worker_count() == 1);
  setenv("NBMIMO_WORKERS", "4", 1);
  CHECK(worker_count() == 4);
  setenv("NBMIMO_WORKERS", "0", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
  setenv("NBMIMO_WORKERS", "65", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
  setenv("NBMIMO_WORKERS", "two", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
}

TEST_CASE("ber records satisfy their counting invariants") {
  SimConfig cfg = tiny_uncoded();
  cfg.detector = "nbbp";
  const RunResult rr = run(cfg);
  REQUIRE(rr.records.size() == cfg.snr_db.size());
  for (std::size_t p = 0; p < rr.records.size(); ++p) {
    const BerRecord& rec = rr.records[p];
    CHECK(rec.snr_db == cfg.snr_db[p]);
    CHECK(rec.detector == cfg.detector);
    CHECK(rec.seed == cfg.seed);
    CHECK(rec.frames == cfg.trials);  // early stop disabled
    CHECK(rec.bits_counted == cfg.trials * (std::uint64_t)cfg.n_users * 2);
    CHECK(rec.ber == (double)rec.bit_errors / (double)rec.bits_counted);
    CHECK(rec.frame_errors <= rec.frames);
    CHECK(rec.bit_errors <= rec.bits_counted);
    CHECK(rec.wall_time >= 0.0);
  }
}

TEST_CASE("early stopping reports the exact counts it used") {
  SimConfig cfg = tiny_uncoded();
  cfg.detector = "mf";
  cfg.snr_db = {0.0};
  cfg.trials = 1000;
  cfg.target_error_events = 5;  // reached inside the first block
  const RunResult rr = run(cfg);
  const BerRecord& rec = rr.records[0];
  CHECK(rec.bit_errors >= 5);
  // Stops on a block boundary (32 uses per block) or at the cap.
  CHECK((rec.frames % 32 == 0 || rec.frames == cfg.trials));
  CHECK(rec.frames < cfg.trials);
  CHECK(rec.bits_counted == rec.frames * (std::uint64_t)cfg.n_users * 2);
  CHECK(rec.ber == (double)rec.bit_errors / (double)rec.bits_counted);

  // A frame-error target alone also stops the point.
  SimConfig fcfg = cfg;
  fcfg.target_error_events = 0;
  fcfg.target_frame_errors = 3;
  const BerRecord frec = run(fcfg).records[0];
  CHECK(frec.frame_errors >= 3);
  CHECK(frec.frames < fcfg.trials);
}

TEST_CASE("identical config and seed give byte-identical csv") {
  SimConfig cfg = tiny_uncoded();
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK(a.csv == b.csv);
  cfg.seed += 1;
  const RunResult c = run(cfg);
  CHECK(a.csv != c.csv);
}

TEST_CASE("csv output is byte-identical across worker counts") {
  WorkerEnvGuard guard;
  SimConfig cfg = tiny_uncoded();
  cfg.detector = "mmse";
  cfg.trials = 300;
  cfg.target_error_events = 77;  // trip the stop mid-sweep
  unsetenv("NBMIMO_WORKERS");
  const std::string base = run(cfg).csv;
  for (const char* w : {"2", "3", "5"}) {
    setenv("NBMIMO_WORKERS", w, 1);
    CHECK(run(cfg).csv == base);
  }
}

TEST_CASE("csv echoes the config and keeps a stable schema") {
  SimConfig cfg = tiny_uncoded();
  const RunResult rr = run(cfg);
  // Echoed config: every write_config line appears with a "# " prefix.
  std::size_t pos = 0;
  const std::string conf = write_config(cfg);
  std::size_t start = 0;
  while (start < conf.size()) {
    std::size_t end = conf.find('\n', start);
    const std::string want = "# " + conf.substr(start, end - start) + "\n";
    CHECK(rr.csv.find(want) != std::string::npos);
    start = end + 1;
  }
  CHECK(rr.csv.find("# loading_factor = 0.5\n") != std::string::npos);
  // The column header is the first non-comment line.
  int idx = 0;
  while (line_of(rr.csv, idx).rfind("#", 0) == 0) ++idx;
  CHECK(line_of(rr.csv, idx) ==
        "snr_db,detector,bit_errors,bits_counted,ber,ber_low,ber_high,frame_errors,frames,seed");
  // One row per SNR point, each with the full field count.
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p)
    CHECK(count_fields(line_of(rr.csv, idx + 1 + (int)p)) == 10);
  (void)pos;
}

TEST_CASE("golden csv for a pinned tiny config") {
  const char* config_text =
      "scenario = uncoded-ber\n"
      "n_antennas = 4\n"
      "n_users = 2\n"
      "qam_order = 4\n"
      "snr_db = 0,10\n"
      "detector = zf\n"
      "iterations = 5\n"
      "trials = 8\n"
      "target_error_events = 0\n"
      "seed = 42\n";
  const SimConfig cfg = parse_config(config_text);
  const RunResult rr = run(cfg);
  const char* golden =
      "# scenario = uncoded-ber\n"
      "# n_antennas = 4\n"
      "# n_users = 2\n"
      "# qam_order = 4\n"
      "# snr_db = 0,10\n"
      "# detector = zf\n"
      "# iterations = 5\n"
      "# damping = 0.2\n"
      "# code = gf16-rate05-full\n"
      "# block_length = 200\n"
      "# decode_iterations = 50\n"
      "# data_blocks = 4\n"
      "# est_iters = 2\n"
      "# perfect_csi = false\n"
      "# trials = 8\n"
      "# target_error_events = 0\n"
      "# target_frame_errors = 0\n"
      "# curve_trials = 1000\n"
      "# variable_degrees = 2,3,4,6,8,12,16,20\n"
      "# check_degrees = 4,5,6,8,10,12\n"
      "# rate_target = 0.5\n"
      "# sweep = n\n"
      "# sweep_values = \n"
      "# seed = 42\n"
      "# loading_factor = 0.5\n"
      "snr_db,detector,bit_errors,bits_counted,ber,ber_low,ber_high,frame_errors,frames,seed\n"
      "0,zf,6,32,0.1875,0.0888954469,0.353091552,4,8,42\n"
      "10,zf,0,32,0,0,0.107179198,0,8,42\n";
  CHECK(rr.csv == golden);
}

TEST_CASE("coded scenario accepts a profile file and rejects unknown names") {
  SimConfig cfg;
  cfg.scenario = Scenario::kCodedBer;
  cfg.n_antennas = 4;
  cfg.n_users = 2;
  cfg.qam_order = 16;
  cfg.snr_db = {12.0};
  cfg.detector = "mmse";
  cfg.code = "no-such-profile";
  cfg.block_length = 24;
  cfg.trials = 1;
  cfg.target_error_events = 0;
  CHECK_THROWS_AS(run(cfg), ConfigError);

  const char* path = "/tmp/nbmimo_test_profile.txt";
  std::FILE* f = std::fopen(path, "w");
  REQUIRE(f != nullptr);
  std::fputs("# regular ensemble\nv 3 1.0\nc 6 1.0\n", f);
  std::fclose(f);
  cfg.code = path;
  const RunResult rr = run(cfg);
  REQUIRE(rr.records.size() == 1);
  // One frame, one codeword per user, 4 bits per coded symbol.
  CHECK(rr.records[0].frames == 2);
  CHECK(rr.records[0].bits_counted == 2ull * 24 * 4);
  std::remove(path);
}

TEST_CASE("exit scenario emits one row per grid point and snr") {
  SimConfig cfg;
  cfg.scenario = Scenario::kExit;
  cfg.n_antennas = 4;
  cfg.n_users = 2;
  cfg.qam_order = 4;
  cfg.snr_db = {2.0, 6.0};
  cfg.detector = "nbbp";
  cfg.iterations = 5;
  cfg.curve_trials = 1000;
  cfg.seed = 11;
  const RunResult rr = run(cfg);
  CHECK(rr.records.empty());
  int rows = 0;
  std::size_t pos = 0;
  while ((pos = rr.csv.find('\n', pos)) != std::string::npos) {
    ++pos;
    ++rows;
  }
  // 25 comment lines + header + 2 * 21 grid rows.
  int comments = 0, data = 0;
  std::size_t start = 0;
  bool saw_header = false;
  while (start < rr.csv.size()) {
    std::size_t end = rr.csv.find('\n', start);
    const std::string line = rr.csv.substr(start, end - start);
    if (line.rfind("#", 0) == 0)
      ++comments;
    else if (!saw_header) {
      CHECK(line == "snr_db,i_a,i_e,context");
      saw_header = true;
    } else {
      CHECK(count_fields(line) == 4);
      ++data;
    }
    start = end + 1;
  }
  CHECK(saw_header);
  CHECK(data == 42);
}

TEST_CASE("complexity scenario instruments counts that match the analytic model") {
  SimConfig cfg;
  cfg.scenario = Scenario::kComplexity;
  cfg.n_antennas = 16;
  cfg.n_users = 8;
  cfg.qam_order = 16;
  cfg.snr_db = {10.0};
  cfg.sweep = "k";
  cfg.sweep_values = {4, 8, 16};
  const RunResult rr = run(cfg);
  // Parse the data rows back.
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  bool saw_header = false;
  while (start < rr.csv.size()) {
    std::size_t end = rr.csv.find('\n', start);
    const std::string line = rr.csv.substr(start, end - start);
    start = end + 1;
    if (line.rfind("#", 0) == 0) continue;
    if (!saw_header) {
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t a = 0;
    while (true) {
      std::size_t b = line.find(',', a);
      fields.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
      if (b == std::string::npos) break;
      a = b + 1;
    }
    rows.push_back(fields);
  }
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.size() == 9);
    const double measured = std::stod(r[5]);
    const double analytic = std::stod(r[6]);
    CHECK(measured == doctest::Approx(analytic).epsilon(0.01));
    CHECK(std::stod(r[7]) > 0);
    CHECK(std::stod(r[8]) > 0);
  }
  // Linear scaling in k across the factor-4 sweep.
  const double c0 = std::stod(rows[0][5]) / 4.0;
  const double c2 = std::stod(rows[2][5]) / 16.0;
  CHECK(c2 == doctest::Approx(c0).epsilon(0.1));
}

TEST_CASE("csi scenario counts framed data bits") {
  SimConfig cfg;
  cfg.scenario = Scenario::kCsiBer;
  cfg.n_antennas = 8;
  cfg.n_users = 4;
  cfg.qam_order = 16;
  cfg.snr_db = {14.0};
  cfg.detector = "mmse";
  cfg.data_blocks = 2;
  cfg.est_iters = 2;
  cfg.trials = 3;
  cfg.target_error_events = 0;
  const RunResult rr = run(cfg);
  const BerRecord& rec = rr.records[0];
  CHECK(rec.frames == 3);
  // data symbols per frame: l*K uses x K users, 4 bits each.
  CHECK(rec.bits_counted == 3ull * 2 * 4 * 4 * 4);
  CHECK(rec.ber == (double)rec.bit_errors / (double)rec.bits_counted);

  // Perfect CSI at the same operating point can only do better on average;
  // here just assert it runs and stays deterministic.
  cfg.perfect_csi = true;
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK(a.csv == b.csv);
}

TEST_CASE("load_config rejects a missing file") {
  CHECK_THROWS_AS(load_config("/tmp/definitely-not-here.cfg"), ConfigError);
}
