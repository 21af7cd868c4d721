/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_SIM_HPP
#define NBMIMO_SIM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nbmimo::sim {

enum class Scenario {
  kUncodedBer,   // symbol-vector detection BER over random channel uses
  kCodedBer,     // LDPC-coded BER, one codeword per user per frame
  kExit,         // detector EXIT transfer at each SNR
  kDesignCode,   // degree-profile optimization at one SNR
  kCsiBer,       // pilot-estimated-CSI BER over framed transmission
  kComplexity,   // instrumented operation counts across a dimension sweep
};

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);

// One experiment, parsed from a flat "key = value" config file.  Keys not
// used by the selected scenario are ignored by run() but still validated.
struct SimConfig {
  Scenario scenario = Scenario::kUncodedBer;
  int n_antennas = 32;
  int n_users = 32;
  unsigned qam_order = 16;
  std::vector<double> snr_db = {10.0};

  std::string detector = "nbbp";  // nbbp | mf | zf | mmse | bbp
  int iterations = 40;            // message-passing rounds (nbbp / bbp)
  double damping = 0.2;           // fraction of the previous message kept

  // Coded scenarios: degree-profile preset name or path to a profile file.
  std::string code = "gf16-rate05-full";
  int block_length = 200;
  int decode_iterations = 50;

  // Framed (estimated-CSI) scenario.
  int data_blocks = 4;  // data blocks of K uses following the pilot block
  int est_iters = 2;    // estimation-detection rounds (1 = pilot-only)
  bool perfect_csi = false;

  // Monte-Carlo budget per SNR point: `trials` is the hard cap (channel uses
  // for uncoded-ber, frames otherwise); the targets stop a point early once
  // every nonzero target is met (0 disables that target).
  std::uint64_t trials = 10000;
  std::uint64_t target_error_events = 200;  // bit-error events
  std::uint64_t target_frame_errors = 0;

  int curve_trials = 1000;  // channel draws per EXIT grid point

  // design-code scenario: candidate degrees and the code-rate constraint.
  std::vector<int> variable_degrees = {2, 3, 4, 6, 8, 12, 16, 20};
  std::vector<int> check_degrees = {4, 5, 6, 8, 10, 12};
  double rate_target = 0.5;

  // complexity scenario: which dimension to sweep and the values it takes.
  std::string sweep = "n";  // n | k | m
  std::vector<int> sweep_values;

  std::uint64_t seed = 1;

  double loading() const { return (double)n_users / (double)n_antennas; }
  // Throws ConfigError on any invariant violation.
  void validate() const;
};

// Parses the flat key = value format ('#' starts a comment).  Unknown keys,
// duplicates, malformed values and range violations all raise ConfigError
// with the offending line number; the parsed config is also validate()d.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);
// Canonical serialization (every key, fixed order); parse_config inverse.
std::string write_config(const SimConfig& cfg);

struct BerRecord {
  double snr_db = 0.0;
  std::string detector;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_counted = 0;
  double ber = 0.0;  // always bit_errors / bits_counted
  std::uint64_t frame_errors = 0;
  std::uint64_t frames = 0;
  std::uint64_t seed = 0;
  // Wall-clock seconds spent on the point.  Deliberately not emitted in the
  // CSV so that output stays byte-identical across machines and worker
  // counts.
  double wall_time = 0.0;
};

// 95% Wilson score interval on the bit-error proportion.
std::pair<double, double> ber_confidence(const BerRecord& rec);

// Exact BER of Gray-labelled square M-QAM over AWGN (per-symbol SNR
// gamma = Es/N0, matching the library convention), one value per grid entry.
std::vector<double> siso_awgn_reference(unsigned m, const std::vector<double>& snr_grid_db);

// Worker count from the NBMIMO_WORKERS environment variable; default 1,
// valid range [1, 64], anything unparsable raises ConfigError.  The value
// never changes results, only wall time.
int worker_count();

struct RunResult {
  std::vector<BerRecord> records;  // BER scenarios; empty otherwise
  std::string csv;                 // full emission including the config echo
};

// Runs the configured experiment.  Deterministic for a fixed config: the
// CSV text is byte-identical across repeat runs and worker counts.
RunResult run(const SimConfig& cfg);

}  // namespace nbmimo::sim

#endif
