/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_LDPC_HPP
#define NBMIMO_LDPC_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nbmimo/gf.hpp"
#include "nbmimo/rng.hpp"

namespace nbmimo::ldpc {

using gf::Elem;

// One term of a node-perspective degree distribution.
struct DegreeTerm {
  int degree = 0;
  double fraction = 0.0;
};

// Node-perspective degree distributions for an irregular LDPC ensemble.
struct DegreeProfile {
  std::vector<DegreeTerm> variable;
  std::vector<DegreeTerm> check;

  double average_variable_degree() const;
  double average_check_degree() const;
  // Design rate 1 - avg_dv / avg_dc.
  double rate() const;
  void validate() const;

  // Named built-in profiles. "gf16-rate05-full/-half/-quarter" are
  // rate-1/2 GF(16) designs for 16-QAM MIMO detection at loading factors
  // K/N = 1, 1/2, 1/4; "regular-3-6" is the classic (3,6) ensemble.
  static DegreeProfile preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

// Sparse parity-check matrix over GF(q) with a coefficient on every edge.
struct ParityCheck {
  int n = 0;  // variables
  int m = 0;  // checks
  int q = 0;  // field size
  // rows[c] lists (column, coefficient); cols is the transpose view.
  std::vector<std::vector<std::pair<int, Elem>>> rows;
  std::vector<std::vector<std::pair<int, Elem>>> cols;

  void rebuild_columns();
  std::size_t edge_count() const;
};

// Progressive edge-growth realization of a degree profile. Duplicate
// (check, variable) edges never occur; short cycles are avoided on a
// best-effort basis by connecting each new edge as far as possible from
// the variable's existing tree. Coefficients start uniform over the
// nonzero field elements (all ones for q = 2).
ParityCheck realize_code(const DegreeProfile& profile, int n,
                         const gf::Field& field, std::uint64_t seed);

// Empirical entropy (bits) of sum_t coef[t] * x[t] under i.i.d. uniform x.
double syndrome_entropy_sampled(const std::vector<Elem>& coefs,
                                const gf::Field& field, int samples, Rng& rng);
// Exact entropy by enumerating all q^w inputs (small rows only).
double syndrome_entropy_exhaustive(const std::vector<Elem>& coefs,
                                   const gf::Field& field);

struct RowOptimization {
  std::vector<Elem> coefs;
  double incumbent_entropy = 0.0;
  double best_entropy = 0.0;
};

// Pick the best of `candidates` coefficient vectors for one row (the
// incumbent plus random redraws) by sampled syndrome entropy.
RowOptimization optimize_row(const std::vector<Elem>& coefs,
                             const gf::Field& field, Rng& rng, int candidates,
                             int samples);

// Apply optimize_row to every row in place. No-op for q = 2.
void optimize_entries(ParityCheck& pc, const gf::Field& field,
                      std::uint64_t seed, int candidates = 32,
                      int samples = 1000);

std::vector<Elem> syndrome(const ParityCheck& pc, const gf::Field& field,
                           const std::vector<Elem>& x);
bool syndrome_zero(const ParityCheck& pc, const gf::Field& field,
                   const std::vector<Elem>& x);

// Systematic encoder derived by Gauss-Jordan elimination of the
// parity-check matrix. Throws ConstructionError when H is rank deficient.
class Encoder {
 public:
  Encoder(const ParityCheck& pc, const gf::Field& field);

  int block_length() const { return n_; }
  int info_length() const { return static_cast<int>(info_positions_.size()); }
  const std::vector<int>& info_positions() const { return info_positions_; }
  const std::vector<int>& parity_positions() const { return parity_positions_; }

  // info.size() must equal info_length(); returns a length-n codeword whose
  // entries at info_positions() equal `info`.
  std::vector<Elem> encode(const std::vector<Elem>& info) const;

 private:
  int n_ = 0;
  gf::Field field_;
  std::vector<int> info_positions_;
  std::vector<int> parity_positions_;
  // parity_terms_[r] lists (info index, coefficient) so that
  // x[parity_positions_[r]] = sum coef * info[idx].
  std::vector<std::vector<std::pair<int, Elem>>> parity_terms_;
};

enum class CheckUpdate {
  kAuto,       // direct convolution for q <= 16, transform otherwise
  kDirect,     // O(q^2) convolution over the additive group
  kTransform,  // Walsh-Hadamard pointwise products
};

struct DecodeConfig {
  int max_iterations = 50;
  CheckUpdate method = CheckUpdate::kAuto;
};

struct DecodeResult {
  std::vector<Elem> decisions;   // length n
  std::vector<double> beliefs;   // n x q posterior, row-major
  bool converged = false;
  int iterations = 0;
};

// Q-ary sum-product decoding. `priors` is an n x q row-major table of
// per-symbol channel probabilities (each row is normalized internally).
// Stops early once the tentative decisions satisfy every check.
DecodeResult decode(const ParityCheck& pc, const gf::Field& field,
                    const std::vector<double>& priors,
                    const DecodeConfig& config = {});

// Alist-style serialization extended with per-edge coefficients: every
// adjacency entry is a (1-based index, coefficient) pair.
std::string write_alist(const ParityCheck& pc);
ParityCheck read_alist(const std::string& text);

// Degree-profile text: one "v <degree> <fraction>" or "c <degree> <fraction>"
// line per term; blank lines and '#' comments are skipped.  read_profile
// validates the result.
std::string write_profile(const DegreeProfile& profile);
DegreeProfile read_profile(const std::string& text);

struct GfCode {
  ParityCheck pc;
  Encoder encoder;
};

// realize_code + optimize_entries + Encoder with retries on rank-deficient
// realizations (fresh seed per attempt).
GfCode make_code(const DegreeProfile& profile, int n, const gf::Field& field,
                 std::uint64_t seed, int max_attempts = 32);

}  // namespace nbmimo::ldpc

#endif
