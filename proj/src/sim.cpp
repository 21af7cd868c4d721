/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/sim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nbmimo/bbp.hpp"
#include "nbmimo/chanest.hpp"
#include "nbmimo/channel.hpp"
#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/exit.hpp"
#include "nbmimo/gf.hpp"
#include "nbmimo/ldpc.hpp"
#include "nbmimo/linear.hpp"
#include "nbmimo/mathutil.hpp"
#include "nbmimo/nbbp.hpp"
#include "nbmimo/rng.hpp"

namespace nbmimo::sim {

namespace {

constexpr double kZ95 = 1.959963984540054;

unsigned ilog2(unsigned v) {
  unsigned p = 0;
  while ((1u << p) < v) ++p;
  return p;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

bool valid_qam(long long m) {
  if (m < 4 || m > 65536) return false;
  if (m & (m - 1)) return false;
  return ilog2((unsigned)m) % 2 == 0;
}

bool known_detector(const std::string& d) {
  return d == "nbbp" || d == "mf" || d == "zf" || d == "mmse" || d == "bbp";
}

// ---------------------------------------------------------------------------
// Config text format
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void line_error(int lineno, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(lineno) + ": " + msg);
}

long long parse_ll(const std::string& v, int lineno, const std::string& key) {
  try {
    std::size_t idx = 0;
    const long long out = std::stoll(v, &idx);
    if (idx != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    line_error(lineno, "value '" + v + "' for '" + key + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& v, int lineno, const std::string& key) {
  const long long out = parse_ll(v, lineno, key);
  if (out < 0) line_error(lineno, "'" + key + "' must be nonnegative");
  return (std::uint64_t)out;
}

double parse_f64(const std::string& v, int lineno, const std::string& key) {
  try {
    std::size_t idx = 0;
    const double out = std::stod(v, &idx);
    if (idx != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    line_error(lineno, "value '" + v + "' for '" + key + "' is not a number");
  }
}

bool parse_bool(const std::string& v, int lineno, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  line_error(lineno, "value '" + v + "' for '" + key + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::vector<double> parse_f64_list(const std::string& v, int lineno, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_f64(item, lineno, key));
  return out;
}

std::vector<int> parse_int_list(const std::string& v, int lineno, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back((int)parse_ll(item, lineno, key));
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo block engine
// ---------------------------------------------------------------------------

struct Totals {
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t frame_errors = 0;
  std::uint64_t frames = 0;

  Totals& operator+=(const Totals& o) {
    bit_errors += o.bit_errors;
    bits += o.bits;
    frame_errors += o.frame_errors;
    frames += o.frames;
    return *this;
  }
};

// Trials are split into fixed blocks.  Each wave computes `workers` blocks
// concurrently, then the results are folded in block order with the stop
// condition re-checked after every block, so the set of trials that make it
// into the totals depends only on the config, never on the worker count.
template <typename TrialFn>
BerRecord run_point(const SimConfig& cfg, double snr, const std::string& label,
                    std::uint64_t block_size, int workers, const TrialFn& trial) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t nblocks = (cfg.trials + block_size - 1) / block_size;
  auto reached = [&](const Totals& t) {
    if (cfg.target_error_events == 0 && cfg.target_frame_errors == 0) return false;
    if (cfg.target_error_events > 0 && t.bit_errors < cfg.target_error_events) return false;
    if (cfg.target_frame_errors > 0 && t.frame_errors < cfg.target_frame_errors) return false;
    return true;
  };
  auto run_block = [&](std::uint64_t b) {
    Totals acc;
    const std::uint64_t lo = b * block_size;
    const std::uint64_t hi = std::min(cfg.trials, lo + block_size);
    for (std::uint64_t t = lo; t < hi; ++t) acc += trial(t);
    return acc;
  };
  Totals tot;
  bool done = false;
  for (std::uint64_t next = 0; !done && next < nblocks; next += (std::uint64_t)workers) {
    const int wave = (int)std::min<std::uint64_t>((std::uint64_t)workers, nblocks - next);
    std::vector<Totals> slot((std::size_t)wave);
    if (wave == 1) {
      slot[0] = run_block(next);
    } else {
      std::vector<std::thread> pool;
      pool.reserve((std::size_t)wave);
      for (int w = 0; w < wave; ++w)
        pool.emplace_back([&slot, &run_block, next, w] { slot[(std::size_t)w] = run_block(next + (std::uint64_t)w); });
      for (auto& th : pool) th.join();
    }
    for (int w = 0; w < wave && !done; ++w) {
      tot += slot[(std::size_t)w];
      if (reached(tot)) done = true;
    }
  }
  BerRecord rec;
  rec.snr_db = snr;
  rec.detector = label;
  rec.bit_errors = tot.bit_errors;
  rec.bits_counted = tot.bits;
  rec.ber = tot.bits ? (double)tot.bit_errors / (double)tot.bits : 0.0;
  rec.frame_errors = tot.frame_errors;
  rec.frames = tot.frames;
  rec.seed = cfg.seed;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Per-trial experiments
// ---------------------------------------------------------------------------

NbbpConfig message_passing_config(const SimConfig& cfg) {
  NbbpConfig nc;
  nc.iterations = cfg.iterations;
  nc.damping = cfg.damping;
  return nc;
}

// One uncoded channel use: K random symbols through a fresh channel.
Totals uncoded_trial(const SimConfig& cfg, const QamMapper& mapper, double snr,
                     int point, std::uint64_t t) {
  Rng rng(mix_seed(cfg.seed, (std::uint64_t)point, t));
  const int k = cfg.n_users;
  const unsigned bpr = mapper.pam.bits_per_rail;
  const std::vector<double> user_var((std::size_t)k, 1.0);
  const ComplexChannel ch = draw_channel(cfg.n_antennas, k, user_var, rng);
  std::vector<std::uint16_t> sym((std::size_t)k);
  std::vector<std::complex<double>> xc((std::size_t)k);
  for (int j = 0; j < k; ++j) {
    sym[(std::size_t)j] = (std::uint16_t)rng.below(cfg.qam_order);
    xc[(std::size_t)j] = mapper.map(sym[(std::size_t)j]);
  }
  const double nv = noise_variance(snr, mapper.pam.symbol_energy, (double)k);
  const RealSystem sys = assemble_system(ch, xc, nv, rng);

  Totals tot;
  tot.frames = 1;
  std::uint64_t errs = 0;
  if (cfg.detector == "bbp") {
    // The binary baseline is scored on its own antipodal expansion bits.
    const BbpResult r = bbp_detect(sys, cfg.qam_order, message_passing_config(cfg));
    for (int j2 = 0; j2 < sys.k2; ++j2) {
      const std::vector<int> ref = antipodal_bits(sys.x[(std::size_t)j2], bpr);
      for (unsigned p = 0; p < bpr; ++p)
        errs += (std::uint64_t)(r.bits[(std::size_t)j2 * bpr + p] != ref[p]);
    }
    tot.bits = (std::uint64_t)sys.k2 * bpr;
  } else {
    std::vector<int> idx;
    if (cfg.detector == "nbbp") {
      const PosteriorTable post = nbbp_detect(sys, mapper.pam, message_passing_config(cfg));
      idx = hard_decisions(post);
    } else {
      idx = linear_detect(linear_kind_from_name(cfg.detector), sys, mapper.pam).decisions;
    }
    for (int j = 0; j < k; ++j) {
      const std::uint16_t shat = mapper.symbol_of_indices((unsigned)idx[(std::size_t)j],
                                                          (unsigned)idx[(std::size_t)(j + k)]);
      errs += (std::uint64_t)std::popcount((unsigned)(shat ^ sym[(std::size_t)j]));
    }
    tot.bits = (std::uint64_t)k * 2u * bpr;
  }
  tot.bit_errors = errs;
  tot.frame_errors = errs ? 1 : 0;
  return tot;
}

// Per-rail level posteriors of a linear detector under a Gaussian residual
// model: the filter output for rail j is x_j plus an error of variance
// Es*[(FH - I)(FH - I)^T]_jj + sigma^2*[F F^T]_jj, which conditions a level
// likelihood the decoder can use (the detector's own PosteriorTable is a
// point mass and would starve the decoder of soft information).
std::vector<double> linear_rail_posteriors(LinearKind kind, const RealSystem& sys,
                                           const PamAlphabet& pam) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int n2 = sys.n2, k2 = sys.k2;
  const int side = (int)pam.side;
  Eigen::Map<const RowMat> h(sys.h.data(), n2, k2);
  Eigen::Map<const Eigen::VectorXd> y(sys.y.data(), n2);
  const double es = pam.rail_energy;
  const double s2 = sys.noise_var;

  Eigen::MatrixXd f(k2, n2);
  if (kind == LinearKind::MF) {
    for (int j = 0; j < k2; ++j) f.row(j) = h.col(j).transpose() / h.col(j).squaredNorm();
  } else {
    Eigen::MatrixXd a = h.transpose() * h;
    if (kind == LinearKind::MMSE) a.diagonal().array() += s2 / es;
    f = a.ldlt().solve(h.transpose());
  }
  Eigen::MatrixXd e = f * h;
  e.diagonal().array() -= 1.0;
  const Eigen::VectorXd xhat = f * y;

  std::vector<double> out((std::size_t)k2 * (std::size_t)side);
  std::vector<double> lp((std::size_t)side);
  for (int j = 0; j < k2; ++j) {
    const double var = es * e.row(j).squaredNorm() + s2 * f.row(j).squaredNorm();
    const double inv2v = 0.5 / std::max(var, 1e-300);
    double mx = -1e300;
    for (int s = 0; s < side; ++s) {
      const double d = xhat(j) - pam.levels[(std::size_t)s];
      lp[(std::size_t)s] = -d * d * inv2v;
      mx = std::max(mx, lp[(std::size_t)s]);
    }
    double sum = 0.0;
    for (int s = 0; s < side; ++s) {
      const double p = std::exp(lp[(std::size_t)s] - mx);
      out[(std::size_t)j * side + s] = p;
      sum += p;
    }
    for (int s = 0; s < side; ++s) out[(std::size_t)j * side + s] /= sum;
  }
  return out;
}

struct CodedContext {
  gf::Field field;
  ldpc::GfCode code;
  QamMapper mapper;
};

ldpc::DegreeProfile resolve_profile(const std::string& name_or_path) {
  for (const auto& name : ldpc::DegreeProfile::preset_names())
    if (name == name_or_path) return ldpc::DegreeProfile::preset(name);
  std::ifstream in(name_or_path);
  if (!in)
    throw ConfigError("code '" + name_or_path +
                      "' is neither a built-in profile preset nor a readable file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ldpc::read_profile(ss.str());
}

CodedContext make_coded_context(const SimConfig& cfg) {
  const unsigned beta = ilog2(cfg.qam_order);
  return CodedContext{gf::Field::make(beta),
                      ldpc::make_code(resolve_profile(cfg.code), cfg.block_length,
                                      gf::Field::make(beta), mix_seed(cfg.seed, 0x10dc)),
                      QamMapper::make(cfg.qam_order)};
}

// One coded frame: every user sends one codeword, one GF(q) symbol per
// channel use (q equals the QAM order), each use over a fresh channel draw.
// The frame/bit tallies are per user codeword.
Totals coded_trial(const SimConfig& cfg, const CodedContext& cc, double snr,
                   int point, std::uint64_t f) {
  Rng rng(mix_seed(cfg.seed, (std::uint64_t)point, f));
  const int n = cfg.block_length, k = cfg.n_users;
  const int q = (int)cc.field.q();
  const unsigned beta = cc.field.beta();
  const unsigned bpr = cc.mapper.pam.bits_per_rail;
  const int side = (int)cc.mapper.pam.side;

  std::vector<std::vector<gf::Elem>> cw((std::size_t)k);
  std::vector<gf::Elem> info((std::size_t)cc.code.encoder.info_length());
  for (int u = 0; u < k; ++u) {
    for (auto& e : info) e = (gf::Elem)rng.below((std::uint64_t)q);
    cw[(std::size_t)u] = cc.code.encoder.encode(info);
  }

  const double nv = noise_variance(snr, cc.mapper.pam.symbol_energy, (double)k);
  const std::vector<double> user_var((std::size_t)k, 1.0);
  const NbbpConfig nc = message_passing_config(cfg);
  const bool is_nbbp = cfg.detector == "nbbp";
  const bool is_bbp = cfg.detector == "bbp";
  const LinearKind lk = (is_nbbp || is_bbp) ? LinearKind::MF : linear_kind_from_name(cfg.detector);

  // Level bit patterns for the binary baseline's product demapper.
  std::vector<std::vector<int>> level_bits((std::size_t)side);
  for (int s = 0; s < side; ++s)
    level_bits[(std::size_t)s] = antipodal_bits(cc.mapper.pam.levels[(std::size_t)s], bpr);

  std::vector<std::vector<double>> priors((std::size_t)k,
                                          std::vector<double>((std::size_t)n * (std::size_t)q));
  std::vector<std::complex<double>> xc((std::size_t)k);
  for (int use = 0; use < n; ++use) {
    const ComplexChannel ch = draw_channel(cfg.n_antennas, k, user_var, rng);
    for (int u = 0; u < k; ++u) xc[(std::size_t)u] = cc.mapper.map((std::uint16_t)cw[(std::size_t)u][(std::size_t)use]);
    const RealSystem sys = assemble_system(ch, xc, nv, rng);

    if (is_nbbp) {
      const PosteriorTable post = nbbp_detect(sys, cc.mapper.pam, nc);
      for (int u = 0; u < k; ++u) {
        const std::vector<double> pr =
            symbol_prior_from_rails(cc.mapper, post.row(u), post.row(u + k));
        std::copy(pr.begin(), pr.end(), priors[(std::size_t)u].begin() + (std::size_t)use * q);
      }
    } else if (is_bbp) {
      const BbpResult r = bbp_detect(sys, cfg.qam_order, nc);
      std::vector<double> rail((std::size_t)sys.k2 * (std::size_t)side);
      for (int j2 = 0; j2 < sys.k2; ++j2)
        for (int s = 0; s < side; ++s) {
          double p = 1.0;
          for (unsigned b = 0; b < bpr; ++b) {
            const double pp = r.p_plus[(std::size_t)j2 * bpr + b];
            p *= level_bits[(std::size_t)s][b] ? pp : 1.0 - pp;
          }
          rail[(std::size_t)j2 * side + s] = p;
        }
      for (int u = 0; u < k; ++u) {
        const std::vector<double> pr = symbol_prior_from_rails(
            cc.mapper, &rail[(std::size_t)u * side], &rail[(std::size_t)(u + k) * side]);
        std::copy(pr.begin(), pr.end(), priors[(std::size_t)u].begin() + (std::size_t)use * q);
      }
    } else {
      const std::vector<double> rail = linear_rail_posteriors(lk, sys, cc.mapper.pam);
      for (int u = 0; u < k; ++u) {
        const std::vector<double> pr = symbol_prior_from_rails(
            cc.mapper, &rail[(std::size_t)u * side], &rail[(std::size_t)(u + k) * side]);
        std::copy(pr.begin(), pr.end(), priors[(std::size_t)u].begin() + (std::size_t)use * q);
      }
    }
  }

  Totals tot;
  ldpc::DecodeConfig dconf;
  dconf.max_iterations = cfg.decode_iterations;
  for (int u = 0; u < k; ++u) {
    const ldpc::DecodeResult d = ldpc::decode(cc.code.pc, cc.field, priors[(std::size_t)u], dconf);
    std::uint64_t errs = 0;
    for (int i = 0; i < n; ++i)
      errs += (std::uint64_t)std::popcount(
          (unsigned)(d.decisions[(std::size_t)i] ^ cw[(std::size_t)u][(std::size_t)i]));
    tot.bit_errors += errs;
    tot.bits += (std::uint64_t)n * beta;
    tot.frames += 1;
    tot.frame_errors += errs ? 1 : 0;
  }
  return tot;
}

chanest::DetectorKind chanest_kind(const std::string& d) {
  if (d == "nbbp") return chanest::DetectorKind::kNbbp;
  if (d == "mf") return chanest::DetectorKind::kMf;
  if (d == "zf") return chanest::DetectorKind::kZf;
  return chanest::DetectorKind::kMmse;
}

// One pilot-plus-data frame received through the iterative estimator.
Totals csi_trial(const SimConfig& cfg, const QamMapper& mapper, double snr,
                 int point, std::uint64_t f) {
  Rng rng(mix_seed(cfg.seed, (std::uint64_t)point, f));
  const std::vector<double> user_var((std::size_t)cfg.n_users, 1.0);
  const chanest::Frame fr = chanest::make_frame(cfg.n_antennas, cfg.n_users, cfg.data_blocks,
                                                cfg.qam_order, user_var, rng);
  const double nv = noise_variance(snr, mapper.pam.symbol_energy, (double)cfg.n_users);
  const chanest::FrameObservation obs = chanest::transmit(fr, nv, rng);
  chanest::ReceiveConfig rc;
  rc.detector = chanest_kind(cfg.detector);
  rc.nbbp = message_passing_config(cfg);
  rc.est_iters = cfg.est_iters;
  rc.perfect_csi = cfg.perfect_csi;
  const chanest::ReceiveResult res = chanest::iterative_receive(fr, obs, rc);

  Totals tot;
  tot.frames = 1;
  std::uint64_t errs = 0;
  for (std::size_t i = 0; i < fr.data.size(); ++i)
    errs += (std::uint64_t)std::popcount((unsigned)(res.decisions[i] ^ fr.data[i]));
  tot.bit_errors = errs;
  tot.bits = (std::uint64_t)fr.data.size() * ilog2(cfg.qam_order);
  tot.frame_errors = errs ? 1 : 0;
  return tot;
}

// ---------------------------------------------------------------------------
// Scenario drivers
// ---------------------------------------------------------------------------

constexpr char kBerColumns[] =
    "snr_db,detector,bit_errors,bits_counted,ber,ber_low,ber_high,frame_errors,frames,seed\n";

std::string ber_row(const BerRecord& rec) {
  const auto [lo, hi] = ber_confidence(rec);
  std::string out;
  out += fmt(rec.snr_db);
  out += "," + rec.detector;
  out += "," + fmt_u64(rec.bit_errors);
  out += "," + fmt_u64(rec.bits_counted);
  out += "," + fmt(rec.ber);
  out += "," + fmt(lo);
  out += "," + fmt(hi);
  out += "," + fmt_u64(rec.frame_errors);
  out += "," + fmt_u64(rec.frames);
  out += "," + fmt_u64(rec.seed);
  out += "\n";
  return out;
}

void run_ber_scenario(const SimConfig& cfg, RunResult& rr) {
  const QamMapper mapper = QamMapper::make(cfg.qam_order);
  const int workers = worker_count();
  const std::uint64_t block =
      cfg.scenario == Scenario::kUncodedBer ? 32 : 2;  // trials per work unit
  std::optional<CodedContext> cc;
  if (cfg.scenario == Scenario::kCodedBer) cc.emplace(make_coded_context(cfg));

  rr.csv += kBerColumns;
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double snr = cfg.snr_db[p];
    auto trial = [&](std::uint64_t t) {
      switch (cfg.scenario) {
        case Scenario::kUncodedBer:
          return uncoded_trial(cfg, mapper, snr, (int)p, t);
        case Scenario::kCodedBer:
          return coded_trial(cfg, *cc, snr, (int)p, t);
        default:
          return csi_trial(cfg, mapper, snr, (int)p, t);
      }
    };
    BerRecord rec = run_point(cfg, snr, cfg.detector, block, workers, trial);
    rr.csv += ber_row(rec);
    rr.records.push_back(std::move(rec));
  }
}

exit::DetectorCurveConfig curve_config(const SimConfig& cfg, double snr) {
  exit::DetectorCurveConfig dc;
  dc.n_antennas = cfg.n_antennas;
  dc.n_users = cfg.n_users;
  dc.qam_order = cfg.qam_order;
  dc.snr_db = snr;
  dc.trials = cfg.curve_trials;
  dc.detector_iterations = cfg.iterations;
  dc.damping = cfg.damping;
  dc.seed = cfg.seed;
  return dc;
}

void run_exit_scenario(const SimConfig& cfg, RunResult& rr) {
  rr.csv += "snr_db,i_a,i_e,context\n";
  for (double snr : cfg.snr_db) {
    const exit::ExitCurve curve = exit::detector_exit_curve(curve_config(cfg, snr));
    for (std::size_t i = 0; i < curve.i_a.size(); ++i)
      rr.csv += fmt(snr) + "," + fmt(curve.i_a[i]) + "," + fmt(curve.i_e[i]) + "," +
                curve.context + "\n";
  }
}

void run_design_scenario(const SimConfig& cfg, RunResult& rr) {
  exit::DetectorCurveConfig dc = curve_config(cfg, cfg.snr_db[0]);
  dc.grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  const exit::ExitCurve curve = exit::detector_exit_curve(dc);
  exit::DesignConfig dcfg;
  dcfg.variable_degrees = cfg.variable_degrees;
  dcfg.check_degrees = cfg.check_degrees;
  dcfg.rate_target = cfg.rate_target;
  const exit::DesignResult res = exit::optimize_profile(curve, dcfg);
  rr.csv += "# feasible = " + std::string(res.feasible ? "1" : "0") + "\n";
  rr.csv += "# margin = " + fmt(res.margin) + "\n";
  rr.csv += "# check_degree = " + std::to_string(res.check_degree) + "\n";
  if (res.feasible) {
    rr.csv += "# rate = " + fmt(res.profile.rate()) + "\n";
    rr.csv += ldpc::write_profile(res.profile);
  } else {
    rr.csv += "# violated_grid_points = ";
    for (std::size_t i = 0; i < res.violated.size(); ++i)
      rr.csv += (i ? "," : "") + std::to_string(res.violated[i]);
    rr.csv += "\n";
  }
}

void run_complexity_scenario(const SimConfig& cfg, RunResult& rr) {
  rr.csv +=
      "sweep,value,n_antennas,n_users,qam_order,nbbp_measured,nbbp_analytic,"
      "mmse_measured,mmse_analytic\n";
  for (std::size_t p = 0; p < cfg.sweep_values.size(); ++p) {
    int n = cfg.n_antennas, k = cfg.n_users;
    unsigned m = cfg.qam_order;
    const int v = cfg.sweep_values[p];
    if (cfg.sweep == "n")
      n = v;
    else if (cfg.sweep == "k")
      k = v;
    else
      m = (unsigned)v;
    Rng rng(mix_seed(cfg.seed, 0xC0, p));
    const QamMapper mapper = QamMapper::make(m);
    const std::vector<double> user_var((std::size_t)k, 1.0);
    const ComplexChannel ch = draw_channel(n, k, user_var, rng);
    std::vector<std::complex<double>> xc((std::size_t)k);
    for (int j = 0; j < k; ++j) xc[(std::size_t)j] = mapper.map((std::uint16_t)rng.below(m));
    const double nv = noise_variance(cfg.snr_db[0], mapper.pam.symbol_energy, (double)k);
    const RealSystem sys = assemble_system(ch, xc, nv, rng);

    NbbpDetector det(sys, mapper.pam.levels, message_passing_config(cfg));
    det.init_messages();
    const std::uint64_t before = det.diagnostics().op_count;
    det.iterate();
    const std::uint64_t nbbp_measured = det.diagnostics().op_count - before;
    const std::uint64_t mmse_measured = linear_detect(LinearKind::MMSE, sys, mapper.pam).op_count;

    rr.csv += cfg.sweep + "," + std::to_string(v) + "," + std::to_string(n) + "," +
              std::to_string(k) + "," + std::to_string(m) + "," + fmt_u64(nbbp_measured) + "," +
              fmt(op_count_estimate(n, k, m).per_iteration) + "," + fmt_u64(mmse_measured) +
              "," + fmt_u64(mmse_op_count(n, k)) + "\n";
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

Scenario scenario_from_name(const std::string& name) {
  if (name == "uncoded-ber" || name == "detect-ber") return Scenario::kUncodedBer;
  if (name == "coded-ber") return Scenario::kCodedBer;
  if (name == "exit") return Scenario::kExit;
  if (name == "design-code") return Scenario::kDesignCode;
  if (name == "csi-ber") return Scenario::kCsiBer;
  if (name == "complexity") return Scenario::kComplexity;
  throw ConfigError("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kUncodedBer: return "uncoded-ber";
    case Scenario::kCodedBer: return "coded-ber";
    case Scenario::kExit: return "exit";
    case Scenario::kDesignCode: return "design-code";
    case Scenario::kCsiBer: return "csi-ber";
    case Scenario::kComplexity: return "complexity";
  }
  throw ConfigError("invalid scenario value");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (n_antennas < 1) fail("n_antennas must be >= 1");
  if (n_users < 1) fail("n_users must be >= 1");
  if (!valid_qam((long long)qam_order))
    fail("qam_order must be an even power of two in [4, 65536]");
  if (snr_db.empty()) fail("snr_db must list at least one value");
  if (!known_detector(detector))
    fail("unknown detector '" + detector + "' (expected nbbp, mf, zf, mmse or bbp)");
  if (iterations < 1) fail("iterations must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) fail("damping must lie in [0, 1)");
  if (block_length < 2) fail("block_length must be >= 2");
  if (decode_iterations < 1) fail("decode_iterations must be >= 1");
  if (data_blocks < 1) fail("data_blocks must be >= 1");
  if (est_iters < 1) fail("est_iters must be >= 1");
  if (trials < 1) fail("trials must be >= 1");
  if (curve_trials < 1) fail("curve_trials must be >= 1");
  if (!(rate_target > 0.0 && rate_target < 1.0)) fail("rate_target must lie in (0, 1)");
  if (sweep != "n" && sweep != "k" && sweep != "m")
    fail("sweep must be one of n, k, m");
  if (scenario == Scenario::kExit && detector != "nbbp")
    fail("the exit scenario measures the message-passing detector; set detector = nbbp");
  if (scenario == Scenario::kCsiBer && detector == "bbp")
    fail("the csi-ber scenario supports the nbbp, mf, zf and mmse detectors");
  if (scenario == Scenario::kDesignCode) {
    if (snr_db.size() != 1) fail("design-code uses exactly one snr_db value");
    if (variable_degrees.empty()) fail("variable_degrees must be nonempty");
    if (check_degrees.empty()) fail("check_degrees must be nonempty");
    for (int d : variable_degrees)
      if (d < 2) fail("variable degrees must be >= 2");
    for (int d : check_degrees)
      if (d < 2) fail("check degrees must be >= 2");
  }
  if (scenario == Scenario::kComplexity) {
    if (sweep_values.empty()) fail("sweep_values must be nonempty for the complexity scenario");
    for (int v : sweep_values) {
      if (v < 1) fail("sweep_values must be positive");
      if (sweep == "m" && !valid_qam(v))
        fail("sweep_values must be QAM orders when sweeping m");
    }
  }
}

SimConfig parse_config(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) line_error(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) line_error(lineno, "missing key before '='");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      line_error(lineno, "duplicate key '" + key + "'");
    seen.push_back(key);

    auto positive = [&](long long v, const char* name) {
      if (v < 1) line_error(lineno, std::string(name) + " must be >= 1");
      return (int)v;
    };
    if (key == "scenario") {
      try {
        cfg.scenario = scenario_from_name(value);
      } catch (const ConfigError& e) {
        line_error(lineno, e.what());
      }
    } else if (key == "n_antennas") {
      cfg.n_antennas = positive(parse_ll(value, lineno, key), "n_antennas");
    } else if (key == "n_users") {
      cfg.n_users = positive(parse_ll(value, lineno, key), "n_users");
    } else if (key == "qam_order") {
      const long long m = parse_ll(value, lineno, key);
      if (!valid_qam(m))
        line_error(lineno, "qam_order must be an even power of two in [4, 65536]");
      cfg.qam_order = (unsigned)m;
    } else if (key == "snr_db") {
      cfg.snr_db = parse_f64_list(value, lineno, key);
      if (cfg.snr_db.empty()) line_error(lineno, "snr_db must list at least one value");
    } else if (key == "detector") {
      if (!known_detector(value))
        line_error(lineno, "unknown detector '" + value + "' (expected nbbp, mf, zf, mmse or bbp)");
      cfg.detector = value;
    } else if (key == "iterations") {
      cfg.iterations = positive(parse_ll(value, lineno, key), "iterations");
    } else if (key == "damping") {
      cfg.damping = parse_f64(value, lineno, key);
      if (!(cfg.damping >= 0.0 && cfg.damping < 1.0))
        line_error(lineno, "damping must lie in [0, 1)");
    } else if (key == "code") {
      cfg.code = value;
    } else if (key == "block_length") {
      cfg.block_length = positive(parse_ll(value, lineno, key), "block_length");
    } else if (key == "decode_iterations") {
      cfg.decode_iterations = positive(parse_ll(value, lineno, key), "decode_iterations");
    } else if (key == "data_blocks") {
      cfg.data_blocks = positive(parse_ll(value, lineno, key), "data_blocks");
    } else if (key == "est_iters") {
      cfg.est_iters = positive(parse_ll(value, lineno, key), "est_iters");
    } else if (key == "perfect_csi") {
      cfg.perfect_csi = parse_bool(value, lineno, key);
    } else if (key == "trials") {
      cfg.trials = parse_u64(value, lineno, key);
      if (cfg.trials < 1) line_error(lineno, "trials must be >= 1");
    } else if (key == "target_error_events") {
      cfg.target_error_events = parse_u64(value, lineno, key);
    } else if (key == "target_frame_errors") {
      cfg.target_frame_errors = parse_u64(value, lineno, key);
    } else if (key == "curve_trials") {
      cfg.curve_trials = positive(parse_ll(value, lineno, key), "curve_trials");
    } else if (key == "variable_degrees") {
      cfg.variable_degrees = parse_int_list(value, lineno, key);
    } else if (key == "check_degrees") {
      cfg.check_degrees = parse_int_list(value, lineno, key);
    } else if (key == "rate_target") {
      cfg.rate_target = parse_f64(value, lineno, key);
      if (!(cfg.rate_target > 0.0 && cfg.rate_target < 1.0))
        line_error(lineno, "rate_target must lie in (0, 1)");
    } else if (key == "sweep") {
      if (value != "n" && value != "k" && value != "m")
        line_error(lineno, "sweep must be one of n, k, m");
      cfg.sweep = value;
    } else if (key == "sweep_values") {
      cfg.sweep_values = parse_int_list(value, lineno, key);
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, lineno, key);
    } else {
      line_error(lineno, "unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string write_config(const SimConfig& cfg) {
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("scenario", scenario_name(cfg.scenario));
  kv("n_antennas", std::to_string(cfg.n_antennas));
  kv("n_users", std::to_string(cfg.n_users));
  kv("qam_order", std::to_string(cfg.qam_order));
  kv("snr_db", join_list(cfg.snr_db));
  kv("detector", cfg.detector);
  kv("iterations", std::to_string(cfg.iterations));
  kv("damping", fmt(cfg.damping));
  kv("code", cfg.code);
  kv("block_length", std::to_string(cfg.block_length));
  kv("decode_iterations", std::to_string(cfg.decode_iterations));
  kv("data_blocks", std::to_string(cfg.data_blocks));
  kv("est_iters", std::to_string(cfg.est_iters));
  kv("perfect_csi", cfg.perfect_csi ? "true" : "false");
  kv("trials", fmt_u64(cfg.trials));
  kv("target_error_events", fmt_u64(cfg.target_error_events));
  kv("target_frame_errors", fmt_u64(cfg.target_frame_errors));
  kv("curve_trials", std::to_string(cfg.curve_trials));
  kv("variable_degrees", join_list(cfg.variable_degrees));
  kv("check_degrees", join_list(cfg.check_degrees));
  kv("rate_target", fmt(cfg.rate_target));
  kv("sweep", cfg.sweep);
  kv("sweep_values", join_list(cfg.sweep_values));
  kv("seed", fmt_u64(cfg.seed));
  return out;
}

std::pair<double, double> ber_confidence(const BerRecord& rec) {
  if (rec.bits_counted == 0) throw ConfigError("ber_confidence requires bits_counted > 0");
  const double nb = (double)rec.bits_counted;
  const double ph = (double)rec.bit_errors / nb;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nb;
  const double center = (ph + z2 / (2.0 * nb)) / denom;
  const double half = kZ95 * std::sqrt(ph * (1.0 - ph) / nb + z2 / (4.0 * nb * nb)) / denom;
  // At the empirical extremes the score bound is exactly the extreme; the
  // clamps also absorb last-bit rounding of center -/+ half.
  const double lo = rec.bit_errors == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = rec.bit_errors == rec.bits_counted ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::vector<double> siso_awgn_reference(unsigned m, const std::vector<double>& snr_grid_db) {
  if (!valid_qam((long long)m))
    throw ConfigError("qam_order must be an even power of two in [4, 65536]");
  const int side = (int)std::lround(std::sqrt((double)m));
  const unsigned bpr = ilog2((unsigned)side);
  std::vector<double> out;
  out.reserve(snr_grid_db.size());
  for (double snr : snr_grid_db) {
    const double gamma = std::pow(10.0, snr / 10.0);
    const double scale = std::sqrt(3.0 * gamma / ((double)m - 1.0));
    // Exact Gray-mapped bit error rate of one sqrt(M)-PAM rail, summed over
    // bit positions; the two rails are identical so this is also the QAM BER.
    double ber = 0.0;
    for (unsigned kbit = 1; kbit <= bpr; ++kbit) {
      const long long two_km1 = 1ll << (kbit - 1);
      double acc = 0.0;
      const long long top = (long long)((1.0 - std::pow(2.0, -(double)kbit)) * side) - 1;
      for (long long i = 0; i <= top; ++i) {
        const long long floor_term = (2 * i * two_km1 + side) / (2 * side);
        const double sign = ((i * two_km1 / side) % 2 == 0) ? 1.0 : -1.0;
        const double weight = (double)(two_km1 - floor_term);
        acc += sign * weight * q_function((double)(2 * i + 1) * scale);
      }
      ber += (2.0 / side) * acc;
    }
    out.push_back(ber / (double)bpr);
  }
  return out;
}

int worker_count() {
  const char* env = std::getenv("NBMIMO_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 64)
    throw ConfigError("NBMIMO_WORKERS must be an integer in [1, 64]");
  return (int)v;
}

RunResult run(const SimConfig& cfg) {
  cfg.validate();
  RunResult rr;
  std::istringstream echo(write_config(cfg));
  std::string line;
  while (std::getline(echo, line)) rr.csv += "# " + line + "\n";
  rr.csv += "# loading_factor = " + fmt(cfg.loading()) + "\n";
  switch (cfg.scenario) {
    case Scenario::kUncodedBer:
    case Scenario::kCodedBer:
    case Scenario::kCsiBer:
      run_ber_scenario(cfg, rr);
      break;
    case Scenario::kExit:
      run_exit_scenario(cfg, rr);
      break;
    case Scenario::kDesignCode:
      run_design_scenario(cfg, rr);
      break;
    case Scenario::kComplexity:
      run_complexity_scenario(cfg, rr);
      break;
  }
  return rr;
}

}  // namespace nbmimo::sim
