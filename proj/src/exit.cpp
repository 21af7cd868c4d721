/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/exit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "nbmimo/channel.hpp"
#include "nbmimo/common.hpp"
#include "nbmimo/constellation.hpp"
#include "nbmimo/mathutil.hpp"
#include "nbmimo/nbbp.hpp"
#include "nbmimo/rng.hpp"

namespace nbmimo::exit {
namespace {

// Fitted by scripts/fit_j_function.py against 201-node Gauss-Hermite
// quadrature of 1 - E[log2(1 + e^-L)], L ~ N(s^2/2, s^2).  Segment A is a
// quartic with no linear term (J ~ 0.187 s^2 at the origin), segment B is
// 1 - exp(cubic); they agree at the split by construction.
constexpr double kSplit = 1.6363;
constexpr double kA1 = -0.00734100936817583;
constexpr double kB1 = -0.019065203057953034;
constexpr double kC1 = 0.18698390298334797;
constexpr double kA2 = 0.0009623069594991599;
constexpr double kB2 = -0.13433051407178936;
constexpr double kC2 = -0.1072035073463655;
constexpr double kD2 = 0.07753944914154327;

constexpr double kChannelC16 = 0.9938745478116177;

// Saturated inverse for curve formulas that legitimately hit the endpoints
// (e.g. the check transfer at I_A = 0 needs J^-1(1)); the public j_inverse
// keeps its strict domain.
double j_inv_sat(double x) {
  const double kTop = 1.0 - 1e-9;
  if (x < 0.0) x = 0.0;
  if (x > kTop) x = kTop;
  return j_inverse(x);
}

std::vector<double> grid_or_default(const std::vector<double>& grid) {
  return grid.empty() ? default_grid() : grid;
}

void require_unit_interval(const std::vector<double>& grid, bool open_top) {
  if (grid.empty()) throw ConfigError("exit: empty a priori grid");
  for (double g : grid) {
    if (!(g >= 0.0) || g > 1.0 || (open_top && g >= 1.0))
      throw ConfigError("exit: a priori grid values must lie in [0,1" +
                        std::string(open_top ? ")" : "]"));
  }
}

// Entropy in bits of one normalized probability row.
double entropy_bits(const double* p, int n) {
  double h = 0.0;
  for (int s = 0; s < n; ++s)
    if (p[s] > 0.0) h -= p[s] * std::log2(p[s]);
  return h;
}

// Per-rail symbol prior from consistent-Gaussian LLRs on the Gray label bits
// of the true level.  Appends `side` normalized probabilities to `out`.
void append_rail_prior(const PamAlphabet& pam, unsigned true_idx, double sigma_a,
                       Rng& rng, std::vector<double>& out) {
  const unsigned side = pam.side;
  const unsigned bits = pam.bits_per_rail;
  const unsigned lab = pam.label(true_idx);
  double llr[16];
  for (unsigned b = 0; b < bits; ++b) {
    const double mean = ((lab >> b) & 1u) ? -0.5 * sigma_a * sigma_a
                                          : 0.5 * sigma_a * sigma_a;
    llr[b] = mean + sigma_a * rng.gaussian();
  }
  const std::size_t base = out.size();
  out.resize(base + side);
  double best = -std::numeric_limits<double>::infinity();
  for (unsigned s = 0; s < side; ++s) {
    const unsigned ls = pam.label(s);
    double lw = 0.0;
    for (unsigned b = 0; b < bits; ++b)
      if ((ls >> b) & 1u) lw -= llr[b];
    out[base + s] = lw;
    best = std::max(best, lw);
  }
  double sum = 0.0;
  for (unsigned s = 0; s < side; ++s) {
    out[base + s] = fast_exp(out[base + s] - best);
    sum += out[base + s];
  }
  for (unsigned s = 0; s < side; ++s) out[base + s] /= sum;
}

std::vector<double> edge_fractions_sum1(const std::vector<ldpc::DegreeTerm>& terms) {
  double denom = 0.0;
  for (const auto& t : terms) denom += t.degree * t.fraction;
  std::vector<double> lam(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    lam[i] = terms[i].degree * terms[i].fraction / denom;
  return lam;
}

// Inverse of the mixed forward check transfer at each grid abscissa: the
// a priori input v the check side needs to emit x.  The forward transfer is
// strictly increasing in v, so bisection is exact to ~1e-30.
std::vector<double> inverted_check_values(const std::vector<ldpc::DegreeTerm>& check_terms,
                                          const std::vector<double>& grid) {
  const std::vector<double> rho = edge_fractions_sum1(check_terms);
  const auto forward = [&](double v) {
    double acc = 0.0;
    const double s = j_inv_sat(1.0 - v);
    for (std::size_t d = 0; d < check_terms.size(); ++d)
      acc += rho[d] *
             (1.0 - j_function(s * std::sqrt((double)(check_terms[d].degree - 1))));
    return acc;
  };
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    if (x <= forward(0.0)) {
      out[i] = 0.0;
      continue;
    }
    if (x >= 1.0) {
      out[i] = 1.0;
      continue;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (forward(mid) < x)
        lo = mid;
      else
        hi = mid;
    }
    out[i] = 0.5 * (lo + hi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex (Bland's rule).  Rows are stored as a flat
// (m+1) x (cols+1) tableau; the last row carries the negated reduced costs
// and accumulates the objective value in its rhs cell.

constexpr double kLpEps = 1e-9;

struct Tableau {
  int rows = 0;  // constraint rows
  int cols = 0;  // variable columns (excluding rhs)
  std::vector<double> t;
  std::vector<int> basis;

  double& at(int r, int c) { return t[(std::size_t)r * (cols + 1) + c]; }
  double at(int r, int c) const { return t[(std::size_t)r * (cols + 1) + c]; }

  void pivot(int pr, int pc) {
    const double pv = at(pr, pc);
    for (int c = 0; c <= cols; ++c) at(pr, c) /= pv;
    for (int r = 0; r <= rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  }

  // Maximizes the objective encoded in row `rows`.  Columns >= entering_limit
  // are never brought into the basis.  Returns false on an unbounded ray.
  bool solve(int entering_limit) {
    for (int guard = 0; guard < 100000; ++guard) {
      int enter = -1;
      for (int c = 0; c < entering_limit; ++c) {
        if (at(rows, c) < -kLpEps) {
          enter = c;  // Bland: first improving column
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0.0;
      for (int r = 0; r < rows; ++r) {
        if (at(r, enter) > kLpEps) {
          const double ratio = at(r, cols) / at(r, enter);
          if (leave < 0 || ratio < best - kLpEps ||
              (ratio < best + kLpEps && basis[r] < basis[leave])) {
            leave = r;
            best = ratio;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw std::logic_error("simplex iteration cap exceeded");
  }

  // Row-reduce the objective row so every basic column has zero cost there.
  void price_out() {
    for (int r = 0; r < rows; ++r) {
      const double f = at(rows, basis[r]);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) at(rows, c) -= f * at(r, c);
    }
  }
};

}  // namespace

double j_function(double sigma) {
  if (sigma <= 0.0) return 0.0;
  double j;
  if (sigma <= kSplit) {
    j = ((kA1 * sigma + kB1) * sigma + kC1) * sigma * sigma;
  } else {
    const double g = ((kA2 * sigma + kB2) * sigma + kC2) * sigma + kD2;
    j = 1.0 - std::exp(g);
  }
  return std::clamp(j, 0.0, 1.0);
}

double j_inverse(double i) {
  if (!(i >= 0.0) || i >= 1.0)
    throw std::domain_error("j_inverse: argument must lie in [0,1)");
  if (i == 0.0) return 0.0;
  double lo = 0.0, hi = 40.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (j_function(mid) < i)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double channel_constant(unsigned q) {
  if (q == 16) return kChannelC16;
  throw ConfigError("exit: channel constant is calibrated for q=16 only");
}

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i < 20; ++i) g.push_back(0.05 * i);
  g.push_back(0.99);
  return g;
}

double ExitCurve::interpolate(double x) const {
  if (i_a.empty() || i_a.size() != i_e.size())
    throw std::logic_error("ExitCurve::interpolate on malformed curve");
  if (x <= i_a.front()) return i_e.front();
  if (x >= i_a.back()) return i_e.back();
  const auto it = std::upper_bound(i_a.begin(), i_a.end(), x);
  const std::size_t hi = (std::size_t)(it - i_a.begin());
  const std::size_t lo = hi - 1;
  const double span = i_a[hi] - i_a[lo];
  if (span <= 0.0) return i_e[lo];
  const double w = (x - i_a[lo]) / span;
  return (1.0 - w) * i_e[lo] + w * i_e[hi];
}

double awgn_symbol_exit(double snr_db, unsigned qam_order, int samples,
                        std::uint64_t seed) {
  if (samples < 1) throw ConfigError("exit: awgn_symbol_exit needs samples >= 1");
  const PamAlphabet pam = PamAlphabet::make(qam_order);
  const double nv = noise_variance(snr_db, pam.symbol_energy, 1.0);
  const double sigma = std::sqrt(nv);
  const unsigned side = pam.side;
  Rng rng(seed);
  std::vector<double> p(side);
  double hsum = 0.0;
  for (int t = 0; t < samples; ++t) {
    const unsigned idx = (unsigned)rng.below(side);
    const double y = pam.levels[idx] + sigma * rng.gaussian();
    double best = -std::numeric_limits<double>::infinity();
    for (unsigned s = 0; s < side; ++s) {
      const double d = y - pam.levels[s];
      p[s] = -d * d / (2.0 * nv);
      best = std::max(best, p[s]);
    }
    double sum = 0.0;
    for (unsigned s = 0; s < side; ++s) {
      p[s] = std::exp(p[s] - best);
      sum += p[s];
    }
    for (unsigned s = 0; s < side; ++s) p[s] /= sum;
    hsum += entropy_bits(p.data(), (int)side);
  }
  const double h = hsum / samples;
  return std::clamp(1.0 - h / pam.bits_per_rail, 0.0, 1.0);
}

ExitCurve detector_exit_curve(const DetectorCurveConfig& cfg) {
  if (cfg.n_antennas < 1 || cfg.n_users < 1)
    throw ConfigError("exit: detector curve needs n_antennas, n_users >= 1");
  if (cfg.trials < 1000)
    throw ConfigError("exit: detector curve needs trials >= 1000");
  if (cfg.detector_iterations < 1)
    throw ConfigError("exit: detector curve needs detector_iterations >= 1");
  const std::vector<double> grid = grid_or_default(cfg.grid);
  require_unit_interval(grid, /*open_top=*/true);

  const QamMapper mapper = QamMapper::make(cfg.qam_order);
  const PamAlphabet& pam = mapper.pam;
  const int n = cfg.n_antennas, k = cfg.n_users;
  const int k2 = 2 * k;
  const std::vector<double> user_var(k, 1.0);
  const double nv = noise_variance(cfg.snr_db, pam.symbol_energy, (double)k);

  // Guarantee at least 1e4 extrinsic samples per grid point.
  const int trials = std::max(cfg.trials, (int)std::ceil(1e4 / k2));

  ExitCurve curve;
  curve.i_a = grid;
  curve.i_e.assign(grid.size(), 0.0);
  char ctx[96];
  std::snprintf(ctx, sizeof ctx, "nbbp n=%d k=%d m=%u snr=%.2f", n, k,
                cfg.qam_order, cfg.snr_db);
  curve.context = ctx;

  std::vector<std::uint16_t> syms(k);
  std::vector<std::complex<double>> x(k);
  std::vector<double> priors;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double sigma_a = j_inverse(grid[gi]);
    double hsum = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(mix_seed(cfg.seed, gi, (std::uint64_t)t));
      const ComplexChannel ch = draw_channel(n, k, user_var, rng);
      for (int u = 0; u < k; ++u) {
        syms[u] = (std::uint16_t)rng.below(cfg.qam_order);
        x[u] = mapper.map(syms[u]);
      }
      const RealSystem sys = assemble_system(ch, x, nv, rng);
      priors.clear();
      for (int u = 0; u < k; ++u)
        append_rail_prior(pam, mapper.rail_index_re(syms[u]), sigma_a, rng, priors);
      for (int u = 0; u < k; ++u)
        append_rail_prior(pam, mapper.rail_index_im(syms[u]), sigma_a, rng, priors);
      NbbpConfig dcfg;
      dcfg.iterations = cfg.detector_iterations;
      dcfg.damping = cfg.damping;
      dcfg.convergence_tol = cfg.convergence_tol;
      dcfg.priors = &priors;
      const PosteriorTable post = nbbp_detect(sys, pam, dcfg);
      for (int j = 0; j < k2; ++j)
        hsum += entropy_bits(post.row(j), post.side);
    }
    const double h = hsum / ((double)trials * k2);
    curve.i_e[gi] = std::clamp(1.0 - h / pam.bits_per_rail, 0.0, 1.0);
  }
  return curve;
}

ExitCurve variable_exit(int d_v, double c_gamma, const std::vector<double>& grid_in) {
  if (d_v < 2) throw ConfigError("exit: variable degree must be >= 2");
  if (c_gamma < 0.0) throw ConfigError("exit: channel term must be >= 0");
  const std::vector<double> grid = grid_or_default(grid_in);
  require_unit_interval(grid, /*open_top=*/false);
  ExitCurve c;
  c.i_a = grid;
  c.i_e.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = j_inv_sat(grid[i]);
    c.i_e[i] = j_function(std::sqrt((d_v - 1) * s * s + c_gamma));
  }
  return c;
}

ExitCurve check_exit(int d_c, const std::vector<double>& grid_in) {
  if (d_c < 2) throw ConfigError("exit: check degree must be >= 2");
  const std::vector<double> grid = grid_or_default(grid_in);
  require_unit_interval(grid, /*open_top=*/false);
  ExitCurve c;
  c.i_a = grid;
  c.i_e.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = j_inv_sat(1.0 - grid[i]);
    c.i_e[i] = 1.0 - j_function(s * std::sqrt((double)(d_c - 1)));
  }
  return c;
}

ExitCurve combined_variable_exit(int d_v, const ExitCurve& detector,
                                 const std::vector<double>& grid_in) {
  if (d_v < 2) throw ConfigError("exit: variable degree must be >= 2");
  const std::vector<double> grid = grid_or_default(grid_in);
  require_unit_interval(grid, /*open_top=*/false);
  ExitCurve c;
  c.i_a = grid;
  c.i_e.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = j_inv_sat(grid[i]);
    const double b = j_inv_sat(detector.interpolate(grid[i]));
    c.i_e[i] = j_function(std::sqrt((d_v - 1) * s * s + b * b));
  }
  return c;
}

ExitCurve mixed_combined_curve(const ldpc::DegreeProfile& profile,
                               const ExitCurve& detector,
                               const std::vector<double>& grid_in) {
  profile.validate();
  const std::vector<double> grid = grid_or_default(grid_in);
  const std::vector<double> lam = edge_fractions_sum1(profile.variable);
  ExitCurve c;
  c.i_a = grid;
  c.i_e.assign(grid.size(), 0.0);
  for (std::size_t d = 0; d < profile.variable.size(); ++d) {
    const ExitCurve part =
        combined_variable_exit(profile.variable[d].degree, detector, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) c.i_e[i] += lam[d] * part.i_e[i];
  }
  return c;
}

ExitCurve mixed_check_curve(const ldpc::DegreeProfile& profile,
                            const std::vector<double>& grid_in) {
  profile.validate();
  const std::vector<double> grid = grid_or_default(grid_in);
  const std::vector<double> rho = edge_fractions_sum1(profile.check);
  ExitCurve c;
  c.i_a = grid;
  c.i_e.assign(grid.size(), 0.0);
  for (std::size_t d = 0; d < profile.check.size(); ++d) {
    const ExitCurve part = check_exit(profile.check[d].degree, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) c.i_e[i] += rho[d] * part.i_e[i];
  }
  return c;
}

ExitCurve inverted_check_curve(const ldpc::DegreeProfile& profile,
                               const std::vector<double>& grid_in) {
  profile.validate();
  const std::vector<double> grid = grid_or_default(grid_in);
  require_unit_interval(grid, /*open_top=*/false);
  ExitCurve c;
  c.i_a = grid;
  c.i_e = inverted_check_values(profile.check, grid);
  return c;
}

Feasibility check_profile_feasibility(const ldpc::DegreeProfile& profile,
                                      const ExitCurve& detector,
                                      const std::vector<double>& grid_in) {
  const std::vector<double> grid = grid_or_default(grid_in);
  const ExitCurve comb = mixed_combined_curve(profile, detector, grid);
  const ExitCurve chk = inverted_check_curve(profile, grid);
  Feasibility f;
  f.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = comb.i_e[i] - chk.i_e[i];
    f.margin = std::min(f.margin, m);
    if (m < -1e-12) f.violated.push_back((int)i);
  }
  f.feasible = f.violated.empty();
  return f;
}

LpSolution lp_maximize(const std::vector<double>& objective,
                       const std::vector<LpConstraint>& constraints) {
  const int nv = (int)objective.size();
  if (nv == 0) throw ConfigError("lp: empty objective");
  int n_slack = 0, n_art = 0;
  struct Row {
    std::vector<double> a;
    char rel;
    double b;
  };
  std::vector<Row> rows;
  rows.reserve(constraints.size());
  for (const auto& con : constraints) {
    if ((int)con.a.size() != nv)
      throw ConfigError("lp: constraint arity mismatch");
    if (con.rel != '<' && con.rel != '=' && con.rel != '>')
      throw ConfigError("lp: relation must be '<', '=' or '>'");
    Row r{con.a, con.rel, con.b};
    if (r.b < 0.0) {
      for (double& v : r.a) v = -v;
      r.b = -r.b;
      if (r.rel == '<')
        r.rel = '>';
      else if (r.rel == '>')
        r.rel = '<';
    }
    if (r.rel == '<')
      ++n_slack;
    else if (r.rel == '>')
      ++n_slack, ++n_art;
    else
      ++n_art;
    rows.push_back(std::move(r));
  }

  const int m = (int)rows.size();
  const int art_start = nv + n_slack;
  Tableau tb;
  tb.rows = m;
  tb.cols = nv + n_slack + n_art;
  tb.t.assign((std::size_t)(m + 1) * (tb.cols + 1), 0.0);
  tb.basis.assign(m, -1);
  int slack_at = nv, art_at = art_start;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < nv; ++c) tb.at(r, c) = rows[r].a[c];
    tb.at(r, tb.cols) = rows[r].b;
    if (rows[r].rel == '<') {
      tb.at(r, slack_at) = 1.0;
      tb.basis[r] = slack_at++;
    } else if (rows[r].rel == '>') {
      tb.at(r, slack_at) = -1.0;
      ++slack_at;
      tb.at(r, art_at) = 1.0;
      tb.basis[r] = art_at++;
    } else {
      tb.at(r, art_at) = 1.0;
      tb.basis[r] = art_at++;
    }
  }

  LpSolution sol;
  if (n_art > 0) {
    // Phase 1: maximize -(sum of artificials).
    for (int c = art_start; c < tb.cols; ++c) tb.at(m, c) = 1.0;
    tb.price_out();
    if (!tb.solve(tb.cols))
      throw std::logic_error("lp: phase-1 objective cannot be unbounded");
    if (tb.at(m, tb.cols) < -1e-7) {
      sol.feasible = false;
      return sol;
    }
    // Pivot any zero-valued basic artificial onto a structural column, or
    // drop its (redundant) row.
    for (int r = 0; r < tb.rows; ++r) {
      if (tb.basis[r] < art_start) continue;
      int pc = -1;
      for (int c = 0; c < art_start; ++c) {
        if (std::abs(tb.at(r, c)) > kLpEps) {
          pc = c;
          break;
        }
      }
      if (pc >= 0) {
        tb.pivot(r, pc);
      } else {
        for (int c = 0; c <= tb.cols; ++c) tb.at(r, c) = 0.0;
        tb.basis[r] = art_start;  // inert all-zero row
      }
    }
  }

  // Phase 2 with the real objective; artificial columns stay out.
  for (int c = 0; c <= tb.cols; ++c) tb.at(m, c) = 0.0;
  for (int c = 0; c < nv; ++c) tb.at(m, c) = -objective[c];
  tb.price_out();
  sol.feasible = true;
  if (!tb.solve(art_start)) {
    sol.bounded = false;
    return sol;
  }
  sol.value = tb.at(m, tb.cols);
  sol.x.assign(nv, 0.0);
  for (int r = 0; r < m; ++r)
    if (tb.basis[r] < nv) sol.x[tb.basis[r]] = tb.at(r, tb.cols);
  return sol;
}

DesignResult optimize_profile(const ExitCurve& detector, const DesignConfig& cfg) {
  if (cfg.variable_degrees.empty() || cfg.check_degrees.empty())
    throw ConfigError("exit: design needs variable and check degree candidates");
  for (int d : cfg.variable_degrees)
    if (d < 2) throw ConfigError("exit: variable degrees must be >= 2");
  for (int d : cfg.check_degrees)
    if (d < 2) throw ConfigError("exit: check degrees must be >= 2");
  if (!(cfg.rate_target > 0.0) || !(cfg.rate_target < 1.0))
    throw ConfigError("exit: rate target must lie in (0,1)");
  const std::vector<double> grid = grid_or_default(cfg.grid);
  require_unit_interval(grid, /*open_top=*/false);

  const int nd = (int)cfg.variable_degrees.size();
  const int ng = (int)grid.size();
  // V[d][i]: detector-aided variable transfer of degree d at grid point i.
  std::vector<std::vector<double>> v(nd);
  for (int d = 0; d < nd; ++d)
    v[d] = combined_variable_exit(cfg.variable_degrees[d], detector, grid).i_e;

  const int dmin = *std::min_element(cfg.variable_degrees.begin(),
                                     cfg.variable_degrees.end());
  const int dmax = *std::max_element(cfg.variable_degrees.begin(),
                                     cfg.variable_degrees.end());

  DesignResult best;
  best.margin = -std::numeric_limits<double>::infinity();
  bool any_lp_feasible = false;

  for (int dc : cfg.check_degrees) {
    // Rate equality: sum(lambda_d / d) = (1/dc) / (1 - R).
    const double s_req = (1.0 / dc) / (1.0 - cfg.rate_target);
    if (s_req < 1.0 / dmax - 1e-12 || s_req > 1.0 / dmin + 1e-12) continue;
    const std::vector<double> chk = inverted_check_values({{dc, 1.0}}, grid);

    // Variables: lambda_1..lambda_nd, t_plus, t_minus (t = t+ - t- free).
    std::vector<double> obj(nd + 2, 0.0);
    obj[nd] = 1.0;
    obj[nd + 1] = -1.0;
    std::vector<LpConstraint> cons;
    {
      LpConstraint c0;
      c0.a.assign(nd + 2, 0.0);
      for (int d = 0; d < nd; ++d) c0.a[d] = 1.0;
      c0.rel = '=';
      c0.b = 1.0;
      cons.push_back(std::move(c0));
      LpConstraint c1;
      c1.a.assign(nd + 2, 0.0);
      for (int d = 0; d < nd; ++d) c1.a[d] = 1.0 / cfg.variable_degrees[d];
      c1.rel = '=';
      c1.b = s_req;
      cons.push_back(std::move(c1));
      for (int i = 0; i < ng; ++i) {
        LpConstraint ci;
        ci.a.assign(nd + 2, 0.0);
        for (int d = 0; d < nd; ++d) ci.a[d] = v[d][i];
        ci.a[nd] = -1.0;
        ci.a[nd + 1] = 1.0;
        ci.rel = '>';
        ci.b = chk[i];
        cons.push_back(std::move(ci));
      }
      // Keep the split margin variables inside a bounded polytope; any vertex
      // optimum has min(t+, t-) = 0 and |t| <= 1, so these never bind there.
      for (int j = 0; j < 2; ++j) {
        LpConstraint cb;
        cb.a.assign(nd + 2, 0.0);
        cb.a[nd + j] = 1.0;
        cb.rel = '<';
        cb.b = 2.0;
        cons.push_back(std::move(cb));
      }
    }
    const LpSolution sol = lp_maximize(obj, cons);
    if (!sol.feasible || !sol.bounded) continue;
    any_lp_feasible = true;
    if (sol.value > best.margin) {
      best.margin = sol.value;
      best.check_degree = dc;
      ldpc::DegreeProfile prof;
      double psum = 0.0;
      for (int d = 0; d < nd; ++d) {
        if (sol.x[d] < 1e-9) continue;
        const double node = sol.x[d] / cfg.variable_degrees[d];
        prof.variable.push_back({cfg.variable_degrees[d], node});
        psum += node;
      }
      for (auto& tterm : prof.variable) tterm.fraction /= psum;
      std::sort(prof.variable.begin(), prof.variable.end(),
                [](const ldpc::DegreeTerm& a, const ldpc::DegreeTerm& b) {
                  return a.degree < b.degree;
                });
      prof.check = {{dc, 1.0}};
      best.profile = std::move(prof);
      best.violated.clear();
      for (int i = 0; i < ng; ++i) {
        double lhs = 0.0;
        for (int d = 0; d < nd; ++d) lhs += sol.x[d] * v[d][i];
        if (lhs - chk[i] < -1e-9) best.violated.push_back(i);
      }
    }
  }
  if (!any_lp_feasible)
    throw ConfigError(
        "exit: no check-degree candidate admits the target rate with the "
        "given variable degrees");
  best.feasible = best.margin >= -1e-12;
  return best;
}

double preset_design_snr(const std::string& preset_name) {
  // Lowest whole-dB SNR at which the profile's tunnel check passes under the
  // preset_design_point settings; recorded by tools/design_sweep.
  if (preset_name == "gf16-rate05-full") return 12.0;
  if (preset_name == "gf16-rate05-half") return 8.0;
  if (preset_name == "gf16-rate05-quarter") return 6.0;
  throw ConfigError("exit: no recorded design snr for preset '" + preset_name + "'");
}

DesignPoint preset_design_point(const std::string& preset_name) {
  double alpha;
  if (preset_name == "gf16-rate05-full") {
    alpha = 1.0;
  } else if (preset_name == "gf16-rate05-half") {
    alpha = 0.5;
  } else if (preset_name == "gf16-rate05-quarter") {
    alpha = 0.25;
  } else {
    throw ConfigError("exit: no recorded design point for preset '" +
                      preset_name + "'");
  }
  DesignPoint p;
  p.profile = preset_name;
  p.detector.n_antennas = 128;
  p.detector.n_users = (int)std::lround(alpha * 128);
  p.detector.qam_order = 16;
  p.detector.snr_db = preset_design_snr(preset_name);
  p.detector.trials = 1000;
  p.detector.seed = 77;
  p.detector.grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                     0.6, 0.7, 0.8, 0.9, 0.99};
  return p;
}

}  // namespace nbmimo::exit
