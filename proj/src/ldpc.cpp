/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "nbmimo/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nbmimo/common.hpp"
#include "nbmimo/mathutil.hpp"

namespace nbmimo::ldpc {

namespace {

double term_sum(const std::vector<DegreeTerm>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s += t.fraction;
  return s;
}

double weighted_degree(const std::vector<DegreeTerm>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s += t.degree * t.fraction;
  return s;
}

std::vector<DegreeTerm> sorted_normalized(const std::vector<DegreeTerm>& terms) {
  std::vector<DegreeTerm> out = terms;
  std::sort(out.begin(), out.end(),
            [](const DegreeTerm& a, const DegreeTerm& b) { return a.degree < b.degree; });
  const double s = term_sum(out);
  for (auto& t : out) t.fraction /= s;
  return out;
}

// Apportion `total` nodes to the listed degrees by largest remainder.
std::vector<int> largest_remainder_counts(const std::vector<DegreeTerm>& terms, int total) {
  std::vector<int> counts(terms.size(), 0);
  std::vector<std::pair<double, std::size_t>> rem(terms.size());
  int assigned = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double target = total * terms[i].fraction;
    counts[i] = static_cast<int>(std::floor(target));
    assigned += counts[i];
    rem[i] = {target - counts[i], i};
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < total - assigned; ++r) counts[rem[r % rem.size()].second] += 1;
  return counts;
}

long long edge_total(const std::vector<DegreeTerm>& terms, const std::vector<int>& counts) {
  long long e = 0;
  for (std::size_t i = 0; i < terms.size(); ++i)
    e += static_cast<long long>(terms[i].degree) * counts[i];
  return e;
}

// Move nodes between listed degrees until both sides agree on the edge
// total.  Check-side moves are preferred so the variable histogram stays at
// its rounded target whenever possible.  Every applied move strictly shrinks
// the mismatch, so this terminates.
void balance_edges(const std::vector<DegreeTerm>& vterms, const std::vector<DegreeTerm>& cterms,
                   std::vector<int>& vcounts, std::vector<int>& ccounts) {
  while (true) {
    const long long d = edge_total(vterms, vcounts) - edge_total(cterms, ccounts);
    if (d == 0) return;

    long long best = std::llabs(d);
    bool found = false, on_check = true;
    std::size_t best_from = 0, best_to = 0;
    auto scan = [&](const std::vector<DegreeTerm>& terms, const std::vector<int>& counts,
                    bool check_side) {
      for (std::size_t from = 0; from < terms.size(); ++from) {
        if (counts[from] <= 0) continue;
        for (std::size_t to = 0; to < terms.size(); ++to) {
          if (to == from) continue;
          const long long delta = terms[to].degree - terms[from].degree;
          const long long nd = std::llabs(check_side ? d - delta : d + delta);
          if (nd < best) {
            best = nd;
            found = true;
            on_check = check_side;
            best_from = from;
            best_to = to;
          }
        }
      }
    };
    scan(cterms, ccounts, true);
    if (!found) scan(vterms, vcounts, false);
    if (!found)
      throw ConfigError("degree profile: variable and check edge totals cannot be reconciled "
                        "at this block length");
    auto& counts = on_check ? ccounts : vcounts;
    counts[best_from] -= 1;
    counts[best_to] += 1;
  }
}

// BFS depth of every check node from variable `root` in the graph built so
// far (-1 = unreached).  Depth 0 means directly attached to root.
void check_depths(int root, const std::vector<std::vector<int>>& var_adj,
                  const std::vector<std::vector<int>>& check_adj, std::vector<int>& depth,
                  std::vector<int>& var_mark, int stamp) {
  depth.assign(check_adj.size(), -1);
  std::vector<int> frontier{root}, next;
  var_mark[root] = stamp;
  int level = 0;
  while (!frontier.empty()) {
    next.clear();
    for (int v : frontier) {
      for (int c : var_adj[v]) {
        if (depth[c] >= 0) continue;
        depth[c] = level;
        for (int v2 : check_adj[c]) {
          if (var_mark[v2] == stamp) continue;
          var_mark[v2] = stamp;
          next.push_back(v2);
        }
      }
    }
    frontier.swap(next);
    ++level;
  }
}

bool adjacent(const std::vector<int>& list, int node) {
  return std::find(list.begin(), list.end(), node) != list.end();
}

// Every check with spare capacity is already attached to variable j.  Free a
// non-adjacent check by relocating one of its edges to a spare-capacity one.
bool free_capacity_near(int j, const std::vector<int>& target, std::vector<int>& fill,
                        std::vector<std::vector<int>>& var_adj,
                        std::vector<std::vector<int>>& check_adj) {
  const int m = static_cast<int>(check_adj.size());
  for (int ca = 0; ca < m; ++ca) {
    if (adjacent(var_adj[j], ca)) continue;
    for (int j2 : check_adj[ca]) {
      for (int cb = 0; cb < m; ++cb) {
        if (cb == ca || fill[cb] >= target[cb] || adjacent(var_adj[j2], cb)) continue;
        check_adj[ca].erase(std::find(check_adj[ca].begin(), check_adj[ca].end(), j2));
        var_adj[j2].erase(std::find(var_adj[j2].begin(), var_adj[j2].end(), ca));
        fill[ca] -= 1;
        check_adj[cb].push_back(j2);
        var_adj[j2].push_back(cb);
        fill[cb] += 1;
        return true;
      }
    }
  }
  return false;
}

double entropy_bits(const std::vector<long long>& bins, long long total) {
  double h = 0.0;
  for (long long b : bins) {
    if (b <= 0) continue;
    const double p = static_cast<double>(b) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

bool normalize_row(double* p, int q) {
  double s = 0.0;
  for (int i = 0; i < q; ++i) s += p[i];
  if (!(s > 0.0) || !std::isfinite(s)) {
    const double u = 1.0 / q;
    for (int i = 0; i < q; ++i) p[i] = u;
    return false;
  }
  const double inv = 1.0 / s;
  for (int i = 0; i < q; ++i) p[i] *= inv;
  return true;
}

// Convolution over the additive group of GF(2^beta): out[s^t] += a[s]*b[t].
void conv_xor(const double* a, const double* b, double* out, int q) {
  std::fill(out, out + q, 0.0);
  for (int s = 0; s < q; ++s) {
    const double as = a[s];
    if (as == 0.0) continue;
    for (int t = 0; t < q; ++t) out[s ^ t] += as * b[t];
  }
}

// In-place Walsh-Hadamard transform; self-inverse up to a factor q.
void wht(double* a, int q) {
  for (int h = 1; h < q; h <<= 1) {
    for (int i = 0; i < q; i += h << 1) {
      for (int k = i; k < i + h; ++k) {
        const double x = a[k], y = a[k + h];
        a[k] = x + y;
        a[k + h] = x - y;
      }
    }
  }
}

}  // namespace

double DegreeProfile::average_variable_degree() const {
  return weighted_degree(variable) / term_sum(variable);
}

double DegreeProfile::average_check_degree() const {
  return weighted_degree(check) / term_sum(check);
}

double DegreeProfile::rate() const {
  return 1.0 - average_variable_degree() / average_check_degree();
}

void DegreeProfile::validate() const {
  auto check_side = [](const std::vector<DegreeTerm>& terms, const char* which) {
    if (terms.empty())
      throw ConfigError(std::string("degree profile: empty ") + which + " distribution");
    double sum = 0.0;
    std::vector<int> seen;
    for (const auto& t : terms) {
      if (t.degree < 2)
        throw ConfigError(std::string("degree profile: ") + which + " degree must be >= 2");
      if (!(t.fraction > 0.0))
        throw ConfigError(std::string("degree profile: ") + which + " fraction must be > 0");
      if (std::find(seen.begin(), seen.end(), t.degree) != seen.end())
        throw ConfigError(std::string("degree profile: duplicate ") + which + " degree");
      seen.push_back(t.degree);
      sum += t.fraction;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConfigError(std::string("degree profile: ") + which + " fractions must sum to 1");
  };
  check_side(variable, "variable");
  check_side(check, "check");
  if (!(average_check_degree() > average_variable_degree()))
    throw ConfigError("degree profile: design rate must be positive");
}

DegreeProfile DegreeProfile::preset(const std::string& name) {
  DegreeProfile p;
  if (name == "gf16-rate05-full") {
    p.variable = {{2, 0.4768}, {6, 0.0104}, {8, 0.3174},
                  {12, 0.1817}, {16, 0.0024}, {20, 0.0113}};
    p.check = {{6, 0.5206}, {10, 0.1973}, {18, 0.1517}, {32, 0.1304}};
  } else if (name == "gf16-rate05-half") {
    p.variable = {{2, 0.6246}, {8, 0.168}, {16, 0.1853}, {20, 0.0221}};
    p.check = {{8, 0.5649}, {16, 0.1755}, {18, 0.2596}};
  } else if (name == "gf16-rate05-quarter") {
    p.variable = {{2, 0.3557}, {3, 0.6018}, {8, 0.0067}, {12, 0.0358}};
    p.check = {{5, 0.7287}, {8, 0.1793}, {10, 0.0922}};
  } else if (name == "regular-3-6") {
    p.variable = {{3, 1.0}};
    p.check = {{6, 1.0}};
  } else {
    throw ConfigError("unknown degree profile preset: " + name);
  }
  for (auto* side : {&p.variable, &p.check}) {
    const double s = term_sum(*side);
    for (auto& t : *side) t.fraction /= s;
  }
  return p;
}

std::vector<std::string> DegreeProfile::preset_names() {
  return {"gf16-rate05-full", "gf16-rate05-half", "gf16-rate05-quarter", "regular-3-6"};
}

void ParityCheck::rebuild_columns() {
  cols.assign(n, {});
  for (int c = 0; c < m; ++c)
    for (const auto& [col, coef] : rows[c]) cols[col].push_back({c, coef});
}

std::size_t ParityCheck::edge_count() const {
  std::size_t e = 0;
  for (const auto& r : rows) e += r.size();
  return e;
}

ParityCheck realize_code(const DegreeProfile& profile, int n, const gf::Field& field,
                         std::uint64_t seed) {
  profile.validate();
  if (n < 2) throw ConfigError("realize_code: block length must be >= 2");
  const std::vector<DegreeTerm> vterms = sorted_normalized(profile.variable);
  const std::vector<DegreeTerm> cterms = sorted_normalized(profile.check);
  const int m = static_cast<int>(
      std::llround(n * weighted_degree(vterms) / weighted_degree(cterms)));
  if (m < 1 || m >= n)
    throw ConfigError("realize_code: block length too small for this profile");

  std::vector<int> vcounts = largest_remainder_counts(vterms, n);
  std::vector<int> ccounts = largest_remainder_counts(cterms, m);
  balance_edges(vterms, cterms, vcounts, ccounts);

  std::vector<int> var_deg, target;
  for (std::size_t i = 0; i < vterms.size(); ++i)
    var_deg.insert(var_deg.end(), vcounts[i], vterms[i].degree);
  for (std::size_t i = 0; i < cterms.size(); ++i)
    target.insert(target.end(), ccounts[i], cterms[i].degree);

  Rng rng(seed);
  std::vector<std::vector<int>> var_adj(n), check_adj(m);
  std::vector<int> fill(m, 0), depth, var_mark(n, -1), pool;
  int stamp = 0;

  // Progressive edge growth: attach each new edge to a spare-capacity check
  // as far from the variable's current tree as possible (unreached checks
  // first), breaking ties by lowest fill, then uniformly at random.
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < var_deg[j]; ++t) {
      int chosen = -1;
      for (int attempt = 0; attempt < m && chosen < 0; ++attempt) {
        check_depths(j, var_adj, check_adj, depth, var_mark, ++stamp);
        int best_depth = -2, best_fill = 0;
        pool.clear();
        for (int c = 0; c < m; ++c) {
          if (fill[c] >= target[c] || adjacent(var_adj[j], c)) continue;
          // Rank: unreached beats any finite depth, deeper beats shallower,
          // then lower fill; ties collect into the pool.
          const int rank = depth[c] < 0 ? m + 1 : depth[c];
          if (pool.empty() || rank > best_depth ||
              (rank == best_depth && fill[c] < best_fill)) {
            pool.assign(1, c);
            best_depth = rank;
            best_fill = fill[c];
          } else if (rank == best_depth && fill[c] == best_fill) {
            pool.push_back(c);
          }
        }
        if (!pool.empty()) {
          chosen = pool[rng.below(pool.size())];
        } else if (!free_capacity_near(j, target, fill, var_adj, check_adj)) {
          throw ConstructionError("realize_code: no admissible check for a new edge");
        }
      }
      if (chosen < 0)
        throw ConstructionError("realize_code: no admissible check for a new edge");
      var_adj[j].push_back(chosen);
      check_adj[chosen].push_back(j);
      fill[chosen] += 1;
    }
  }

  ParityCheck pc;
  pc.n = n;
  pc.m = m;
  pc.q = static_cast<int>(field.q());
  pc.rows.resize(m);
  for (int c = 0; c < m; ++c) {
    std::sort(check_adj[c].begin(), check_adj[c].end());
    pc.rows[c].reserve(check_adj[c].size());
    for (int j : check_adj[c]) {
      const Elem coef =
          pc.q == 2 ? Elem{1} : static_cast<Elem>(1 + rng.below(field.q() - 1));
      pc.rows[c].push_back({j, coef});
    }
  }
  pc.rebuild_columns();
  return pc;
}

double syndrome_entropy_sampled(const std::vector<Elem>& coefs, const gf::Field& field,
                                int samples, Rng& rng) {
  if (coefs.empty()) throw ConfigError("syndrome entropy: empty row");
  if (samples < 1) throw ConfigError("syndrome entropy: samples must be >= 1");
  const std::uint32_t q = field.q();
  std::vector<long long> bins(q, 0);
  for (int s = 0; s < samples; ++s) {
    Elem acc = 0;
    for (Elem c : coefs) acc ^= field.mul(c, static_cast<Elem>(rng.below(q)));
    bins[acc] += 1;
  }
  return entropy_bits(bins, samples);
}

double syndrome_entropy_exhaustive(const std::vector<Elem>& coefs, const gf::Field& field) {
  if (coefs.empty()) throw ConfigError("syndrome entropy: empty row");
  const std::uint32_t q = field.q();
  const double total_log = coefs.size() * std::log2(static_cast<double>(q));
  if (total_log > 24.0)
    throw ConfigError("syndrome entropy: row too wide for exhaustive enumeration");
  const long long total = 1LL << static_cast<long long>(total_log + 0.5);
  std::vector<long long> bins(q, 0);
  std::vector<Elem> x(coefs.size(), 0);
  while (true) {
    Elem acc = 0;
    for (std::size_t i = 0; i < coefs.size(); ++i) acc ^= field.mul(coefs[i], x[i]);
    bins[acc] += 1;
    std::size_t pos = 0;
    while (pos < x.size()) {
      if (++x[pos] < q) break;
      x[pos] = 0;
      ++pos;
    }
    if (pos == x.size()) break;
  }
  return entropy_bits(bins, total);
}

RowOptimization optimize_row(const std::vector<Elem>& coefs, const gf::Field& field, Rng& rng,
                             int candidates, int samples) {
  if (candidates < 1) throw ConfigError("optimize_row: need at least one candidate");
  RowOptimization out;
  out.coefs = coefs;
  std::vector<Elem> cand = coefs;
  double best = -1.0;
  for (int t = 0; t < candidates; ++t) {
    if (t > 0)
      for (auto& v : cand) v = static_cast<Elem>(1 + rng.below(field.q() - 1));
    const double e = syndrome_entropy_sampled(cand, field, samples, rng);
    if (t == 0) out.incumbent_entropy = e;
    if (e > best) {
      best = e;
      out.coefs = cand;
    }
  }
  out.best_entropy = best;
  return out;
}

void optimize_entries(ParityCheck& pc, const gf::Field& field, std::uint64_t seed,
                      int candidates, int samples) {
  if (pc.q != static_cast<int>(field.q()))
    throw ConfigError("optimize_entries: field size mismatch");
  if (pc.q == 2) return;
  Rng rng(seed);
  std::vector<Elem> coefs;
  for (auto& row : pc.rows) {
    coefs.clear();
    for (const auto& [col, coef] : row) coefs.push_back(coef);
    const RowOptimization o = optimize_row(coefs, field, rng, candidates, samples);
    for (std::size_t i = 0; i < row.size(); ++i) row[i].second = o.coefs[i];
  }
  pc.rebuild_columns();
}

std::vector<Elem> syndrome(const ParityCheck& pc, const gf::Field& field,
                           const std::vector<Elem>& x) {
  if (static_cast<int>(x.size()) != pc.n) throw ConfigError("syndrome: wrong codeword length");
  std::vector<Elem> s(pc.m, 0);
  for (int c = 0; c < pc.m; ++c) {
    Elem acc = 0;
    for (const auto& [col, coef] : pc.rows[c]) acc ^= field.mul(coef, x[col]);
    s[c] = acc;
  }
  return s;
}

bool syndrome_zero(const ParityCheck& pc, const gf::Field& field, const std::vector<Elem>& x) {
  const std::vector<Elem> s = syndrome(pc, field, x);
  return std::all_of(s.begin(), s.end(), [](Elem v) { return v == 0; });
}

Encoder::Encoder(const ParityCheck& pc, const gf::Field& field) : n_(pc.n), field_(field) {
  if (pc.q != static_cast<int>(field.q())) throw ConfigError("encoder: field size mismatch");
  const int m = pc.m, n = pc.n;
  std::vector<Elem> a(static_cast<std::size_t>(m) * n, 0);
  for (int c = 0; c < m; ++c)
    for (const auto& [col, coef] : pc.rows[c]) a[static_cast<std::size_t>(c) * n + col] = coef;

  // Gauss-Jordan elimination; pivot columns become the parity positions.
  int r = 0;
  for (int col = 0; col < n && r < m; ++col) {
    int pr = -1;
    for (int rr = r; rr < m; ++rr) {
      if (a[static_cast<std::size_t>(rr) * n + col] != 0) {
        pr = rr;
        break;
      }
    }
    if (pr < 0) continue;
    if (pr != r)
      std::swap_ranges(a.begin() + static_cast<std::size_t>(pr) * n,
                       a.begin() + static_cast<std::size_t>(pr + 1) * n,
                       a.begin() + static_cast<std::size_t>(r) * n);
    const Elem scale = field.inv(a[static_cast<std::size_t>(r) * n + col]);
    if (scale != 1)
      for (int cc = col; cc < n; ++cc) {
        auto& v = a[static_cast<std::size_t>(r) * n + cc];
        v = field.mul(v, scale);
      }
    for (int rr = 0; rr < m; ++rr) {
      if (rr == r) continue;
      const Elem f = a[static_cast<std::size_t>(rr) * n + col];
      if (f == 0) continue;
      for (int cc = col; cc < n; ++cc)
        a[static_cast<std::size_t>(rr) * n + cc] ^=
            field.mul(f, a[static_cast<std::size_t>(r) * n + cc]);
    }
    parity_positions_.push_back(col);
    ++r;
  }
  if (r < m) throw ConstructionError("encoder: parity-check matrix is rank deficient");

  std::vector<char> is_pivot(n, 0);
  for (int c : parity_positions_) is_pivot[c] = 1;
  for (int c = 0; c < n; ++c)
    if (!is_pivot[c]) info_positions_.push_back(c);

  parity_terms_.resize(m);
  for (int rr = 0; rr < m; ++rr) {
    for (std::size_t i = 0; i < info_positions_.size(); ++i) {
      const Elem coef = a[static_cast<std::size_t>(rr) * n + info_positions_[i]];
      if (coef != 0) parity_terms_[rr].push_back({static_cast<int>(i), coef});
    }
  }
}

std::vector<Elem> Encoder::encode(const std::vector<Elem>& info) const {
  if (static_cast<int>(info.size()) != info_length())
    throw ConfigError("encode: wrong number of info symbols");
  for (Elem v : info)
    if (v >= field_.q()) throw ConfigError("encode: info symbol out of field range");
  std::vector<Elem> x(n_, 0);
  for (std::size_t i = 0; i < info_positions_.size(); ++i) x[info_positions_[i]] = info[i];
  // In characteristic 2 the parity solves x_p = sum coef * info directly.
  for (std::size_t r = 0; r < parity_terms_.size(); ++r) {
    Elem acc = 0;
    for (const auto& [idx, coef] : parity_terms_[r]) acc ^= field_.mul(coef, info[idx]);
    x[parity_positions_[r]] = acc;
  }
  return x;
}

DecodeResult decode(const ParityCheck& pc, const gf::Field& field,
                    const std::vector<double>& priors, const DecodeConfig& config) {
  const int n = pc.n, m = pc.m, q = pc.q;
  if (q != static_cast<int>(field.q())) throw ConfigError("decode: field size mismatch");
  if (priors.size() != static_cast<std::size_t>(n) * q)
    throw ConfigError("decode: prior table must be n x q");
  if (config.max_iterations < 1) throw ConfigError("decode: max_iterations must be >= 1");
  const bool transform = config.method == CheckUpdate::kTransform ||
                         (config.method == CheckUpdate::kAuto && q > 16);

  // Flatten edges row-major; build the column -> edge map.
  std::vector<int> row_start(m + 1, 0);
  for (int c = 0; c < m; ++c)
    row_start[c + 1] = row_start[c] + static_cast<int>(pc.rows[c].size());
  const int ne = row_start[m];
  std::vector<int> e_col(ne);
  std::vector<Elem> e_coef(ne), e_inv(ne);
  std::vector<std::vector<int>> col_edges(n);
  for (int c = 0; c < m; ++c) {
    int e = row_start[c];
    for (const auto& [col, coef] : pc.rows[c]) {
      if (coef == 0) throw ConfigError("decode: zero edge coefficient");
      e_col[e] = col;
      e_coef[e] = coef;
      e_inv[e] = field.inv(coef);
      col_edges[col].push_back(e);
      ++e;
    }
  }

  std::vector<double> prior(priors);
  for (int j = 0; j < n; ++j) normalize_row(&prior[static_cast<std::size_t>(j) * q], q);

  DecodeResult res;
  res.decisions.assign(n, 0);
  res.beliefs = prior;
  auto decide = [&](const std::vector<double>& bel) {
    for (int j = 0; j < n; ++j) {
      const double* row = &bel[static_cast<std::size_t>(j) * q];
      res.decisions[j] = static_cast<Elem>(
          std::max_element(row, row + q) - row);
    }
  };
  decide(prior);
  if (syndrome_zero(pc, field, res.decisions)) {
    res.converged = true;
    res.iterations = 0;
    return res;
  }

  std::vector<double> v(static_cast<std::size_t>(ne) * q), u(static_cast<std::size_t>(ne) * q);
  for (int e = 0; e < ne; ++e)
    std::copy_n(&prior[static_cast<std::size_t>(e_col[e]) * q], q,
                &v[static_cast<std::size_t>(e) * q]);

  int max_w = 0, max_d = 0;
  for (int c = 0; c < m; ++c) max_w = std::max(max_w, row_start[c + 1] - row_start[c]);
  for (int j = 0; j < n; ++j) max_d = std::max(max_d, static_cast<int>(col_edges[j].size()));
  std::vector<double> perm(static_cast<std::size_t>(max_w) * q);
  std::vector<double> pre(static_cast<std::size_t>(max_w + 1) * q);
  std::vector<double> suf(static_cast<std::size_t>(max_w + 1) * q);
  std::vector<double> vpre(static_cast<std::size_t>(max_d + 1) * q);
  std::vector<double> vsuf(static_cast<std::size_t>(max_d + 1) * q);
  std::vector<double> scratch(q);

  for (int it = 1; it <= config.max_iterations; ++it) {
    // Check updates.  Work in the permuted variable t = coef * x so the
    // zero-syndrome constraint becomes a plain XOR convolution.
    for (int c = 0; c < m; ++c) {
      const int w = row_start[c + 1] - row_start[c];
      for (int i = 0; i < w; ++i) {
        const int e = row_start[c] + i;
        const double* ve = &v[static_cast<std::size_t>(e) * q];
        double* pe = &perm[static_cast<std::size_t>(i) * q];
        for (int t = 0; t < q; ++t) pe[t] = ve[field.mul(e_inv[e], static_cast<Elem>(t))];
        if (transform) wht(pe, q);
      }
      if (transform) {
        std::fill_n(&pre[0], q, 1.0);
        std::fill_n(&suf[static_cast<std::size_t>(w) * q], q, 1.0);
        for (int i = 0; i < w; ++i) {
          const double* a = &pre[static_cast<std::size_t>(i) * q];
          const double* b = &perm[static_cast<std::size_t>(i) * q];
          double* o = &pre[static_cast<std::size_t>(i + 1) * q];
          for (int t = 0; t < q; ++t) o[t] = a[t] * b[t];
        }
        for (int i = w - 1; i >= 0; --i) {
          const double* a = &suf[static_cast<std::size_t>(i + 1) * q];
          const double* b = &perm[static_cast<std::size_t>(i) * q];
          double* o = &suf[static_cast<std::size_t>(i) * q];
          for (int t = 0; t < q; ++t) o[t] = a[t] * b[t];
        }
        for (int i = 0; i < w; ++i) {
          const int e = row_start[c] + i;
          for (int t = 0; t < q; ++t)
            scratch[t] = pre[static_cast<std::size_t>(i) * q + t] *
                         suf[static_cast<std::size_t>(i + 1) * q + t];
          wht(scratch.data(), q);
          double* ue = &u[static_cast<std::size_t>(e) * q];
          const double inv_q = 1.0 / q;
          for (int x = 0; x < q; ++x) {
            const double r = scratch[field.mul(e_coef[e], static_cast<Elem>(x))] * inv_q;
            ue[x] = r > 0.0 ? r : 0.0;
          }
          normalize_row(ue, q);
        }
      } else {
        std::fill_n(&pre[0], q, 0.0);
        pre[0] = 1.0;
        std::fill_n(&suf[static_cast<std::size_t>(w) * q], q, 0.0);
        suf[static_cast<std::size_t>(w) * q] = 1.0;
        for (int i = 0; i < w; ++i)
          conv_xor(&pre[static_cast<std::size_t>(i) * q],
                   &perm[static_cast<std::size_t>(i) * q],
                   &pre[static_cast<std::size_t>(i + 1) * q], q);
        for (int i = w - 1; i >= 0; --i)
          conv_xor(&suf[static_cast<std::size_t>(i + 1) * q],
                   &perm[static_cast<std::size_t>(i) * q],
                   &suf[static_cast<std::size_t>(i) * q], q);
        for (int i = 0; i < w; ++i) {
          const int e = row_start[c] + i;
          conv_xor(&pre[static_cast<std::size_t>(i) * q],
                   &suf[static_cast<std::size_t>(i + 1) * q], scratch.data(), q);
          double* ue = &u[static_cast<std::size_t>(e) * q];
          for (int x = 0; x < q; ++x)
            ue[x] = scratch[field.mul(e_coef[e], static_cast<Elem>(x))];
          normalize_row(ue, q);
        }
      }
    }

    // Beliefs and tentative decisions.
    for (int j = 0; j < n; ++j) {
      double* bel = &res.beliefs[static_cast<std::size_t>(j) * q];
      std::copy_n(&prior[static_cast<std::size_t>(j) * q], q, bel);
      for (int e : col_edges[j]) {
        const double* ue = &u[static_cast<std::size_t>(e) * q];
        for (int t = 0; t < q; ++t) bel[t] *= ue[t];
        normalize_row(bel, q);
      }
    }
    decide(res.beliefs);
    if (syndrome_zero(pc, field, res.decisions)) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    res.iterations = it;
    if (it == config.max_iterations) break;

    // Variable updates: prior times all check messages but the target edge.
    for (int j = 0; j < n; ++j) {
      const int d = static_cast<int>(col_edges[j].size());
      std::copy_n(&prior[static_cast<std::size_t>(j) * q], q, &vpre[0]);
      for (int i = 0; i < d; ++i) {
        const double* a = &vpre[static_cast<std::size_t>(i) * q];
        const double* ue = &u[static_cast<std::size_t>(col_edges[j][i]) * q];
        double* o = &vpre[static_cast<std::size_t>(i + 1) * q];
        for (int t = 0; t < q; ++t) o[t] = a[t] * ue[t];
        normalize_row(o, q);
      }
      std::fill_n(&vsuf[static_cast<std::size_t>(d) * q], q, 1.0);
      for (int i = d - 1; i >= 0; --i) {
        const double* a = &vsuf[static_cast<std::size_t>(i + 1) * q];
        const double* ue = &u[static_cast<std::size_t>(col_edges[j][i]) * q];
        double* o = &vsuf[static_cast<std::size_t>(i) * q];
        for (int t = 0; t < q; ++t) o[t] = a[t] * ue[t];
        normalize_row(o, q);
      }
      for (int i = 0; i < d; ++i) {
        double* ve = &v[static_cast<std::size_t>(col_edges[j][i]) * q];
        const double* a = &vpre[static_cast<std::size_t>(i) * q];
        const double* b = &vsuf[static_cast<std::size_t>(i + 1) * q];
        for (int t = 0; t < q; ++t) ve[t] = a[t] * b[t];
        normalize_row(ve, q);
      }
    }
  }
  return res;
}

std::string write_alist(const ParityCheck& pc) {
  std::vector<std::vector<std::pair<int, Elem>>> cols(pc.n);
  for (int c = 0; c < pc.m; ++c)
    for (const auto& [col, coef] : pc.rows[c]) cols[col].push_back({c, coef});

  std::ostringstream os;
  os << pc.n << ' ' << pc.m << ' ' << pc.q << '\n';
  std::size_t maxdv = 0, maxdc = 0;
  for (const auto& v : cols) maxdv = std::max(maxdv, v.size());
  for (const auto& r : pc.rows) maxdc = std::max(maxdc, r.size());
  os << maxdv << ' ' << maxdc << '\n';
  for (int j = 0; j < pc.n; ++j) os << cols[j].size() << (j + 1 < pc.n ? ' ' : '\n');
  for (int c = 0; c < pc.m; ++c) os << pc.rows[c].size() << (c + 1 < pc.m ? ' ' : '\n');
  for (int j = 0; j < pc.n; ++j) {
    for (std::size_t i = 0; i < cols[j].size(); ++i) {
      os << (cols[j][i].first + 1) << ' ' << cols[j][i].second;
      os << (i + 1 < cols[j].size() ? ' ' : '\n');
    }
    if (cols[j].empty()) os << '\n';
  }
  for (int c = 0; c < pc.m; ++c) {
    for (std::size_t i = 0; i < pc.rows[c].size(); ++i) {
      os << (pc.rows[c][i].first + 1) << ' ' << pc.rows[c][i].second;
      os << (i + 1 < pc.rows[c].size() ? ' ' : '\n');
    }
    if (pc.rows[c].empty()) os << '\n';
  }
  return os.str();
}

ParityCheck read_alist(const std::string& text) {
  std::istringstream is(text);
  auto next = [&is](const char* what) {
    long long v;
    if (!(is >> v)) throw ConfigError(std::string("alist: missing or malformed ") + what);
    return v;
  };
  ParityCheck pc;
  pc.n = static_cast<int>(next("block length"));
  pc.m = static_cast<int>(next("check count"));
  pc.q = static_cast<int>(next("field size"));
  if (pc.n < 1 || pc.m < 1) throw ConfigError("alist: dimensions must be positive");
  if (pc.q < 2 || (pc.q & (pc.q - 1)) != 0)
    throw ConfigError("alist: field size must be a power of two >= 2");
  const long long maxdv = next("max column degree");
  const long long maxdc = next("max row degree");
  std::vector<int> dv(pc.n), dc(pc.m);
  for (int j = 0; j < pc.n; ++j) {
    dv[j] = static_cast<int>(next("column degree"));
    if (dv[j] < 0 || dv[j] > maxdv) throw ConfigError("alist: column degree out of range");
  }
  for (int c = 0; c < pc.m; ++c) {
    dc[c] = static_cast<int>(next("row degree"));
    if (dc[c] < 0 || dc[c] > maxdc) throw ConfigError("alist: row degree out of range");
  }
  std::vector<std::vector<std::pair<int, Elem>>> cols(pc.n);
  for (int j = 0; j < pc.n; ++j) {
    for (int i = 0; i < dv[j]; ++i) {
      const long long row = next("column entry index");
      const long long coef = next("column entry coefficient");
      if (row < 1 || row > pc.m) throw ConfigError("alist: row index out of range");
      if (coef < 1 || coef >= pc.q) throw ConfigError("alist: coefficient out of range");
      cols[j].push_back({static_cast<int>(row - 1), static_cast<Elem>(coef)});
    }
  }
  pc.rows.assign(pc.m, {});
  for (int c = 0; c < pc.m; ++c) {
    for (int i = 0; i < dc[c]; ++i) {
      const long long col = next("row entry index");
      const long long coef = next("row entry coefficient");
      if (col < 1 || col > pc.n) throw ConfigError("alist: column index out of range");
      if (coef < 1 || coef >= pc.q) throw ConfigError("alist: coefficient out of range");
      if (!pc.rows[c].empty() && pc.rows[c].back().first >= col - 1)
        throw ConfigError("alist: row entries must be strictly increasing");
      pc.rows[c].push_back({static_cast<int>(col - 1), static_cast<Elem>(coef)});
    }
  }
  pc.rebuild_columns();
  if (pc.cols != cols)
    throw ConfigError("alist: row and column sections disagree");
  return pc;
}

std::string write_profile(const DegreeProfile& profile) {
  char line[64];
  std::string out;
  for (const auto& t : profile.variable) {
    std::snprintf(line, sizeof line, "v %d %.9g\n", t.degree, t.fraction);
    out += line;
  }
  for (const auto& t : profile.check) {
    std::snprintf(line, sizeof line, "c %d %.9g\n", t.degree, t.fraction);
    out += line;
  }
  return out;
}

DegreeProfile read_profile(const std::string& text) {
  DegreeProfile p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string side;
    DegreeTerm t;
    if (!(ls >> side >> t.degree >> t.fraction) || (side != "v" && side != "c")) {
      throw ConfigError("profile line " + std::to_string(lineno) +
                        ": expected 'v <degree> <fraction>' or 'c <degree> <fraction>'");
    }
    std::string extra;
    if (ls >> extra)
      throw ConfigError("profile line " + std::to_string(lineno) +
                        ": trailing content '" + extra + "'");
    (side == "v" ? p.variable : p.check).push_back(t);
  }
  p.validate();
  return p;
}

GfCode make_code(const DegreeProfile& profile, int n, const gf::Field& field,
                 std::uint64_t seed, int max_attempts) {
  if (max_attempts < 1) throw ConfigError("make_code: max_attempts must be >= 1");
  for (int attempt = 0;; ++attempt) {
    try {
      ParityCheck pc = realize_code(profile, n, field,
                                    mix_seed(seed, static_cast<std::uint64_t>(attempt), 0x9e, 0));
      optimize_entries(pc, field,
                       mix_seed(seed, static_cast<std::uint64_t>(attempt), 0x9e, 1));
      Encoder enc(pc, field);
      return GfCode{std::move(pc), std::move(enc)};
    } catch (const ConstructionError&) {
      if (attempt + 1 >= max_attempts) throw;
    }
  }
}

}  // namespace nbmimo::ldpc
