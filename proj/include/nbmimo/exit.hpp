/*
 * Copyright 2026 The nbmimo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#ifndef NBMIMO_EXIT_HPP
#define NBMIMO_EXIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nbmimo/ldpc.hpp"

namespace nbmimo::exit {

// Mutual information of a binary-input consistent-Gaussian LLR channel,
// L ~ N(sigma^2/2, sigma^2).  Two-segment approximation with constants
// fitted by scripts/fit_j_function.py (accuracy ~6e-4 against quadrature);
// monotone nondecreasing, J(0) = 0, J -> 1.
double j_function(double sigma);

// Inverse of j_function by bisection.  Throws std::domain_error unless the
// argument lies in [0, 1).
double j_inverse(double i);

// Channel constant c in the variable-node transfer J(sqrt((d_v-1)*s^2 + c*g)),
// calibrated for q = 16 by scripts/calibrate_exit_c.py so that the I_A = 0
// value matches the detector-free AWGN 16-QAM symbol EXIT at 10 dB.  Other q
// are not calibrated and throw ConfigError.
double channel_constant(unsigned q);

// The fixed a priori grid {0, 0.05, ..., 0.95, 0.99}; the top point stays
// below 1 because the variable transfer needs J^-1(I_A).
std::vector<double> default_grid();

struct ExitCurve {
  std::vector<double> i_a;
  std::vector<double> i_e;
  std::string context;

  // Piecewise-linear interpolation, clamped to the end values outside.
  double interpolate(double x) const;
};

struct DetectorCurveConfig {
  int n_antennas = 8;
  int n_users = 8;
  unsigned qam_order = 16;
  double snr_db = 10.0;
  int trials = 1000;            // channel realizations per grid point (>= 1000)
  // One activation runs the detector with its operating schedule: up to
  // `detector_iterations` message-passing rounds, stopping early once the
  // messages change by less than `convergence_tol` (0 disables the stop).
  int detector_iterations = 40;
  double damping = 0.2;
  double convergence_tol = 1e-5;
  std::uint64_t seed = 1;
  std::vector<double> grid;     // empty -> default_grid()
};

// Monte-Carlo symbol-wise EXIT transfer of the detector: consistent-Gaussian
// per-bit priors at sigma_A = J^-1(I_A) are injected as rail priors, one
// activation runs, and the extrinsic mutual information of the prior-free
// posteriors is measured as 1 - E[H(p)] / log2(side).  Seed-deterministic;
// at least 1e4 posterior samples per grid point.
ExitCurve detector_exit_curve(const DetectorCurveConfig& cfg);

// Detector-free AWGN symbol EXIT of Gray-mapped M-QAM at the library's SNR
// convention (Es/N0 per antenna), by seeded Monte Carlo over rail uses.
double awgn_symbol_exit(double snr_db, unsigned qam_order, int samples,
                        std::uint64_t seed);

// Closed-form transfers evaluated on a grid.  d_v, d_c >= 2.
ExitCurve variable_exit(int d_v, double c_gamma, const std::vector<double>& grid);
ExitCurve check_exit(int d_c, const std::vector<double>& grid);
// Detector-aided variable transfer: the channel term is the detector's
// extrinsic output at the same I_A, J(sqrt((d_v-1)*J^-1(I_A)^2 +
// J^-1(I_det(I_A))^2)).
ExitCurve combined_variable_exit(int d_v, const ExitCurve& detector,
                                 const std::vector<double>& grid);

// Edge-fraction-weighted mixtures over an irregular profile.
ExitCurve mixed_combined_curve(const ldpc::DegreeProfile& profile,
                               const ExitCurve& detector,
                               const std::vector<double>& grid);
ExitCurve mixed_check_curve(const ldpc::DegreeProfile& profile,
                            const std::vector<double>& grid);

// The check curve as it is drawn in the chart, with its axes swapped: at
// abscissa x this is the a priori input the check side needs to emit x, the
// inverse of the mixed forward transfer (bisection; exact for one degree).
ExitCurve inverted_check_curve(const ldpc::DegreeProfile& profile,
                               const std::vector<double>& grid);

struct Feasibility {
  bool feasible = false;
  double margin = 0.0;             // min over the grid of combined - swapped check
  std::vector<int> violated;       // grid indices where the tunnel closes
};

// Tunnel condition: the check curve, read with swapped axes as in the chart,
// must lie at or below the mixed combined variable curve at every grid point.
Feasibility check_profile_feasibility(const ldpc::DegreeProfile& profile,
                                      const ExitCurve& detector,
                                      const std::vector<double>& grid);

// Generic dense LP, max c.x subject to constraints with x >= 0; two-phase
// simplex with Bland's rule.  Exposed for direct testing.
struct LpConstraint {
  std::vector<double> a;
  char rel = '<';  // '<', '=', '>'
  double b = 0.0;
};

struct LpSolution {
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;
  std::vector<double> x;
};

LpSolution lp_maximize(const std::vector<double>& objective,
                       const std::vector<LpConstraint>& constraints);

struct DesignConfig {
  std::vector<int> variable_degrees;
  std::vector<int> check_degrees;  // regular check candidates, swept
  double rate_target = 0.5;
  std::vector<double> grid;        // empty -> default_grid()
};

struct DesignResult {
  bool feasible = false;
  double margin = 0.0;             // best tunnel margin found
  int check_degree = 0;
  ldpc::DegreeProfile profile;
  std::vector<int> violated;       // grid indices still violated when infeasible
};

// Curve matching: for each candidate check degree, solve the LP over
// variable edge fractions maximizing the worst-grid-point tunnel margin
// subject to the rate equality; returns the best profile found.
DesignResult optimize_profile(const ExitCurve& detector, const DesignConfig& cfg);

// The SNR (dB) at which each built-in profile's feasibility check passes
// with the detector curve at its design loading (N = 128); recorded from
// the design sweep.  Throws ConfigError for unknown names.
double preset_design_snr(const std::string& preset_name);

// The full recorded design point of a built-in profile: dimensions, SNR and
// the exact detector-curve measurement settings used both to record the
// design SNR and to re-verify feasibility.  The detector transfer is measured
// on a coarse 11-point grid and interpolated; feasibility is evaluated on
// default_grid().  Throws ConfigError for unknown names.
struct DesignPoint {
  std::string profile;          // degree-profile preset name
  DetectorCurveConfig detector; // includes the recorded snr_db
};
DesignPoint preset_design_point(const std::string& preset_name);

}  // namespace nbmimo::exit

#endif
