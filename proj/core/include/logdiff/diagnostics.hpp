#ifndef LOGDIFF_DIAGNOSTICS_HPP
#define LOGDIFF_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "logdiff/monotone.hpp"
#include "logdiff/noise.hpp"
#include "logdiff/solver.hpp"
#include "logdiff/trajectory.hpp"

namespace logdiff {

// Energy functional: grid quadrature of the Moreau envelope plus the
// lambda/2 quadratic term. Negative values are handled through the
// everywhere-defined envelope continuation and reported via the flag.
struct PhiResult {
  double value = 0.0;
  bool flagged = false;  // true when any grid value was negative
};
PhiResult phi_lambda(const ScalarField& x, const YosidaParams& p);
PhiResult phi_lambda(const ScalarField& x, double lambda);

// Quadrature of x ln x - x; DomainError on negative values.
double entropy_integral(const ScalarField& x);

// Least-squares slope of log(y) against log(x); used for rate fits.
struct RateFit {
  double alpha = 0.0;  // fitted exponent
  double log_c = 0.0;  // fitted intercept
  int n_points = 0;
};
RateFit fit_log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Ensemble check of the energy balance: for each output time,
//   lhs = mean phi(X(t)) + mean int_0^t |grad psi_tilde|^2,
//   rhs = mean phi(x)    + coeff * mean int_0^t |X|^2,
// with coeff = sum_k mu_k |e_k|_inf^2 (lambda + 1), zero when the drive is
// off. Time integrals use the trapezoid rule on the output grid. The slack
// rhs - lhs carries a 3 sigma band from the per-path spread.
struct EnergyPoint {
  double time = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double band3 = 0.0;
  double mean_phi = 0.0;
  double mean_int_grad = 0.0;
  double mean_int_l2 = 0.0;
};
struct EnergyReport {
  int n_paths = 0;
  double lambda = 0.0;
  double coeff = 0.0;
  bool phi_flagged = false;  // any path touched the envelope continuation
  std::vector<EnergyPoint> points;
  double min_slack = 0.0;
  double min_slack_plus_band = 0.0;  // min over time of slack + band3
};
EnergyReport energy_balance_check(const std::vector<PathDiagnostics>& ensemble,
                                  const SimConfig& cfg, const NoiseModel& model);

// Fitted constants of the sup-in-time moment bounds, normalized by the
// datum norms. Bands are 3 sigma over paths for the primary fit.
struct MomentFit {
  int n_paths = 0;
  double c_hm1_sup = 0.0;    // mean_p sup_t |X|^2_{H-1,nu} / |x|^2_{H-1,nu}
  double c_hm1_band3 = 0.0;
  double c_l2_sup = 0.0;     // same with the L2 norm
  double c_l2_esssup = 0.0;  // max_t mean_p |X(t)|^2_{L2} / |x|^2_{L2}
  double c_homog_sup = 0.0;  // mean-zero homogeneous part
};
MomentFit moment_bound_check(const std::vector<PathDiagnostics>& ensemble);

// Fitted constant of the gradient bound: mean int_0^T |grad psi_tilde|^2
// over 1 + |x|_2^2 + entropy(x). Time integral on the output grid.
struct GradientFit {
  double c_fitted = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
};
GradientFit gradient_bound_fit(const std::vector<PathDiagnostics>& ensemble,
                               const ScalarField& datum);

// Residual of the weak-form identity for tracked mode j, replayed from the
// drift and stochastic integral series stored on the trajectory.
// ReplayError when the trajectory carries no series or j is out of range.
struct WeakResidualSeries {
  int mode = 0;
  std::vector<double> time;
  std::vector<double> residual;
  double final_residual = 0.0;
};
WeakResidualSeries weak_form_residual(const PathDiagnostics& traj, const NoiseModel& model,
                                      int j);

// Rate fit over a schedule of coupled-pair distances, e.g. the nu stage of
// a cascade: squared distance against the parameter gap.
RateFit nu_rate_check(const std::vector<PairDistance>& stage);

// Per-time ensemble means and 3 sigma bands of every recorded diagnostic,
// plus a named pass/fail ledger filled by the caller's assertions.
struct TimeSeriesStat {
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<double> band3;
};
struct LedgerEntry {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};
struct EnsembleReport {
  int n_paths = 0;
  TimeSeriesStat l2_sq, hm1_nu_sq, hm1_one_sq, hm1_homog_sq, phi, grad_psi_sq, mass,
      min_value, neg_fraction, leakage;
  std::vector<LedgerEntry> ledger;
};
EnsembleReport summarize_ensemble(const std::vector<PathDiagnostics>& ensemble);

} // namespace logdiff

#endif
