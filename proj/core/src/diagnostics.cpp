#include "logdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace logdiff {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double band3_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  s /= static_cast<double>(v.size() - 1);
  return 3.0 * std::sqrt(s / static_cast<double>(v.size()));
}

void require_ensemble(const std::vector<PathDiagnostics>& e, const char* where) {
  if (e.empty()) throw ParamError(std::string(where) + ": empty ensemble");
  const std::size_t n = e.front().records.size();
  if (n == 0) throw ParamError(std::string(where) + ": trajectory has no records");
  for (const auto& p : e)
    if (p.records.size() != n)
      throw ParamError(std::string(where) + ": paths disagree on the output grid");
}

// Trapezoid integral of the series up to each output time.
std::vector<double> trapezoid_series(const std::vector<DiagRecord>& recs,
                                     double (DiagRecord::*member)) {
  std::vector<double> out(recs.size(), 0.0);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const double dt = recs[i].time - recs[i - 1].time;
    out[i] = out[i - 1] + 0.5 * dt * (recs[i - 1].*member + recs[i].*member);
  }
  return out;
}

} // namespace

PhiResult phi_lambda(const ScalarField& x, const YosidaParams& p) {
  PhiResult res;
  const double lam = p.lambda();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x.values[i];
    const double J = resolvent(r, p);
    const double d = r - J;
    // Envelope continuation j(J) + (r-J)^2/(2 lambda); for r >= 0 this is
    // the Moreau envelope itself.
    acc += (J * std::log(J) - J) + d * d / (2.0 * lam) + 0.5 * lam * r * r;
    if (r < 0.0) res.flagged = true;
  }
  res.value = acc * x.grid.cell_volume();
  return res;
}

PhiResult phi_lambda(const ScalarField& x, double lambda) {
  return phi_lambda(x, YosidaParams(lambda));
}

double entropy_integral(const ScalarField& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += potential(x.values[i]);
  return acc * x.grid.cell_volume();
}

RateFit fit_log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ParamError("fit_log_log_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  RateFit fit;
  fit.n_points = static_cast<int>(lx.size());
  if (fit.n_points < 2) return fit;
  const double mx = mean_of(lx), my = mean_of(ly);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.alpha = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.log_c = my - fit.alpha * mx;
  return fit;
}

EnergyReport energy_balance_check(const std::vector<PathDiagnostics>& ensemble,
                                  const SimConfig& cfg, const NoiseModel& model) {
  require_ensemble(ensemble, "energy_balance_check");
  const double lam = cfg.params.lambda;
  if (!(lam <= 0.5))
    throw ParamError("energy_balance_check: the balance holds for lambda <= 1/2");

  EnergyReport rep;
  rep.n_paths = static_cast<int>(ensemble.size());
  rep.lambda = lam;
  rep.coeff = cfg.noise_off ? 0.0 : model.sum_mu_sup_sq * (lam + 1.0);

  const std::size_t n_times = ensemble.front().records.size();
  const std::size_t n_paths = ensemble.size();

  // Per-path integrals on the output grid, then per-time slack spread.
  std::vector<std::vector<double>> int_grad(n_paths), int_l2(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    int_grad[p] = trapezoid_series(ensemble[p].records, &DiagRecord::grad_psi_sq);
    int_l2[p] = trapezoid_series(ensemble[p].records, &DiagRecord::l2_sq);
    for (const auto& r : ensemble[p].records)
      if (r.phi_flagged) rep.phi_flagged = true;
  }

  rep.points.resize(n_times);
  std::vector<double> slacks(n_paths);
  for (std::size_t i = 0; i < n_times; ++i) {
    EnergyPoint& pt = rep.points[i];
    pt.time = ensemble.front().records[i].time;
    double s_phi = 0.0, s_ig = 0.0, s_il = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto& recs = ensemble[p].records;
      const double phi0 = recs.front().phi;
      const double lhs_p = recs[i].phi + int_grad[p][i];
      const double rhs_p = phi0 + rep.coeff * int_l2[p][i];
      slacks[p] = rhs_p - lhs_p;
      s_phi += recs[i].phi;
      s_ig += int_grad[p][i];
      s_il += int_l2[p][i];
    }
    pt.mean_phi = s_phi / static_cast<double>(n_paths);
    pt.mean_int_grad = s_ig / static_cast<double>(n_paths);
    pt.mean_int_l2 = s_il / static_cast<double>(n_paths);
    pt.lhs = pt.mean_phi + pt.mean_int_grad;
    pt.slack = mean_of(slacks);
    pt.rhs = pt.lhs + pt.slack;
    pt.band3 = band3_of(slacks);
  }

  rep.min_slack = rep.points.front().slack;
  rep.min_slack_plus_band = rep.points.front().slack + rep.points.front().band3;
  for (const auto& pt : rep.points) {
    rep.min_slack = std::min(rep.min_slack, pt.slack);
    rep.min_slack_plus_band = std::min(rep.min_slack_plus_band, pt.slack + pt.band3);
  }
  return rep;
}

MomentFit moment_bound_check(const std::vector<PathDiagnostics>& ensemble) {
  require_ensemble(ensemble, "moment_bound_check");
  MomentFit fit;
  fit.n_paths = static_cast<int>(ensemble.size());

  std::vector<double> c_hm1, c_l2, c_homog;
  for (const auto& p : ensemble) {
    double sup_hm1 = 0.0, sup_l2 = 0.0, sup_homog = 0.0;
    for (const auto& r : p.records) {
      sup_hm1 = std::max(sup_hm1, r.hm1_nu_sq);
      sup_l2 = std::max(sup_l2, r.l2_sq);
      sup_homog = std::max(sup_homog, r.hm1_homog_sq);
    }
    const double d_hm1 = p.records.front().hm1_nu_sq;
    const double d_l2 = p.records.front().l2_sq;
    const double d_homog = p.records.front().hm1_homog_sq;
    if (!(d_hm1 > 0.0) || !(d_l2 > 0.0))
      throw ParamError("moment_bound_check: datum norms must be positive");
    c_hm1.push_back(sup_hm1 / d_hm1);
    c_l2.push_back(sup_l2 / d_l2);
    if (d_homog > 0.0) c_homog.push_back(sup_homog / d_homog);
  }
  fit.c_hm1_sup = mean_of(c_hm1);
  fit.c_hm1_band3 = band3_of(c_hm1);
  fit.c_l2_sup = mean_of(c_l2);
  fit.c_homog_sup = mean_of(c_homog);

  const std::size_t n_times = ensemble.front().records.size();
  const double d_l2 = ensemble.front().records.front().l2_sq;
  for (std::size_t i = 0; i < n_times; ++i) {
    double m = 0.0;
    for (const auto& p : ensemble) m += p.records[i].l2_sq;
    m /= static_cast<double>(ensemble.size());
    fit.c_l2_esssup = std::max(fit.c_l2_esssup, m / d_l2);
  }
  return fit;
}

GradientFit gradient_bound_fit(const std::vector<PathDiagnostics>& ensemble,
                               const ScalarField& datum) {
  require_ensemble(ensemble, "gradient_bound_fit");
  GradientFit fit;
  std::vector<double> totals;
  for (const auto& p : ensemble)
    totals.push_back(trapezoid_series(p.records, &DiagRecord::grad_psi_sq).back());
  fit.numerator = mean_of(totals);
  fit.denominator = 1.0 + norm_l2(datum) * norm_l2(datum) + entropy_integral(datum);
  fit.c_fitted = fit.numerator / fit.denominator;
  return fit;
}

WeakResidualSeries weak_form_residual(const PathDiagnostics& traj, const NoiseModel& model,
                                      int j) {
  if (!traj.has_weak_series())
    throw ReplayError("weak_form_residual: trajectory carries no weak-form series");
  if (j < 0 || j >= traj.weak_mode_count || j >= model.mode_count())
    throw ReplayError("weak_form_residual: mode index " + std::to_string(j) +
                      " out of range");
  WeakResidualSeries out;
  out.mode = j;
  const double v0 = traj.weak_value.front()[static_cast<std::size_t>(j)];
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const double lhs = traj.weak_value[i][static_cast<std::size_t>(j)];
    const double rhs = v0 + traj.weak_drift_int[i][static_cast<std::size_t>(j)] +
                       traj.weak_stoch_int[i][static_cast<std::size_t>(j)];
    out.time.push_back(traj.records[i].time);
    out.residual.push_back(std::fabs(lhs - rhs));
  }
  out.final_residual = out.residual.back();
  return out;
}

RateFit nu_rate_check(const std::vector<PairDistance>& stage) {
  std::vector<double> gaps, dists;
  for (const auto& pd : stage) {
    gaps.push_back(std::fabs(pd.param_a - pd.param_b));
    dists.push_back(pd.mean_sup_dist_sq);
  }
  return fit_log_log_slope(gaps, dists);
}

EnsembleReport summarize_ensemble(const std::vector<PathDiagnostics>& ensemble) {
  require_ensemble(ensemble, "summarize_ensemble");
  EnsembleReport rep;
  rep.n_paths = static_cast<int>(ensemble.size());
  const std::size_t n_times = ensemble.front().records.size();

  auto fill = [&](TimeSeriesStat& stat, double (DiagRecord::*member)) {
    stat.time.resize(n_times);
    stat.mean.resize(n_times);
    stat.band3.resize(n_times);
    std::vector<double> vals(ensemble.size());
    for (std::size_t i = 0; i < n_times; ++i) {
      for (std::size_t p = 0; p < ensemble.size(); ++p)
        vals[p] = ensemble[p].records[i].*member;
      stat.time[i] = ensemble.front().records[i].time;
      stat.mean[i] = mean_of(vals);
      stat.band3[i] = band3_of(vals);
    }
  };
  fill(rep.l2_sq, &DiagRecord::l2_sq);
  fill(rep.hm1_nu_sq, &DiagRecord::hm1_nu_sq);
  fill(rep.hm1_one_sq, &DiagRecord::hm1_one_sq);
  fill(rep.hm1_homog_sq, &DiagRecord::hm1_homog_sq);
  fill(rep.phi, &DiagRecord::phi);
  fill(rep.grad_psi_sq, &DiagRecord::grad_psi_sq);
  fill(rep.mass, &DiagRecord::mass);
  fill(rep.min_value, &DiagRecord::min_value);
  fill(rep.neg_fraction, &DiagRecord::neg_fraction);
  fill(rep.leakage, &DiagRecord::leakage);
  return rep;
}

} // namespace logdiff
