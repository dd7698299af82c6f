// Acceptance gate: one line per criterion, exit 0 only if every criterion
// passes. Ensembles run at desk scale (d = 3, N = 32, L = 8, 16 noise
// modes, T = 1, 100 paths) with pinned tolerances.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "logdiff/config.hpp"
#include "logdiff/diagnostics.hpp"
#include "logdiff/rng.hpp"
#include "logdiff/runner.hpp"

using namespace logdiff;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

RunConfig desk_config() {
  RunConfig cfg;  // defaults already match the desk scale
  cfg.noise.mode_count = 16;
  cfg.paths = 100;
  cfg.seed = 2026;
  return cfg;
}

ScalarField random_field(const Grid& g, std::uint64_t seed, double offset = 0.0) {
  ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = offset + normal_draw(seed, 0, i, 0);
  return f;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// ---- criterion 1: scalar calculus --------------------------------------

Outcome criterion_scalar() {
  double gap_max = -1e300;
  int bracket_violations = 0;
  double residual_max = 0.0;
  for (double lam : {0.5, 0.25, 0.1, 0.01}) {
    YosidaParams p(lam);
    for (int i = 0; i < 200; ++i) {
      const double r = std::pow(10.0, -6.0 + 9.0 * i / 199.0);
      gap_max = std::max(gap_max, propaux_gap(r, p));
      const double J = resolvent(r, p);
      if (J < (r + lam) / (1.0 + lam) * (1.0 - 1e-14)) ++bracket_violations;
      if (r <= 700.0 && J > std::exp(r) * (1.0 + 1e-14)) ++bracket_violations;
      residual_max = std::max(residual_max, std::fabs(J + lam * std::log(J) - r));
    }
  }

  double log_dev = 0.0;
  YosidaParams tiny(1e-4);
  for (int i = 0; i <= 400; ++i) {
    const double r = 0.1 * std::pow(100.0, i / 400.0);
    log_dev = std::max(log_dev, std::fabs(yosida(r, tiny) - std::log(r)));
  }

  int lipschitz_violations = 0;
  for (double lam : {0.5, 0.1}) {
    YosidaParams p(lam);
    for (int i = 0; i < 10000; ++i) {
      const double a = -5.0 + 25.0 * to_unit(key_hash(42, 0, i, 0));
      const double b = -5.0 + 25.0 * to_unit(key_hash(42, 1, i, 0));
      if (a == b) continue;
      const double dj = std::fabs(resolvent(a, p) - resolvent(b, p));
      const double dpsi = std::fabs(yosida(a, p) - yosida(b, p));
      if (dj > std::fabs(a - b) * (1.0 + 1e-12)) ++lipschitz_violations;
      if (lam * dpsi > std::fabs(a - b) * (1.0 + 1e-12)) ++lipschitz_violations;
    }
  }

  Outcome o;
  o.pass = gap_max <= 1e-9 && bracket_violations == 0 && residual_max <= 1e-12 &&
           log_dev <= 0.01 && lipschitz_violations == 0;
  o.detail = fmt("gap max %.3g, log dev %.3g, residual max %.3g", gap_max, log_dev,
                 residual_max) +
             fmt(", violations %g", double(bracket_violations + lipschitz_violations));
  return o;
}

// ---- criterion 2: spectral identities -----------------------------------

Outcome criterion_spectral() {
  const Grid g = make_grid(3, 32, 8.0);
  SpectralTransform tr(g);

  ScalarField f = random_field(g, 301);
  const double plancherel_rel =
      std::fabs(tr.norm_l2(tr.forward(f)) - norm_l2(f)) / norm_l2(f);

  const double nu = 0.7;
  ScalarField w = tr.shifted_inverse(f, nu, 1.0);
  ScalarField lw = tr.laplacian(w);
  double comp_err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    comp_err = std::max(comp_err,
                        std::fabs(nu * w.values[i] - lw.values[i] - f.values[i]));
  const double comp_rel = comp_err / max_abs(f);

  int mono_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField h = random_field(g, 400 + trial);
    double prev = 1e300;
    for (double nv : {0.01, 0.1, 0.5, 1.0}) {
      const double cur = tr.norm_hminus1(h, nv);
      if (cur > prev * (1.0 + 1e-12)) ++mono_violations;
      prev = cur;
    }
  }

  ScalarField h2 = random_field(g, 777);
  ScalarField rf = tr.shifted_inverse(f, nu, 1.0);
  ScalarField rh = tr.shifted_inverse(h2, nu, 1.0);
  const double left = inner_l2(rf, h2);
  const double right = inner_l2(f, rh);
  const double mid = tr.inner_hminus1(f, h2, nu);
  const double scale = std::max({std::fabs(left), std::fabs(mid), 1.0});
  const double gelfand_rel =
      std::max(std::fabs(left - right), std::fabs(left - mid)) / scale;

  Outcome o;
  o.pass = plancherel_rel <= 1e-12 && comp_rel <= 1e-12 && mono_violations == 0 &&
           gelfand_rel <= 1e-10;
  o.detail = fmt("plancherel %.2g, composition %.2g, gelfand %.2g", plancherel_rel,
                 comp_rel, gelfand_rel) +
             fmt(", monotonicity violations %g", double(mono_violations));
  return o;
}

// ---- criterion 3: noise identities --------------------------------------

Outcome criterion_noise() {
  const Grid g = make_grid(3, 32, 8.0);
  SpectralTransform tr(g);
  NoiseSpec spec;
  spec.mode_count = 16;
  NoiseModel model = build_noise_model(spec, g);

  ScalarField x = random_field(g, 555, 1.0);
  IsometryReport iso = ito_isometry_check(model, tr, x, 10000, 1e-3, 1.0, 99);
  bool iso_ok = true;
  double worst_rel = 0.0;
  for (const auto& s : iso.spaces) {
    iso_ok = iso_ok && s.within_band;
    worst_rel = std::max(worst_rel, s.rel_deviation);
  }

  double cov_rel = 0.0;
  {
    ScalarField ssx = strat_correction(x, model);
    double expect = 0.0;
    for (int k = 0; k < model.mode_count(); ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = model.modes[k].field.values[i] * x.values[i];
        acc += v * v;
      }
      expect += model.modes[k].mu * acc * g.cell_volume();
    }
    cov_rel = std::fabs(inner_l2(ssx, x) - expect) / std::max(expect, 1e-300);
  }

  int sign_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField z = random_field(g, 600 + trial);
    ScalarField ssz = strat_correction(z, model);
    double pair = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      pair += ssz.values[i] * std::max(-z.values[i], 0.0);
    if (pair * g.cell_volume() > 0.0) ++sign_violations;
  }

  Outcome o;
  o.pass = iso_ok && cov_rel <= 1e-10 && sign_violations == 0;
  o.detail = fmt("isometry rel dev %.3g (in band %g), covariance rel %.2g", worst_rel,
                 iso_ok ? 1.0 : 0.0, cov_rel) +
             fmt(", sign violations %g", double(sign_violations));
  return o;
}

// ---- criteria 4 + 5 share the lambda = 0.25 ensemble ---------------------

struct EnergyRun {
  RunConfig cfg;
  RunOutcome outcome;
  EnergyReport report;
};

EnergyRun run_energy_ensemble(double lambda, int paths, std::uint64_t seed) {
  EnergyRun er;
  er.cfg = desk_config();
  er.cfg.lambda = lambda;
  er.cfg.paths = paths;
  er.cfg.seed = seed;
  er.cfg.out_dir = "";  // no artifacts from the gate
  NoiseModel model = build_noise_model(er.cfg.noise, config_grid(er.cfg));
  er.outcome = run_ensemble(er.cfg, model);
  er.report = energy_balance_check(er.outcome.paths, to_sim_config(er.cfg), model);
  return er;
}

Outcome criterion_positivity(const EnergyRun& main_run) {
  int bad_records = 0;
  std::size_t checked = 0;
  for (const PathDiagnostics& p : main_run.outcome.paths)
    for (const DiagRecord& r : p.records) {
      ++checked;
      if (r.neg_fraction != 0.0 || !(r.min_value > 0.0)) ++bad_records;
    }

  // Detector: inflate dt fourfold on a rough configuration and require the
  // undershoot (or outright blow-up) to be reported.
  RunConfig hard = desk_config();
  hard.lambda = 0.1;
  hard.datum.floor = 0.005;
  hard.datum.amplitude = 2.0;
  hard.datum.width = 1.5;
  hard.noise.scale = 8.0;
  hard.t_final = 0.2;
  hard.paths = 1;
  hard.diag_energy = false;
  SimConfig sim = to_sim_config(hard);
  sim.dt = 4.0 * stability_bound(sim.grid, sim.params, sim.c_stab);
  sim.skip_dt_validation = true;
  NoiseModel model = build_noise_model(sim.noise, sim.grid);
  SpectralTransform tr(sim.grid);
  bool detected = false;
  std::string how = "no undershoot seen";
  for (std::uint64_t path = 0; path < 8 && !detected; ++path) {
    try {
      PathDiagnostics d = simulate_path(sim, model, tr, path);
      for (const DiagRecord& r : d.records)
        if (r.neg_fraction > 0.0 || r.min_value < 0.0) {
          detected = true;
          how = fmt("undershoot recorded (neg fraction %.3g)", r.neg_fraction);
          break;
        }
    } catch (const StabilityError&) {
      detected = true;
      how = "blow-up raised";
    }
  }

  Outcome o;
  o.pass = bad_records == 0 && detected;
  o.detail = fmt("%g records over 100 paths, %g negative", double(checked),
                 double(bad_records)) +
             "; 4x dt: " + how;
  return o;
}

// Coupled dt-halving allowance: same Brownian path at dt (refine 1) and
// dt/2 (refine 0); the sup-in-time slack difference measures the
// discretization bias of the balance at matching output times.
double halving_allowance(const RunConfig& base, int paths) {
  RunConfig coarse = base;
  coarse.paths = paths;
  SimConfig probe = to_sim_config(coarse);
  const TimeGrid tg = resolve_time_grid(probe);
  coarse.dt = tg.dt;
  coarse.noise_refine = 1;
  RunConfig fine = coarse;
  fine.dt = tg.dt / 2.0;
  fine.noise_refine = 0;
  fine.output_stride = 2;

  NoiseModel model = build_noise_model(base.noise, config_grid(base));
  RunOutcome oc = run_ensemble(coarse, model);
  RunOutcome of = run_ensemble(fine, model);
  EnergyReport rc = energy_balance_check(oc.paths, to_sim_config(coarse), model);
  EnergyReport rf = energy_balance_check(of.paths, to_sim_config(fine), model);
  double worst = 0.0;
  for (std::size_t i = 0; i < rc.points.size() && i < rf.points.size(); ++i)
    worst = std::max(worst, std::fabs(rc.points[i].slack - rf.points[i].slack));
  return 2.0 * worst;
}

Outcome criterion_energy(const EnergyRun& quarter_run) {
  Outcome o;
  o.pass = true;
  for (double lambda : {0.5, 0.25}) {
    const EnergyRun local =
        lambda == 0.25 ? EnergyRun{} : run_energy_ensemble(lambda, 100, 2026);
    const EnergyRun& er = lambda == 0.25 ? quarter_run : local;

    RunConfig allow_cfg = er.cfg;
    const double allowance = halving_allowance(allow_cfg, 8);

    double scale = 1.0;
    for (const EnergyPoint& p : er.report.points)
      scale = std::max(scale, std::fabs(p.rhs));
    double worst = 1e300;
    for (const EnergyPoint& p : er.report.points)
      worst = std::min(worst, p.slack + p.band3 + allowance);
    const bool driven_ok = worst >= -1e-12 * scale && !er.report.phi_flagged;

    // Deterministic reduction: the balance becomes an identity, checked
    // two-sided against its own measured quadrature error.
    RunConfig det = er.cfg;
    det.drive = false;
    det.paths = 1;
    NoiseModel model = build_noise_model(det.noise, config_grid(det));
    RunOutcome d1 = run_ensemble(det, model);
    EnergyReport e1 = energy_balance_check(d1.paths, to_sim_config(det), model);
    RunConfig det_half = det;
    SimConfig probe = to_sim_config(det);
    det_half.dt = resolve_time_grid(probe).dt / 2.0;
    det_half.output_stride = 2;
    RunOutcome d2 = run_ensemble(det_half, model);
    EnergyReport e2 = energy_balance_check(d2.paths, to_sim_config(det_half), model);

    double det_scale = 1.0;
    double slack_inf = 0.0, diff_inf = 0.0;
    for (std::size_t i = 0; i < e1.points.size() && i < e2.points.size(); ++i) {
      det_scale = std::max(det_scale, std::fabs(e1.points[i].rhs));
      slack_inf = std::max(slack_inf, std::fabs(e1.points[i].slack));
      diff_inf = std::max(diff_inf, std::fabs(e1.points[i].slack - e2.points[i].slack));
    }
    const double quad_tol = 4.0 * diff_inf + 1e-9 * det_scale;
    const bool det_two_sided = slack_inf <= quad_tol;
    const bool det_dissipative = e1.min_slack >= -quad_tol;

    o.pass = o.pass && driven_ok && det_two_sided && det_dissipative;
    o.detail += fmt("lambda %.2g: min(slack+band+allow) %.3g", lambda, worst) +
                fmt(" (allow %.3g), det slack %.3g vs quad tol %.3g; ", allowance,
                    slack_inf, quad_tol);
  }
  return o;
}

// ---- criterion 6: moment-bound constants ---------------------------------

Outcome criterion_moments() {
  double worst_hm1_ratio = 1.0, worst_l2_ratio = 1.0;
  double hm1_min = 1e300, hm1_max = 0.0, l2_min = 1e300, l2_max = 0.0;
  for (double lambda : {0.5, 0.25})
    for (double nu : {0.1, 0.05})
      for (double eps : {0.004, 0.002}) {
        RunConfig cfg = desk_config();
        cfg.lambda = lambda;
        cfg.nu = nu;
        cfg.epsilon = eps;
        cfg.mode = "yosida";
        cfg.solver_tol = 1e-8;
        cfg.t_final = 0.5;
        cfg.output_stride = 8;
        cfg.paths = 20;
        cfg.diag_energy = false;
        NoiseModel model = build_noise_model(cfg.noise, config_grid(cfg));
        RunOutcome oc = run_ensemble(cfg, model);
        MomentFit fit = moment_bound_check(oc.paths);
        hm1_min = std::min(hm1_min, fit.c_hm1_sup);
        hm1_max = std::max(hm1_max, fit.c_hm1_sup);
        l2_min = std::min(l2_min, fit.c_l2_esssup);
        l2_max = std::max(l2_max, fit.c_l2_esssup);
      }
  worst_hm1_ratio = hm1_max / hm1_min;
  worst_l2_ratio = l2_max / l2_min;

  // Deterministic reduction at one cell: the dual norm never grows, so the
  // fitted sup constant is exactly the t = 0 ratio.
  RunConfig det = desk_config();
  det.lambda = 0.25;
  det.nu = 0.1;
  det.epsilon = 0.002;
  det.mode = "yosida";
  det.t_final = 0.5;
  det.output_stride = 8;
  det.paths = 1;
  det.drive = false;
  det.diag_energy = false;
  NoiseModel model = build_noise_model(det.noise, config_grid(det));
  RunOutcome oc = run_ensemble(det, model);
  MomentFit det_fit = moment_bound_check(oc.paths);
  const bool det_ok = std::fabs(det_fit.c_hm1_sup - 1.0) <= 1e-9;

  Outcome o;
  o.pass = worst_hm1_ratio <= 2.0 && worst_l2_ratio <= 2.0 && det_ok;
  o.detail = fmt("dual-norm C spread %.3f, flat-norm C spread %.3f, deterministic C %.12f",
                 worst_hm1_ratio, worst_l2_ratio, det_fit.c_hm1_sup);
  return o;
}

// ---- criterion 7: nu-rate ------------------------------------------------

Outcome criterion_nu_rate() {
  RunConfig cfg = desk_config();
  cfg.lambda = 0.25;
  cfg.t_final = 0.5;
  cfg.paths = 50;
  cfg.output_stride = 4;
  cfg.diag_energy = false;
  NoiseModel model = build_noise_model(cfg.noise, config_grid(cfg));
  SpectralTransform tr(config_grid(cfg));

  SimConfig sim = to_sim_config(cfg);
  ScheduleSpec sched;
  sched.nus = {0.2, 0.1, 0.05, 0.025};
  CascadeReport rep = cascade_study(sim, sched, model, tr);

  SimConfig tiny = sim;
  tiny.n_paths = 2;
  tiny.t_final = 0.1;
  ScheduleSpec same;
  same.nus = {0.1, 0.1};
  CascadeReport zero = cascade_study(tiny, same, model, tr);

  Outcome o;
  const bool zero_ok = !zero.nu_stage.empty() && zero.nu_stage[0].mean_sup_dist_sq == 0.0;
  o.pass = rep.nu_rate_alpha >= 0.8 && zero_ok;
  o.detail = fmt("fitted alpha %.3f over 50 paths; identical-pair distance %.1g",
                 rep.nu_rate_alpha,
                 zero.nu_stage.empty() ? -1.0 : zero.nu_stage[0].mean_sup_dist_sq);
  return o;
}

// ---- criterion 8: outer resolvent ----------------------------------------

Outcome criterion_resolvent() {
  // Reference run: every inner solve at or below the pinned residual.
  RunConfig ref = desk_config();
  ref.lambda = 0.25;
  ref.nu = 0.1;
  ref.epsilon = 0.002;
  ref.mode = "yosida";
  ref.solver_tol = 1e-10;
  ref.t_final = 0.2;
  ref.paths = 1;
  ref.diag_energy = false;
  NoiseModel model = build_noise_model(ref.noise, config_grid(ref));
  RunOutcome oc = run_ensemble(ref, model);
  double worst_resid = 0.0;
  for (const DiagRecord& r : oc.paths[0].records)
    worst_resid = std::max(worst_resid, r.solver_resid);

  // Linearization around a constant background: remainder is quadratic in
  // the perturbation amplitude.
  const Grid g = config_grid(ref);
  SpectralTransform tr(g);
  RegularizationParams p;
  p.lambda = 0.25;
  p.nu = 0.0;
  p.epsilon = 0.05;
  p.solver_tol = 1e-12;
  YosidaParams yp(p.lambda);
  const double wp = rectified_derivative(1.0, yp);
  const double k2 = 2.0 * kPi / g.half_length;  // axis-0 mode 2
  auto linear_error = [&](double delta) {
    ScalarField x(g, 1.0);
    for (int i = 0; i < g.n; ++i) {
      const double v = delta * std::cos(k2 * g.coordinate(i));
      for (int jk = 0; jk < g.n * g.n; ++jk)
        x.values[static_cast<std::size_t>(i) * g.n * g.n + jk] += v;
    }
    ScalarField u = resolvent_full_drift(x, p, tr);
    const double gain = 1.0 / (1.0 + p.epsilon * k2 * k2 * wp);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i) {
      const double lin = 1.0 + delta * gain * std::cos(k2 * g.coordinate(i));
      for (int jk = 0; jk < g.n * g.n; ++jk)
        worst = std::max(worst, std::fabs(u.values[static_cast<std::size_t>(i) * g.n * g.n + jk] - lin));
    }
    return worst;
  };
  const double e1 = linear_error(1e-3);
  const double e2 = linear_error(5e-4);
  const double ratio = e1 / e2;

  // Epsilon schedule hugging the direct path.
  RunConfig casc = desk_config();
  casc.lambda = 0.25;
  casc.nu = 0.1;
  casc.t_final = 0.2;
  casc.paths = 10;
  casc.output_stride = 4;
  casc.diag_energy = false;
  SimConfig sim = to_sim_config(casc);
  sim.params.solver_tol = 1e-8;
  ScheduleSpec sched;
  sched.epsilons = {0.016, 0.008, 0.004, 0.002};
  NoiseModel cmodel = build_noise_model(casc.noise, config_grid(casc));
  SpectralTransform ctr(config_grid(casc));
  CascadeReport rep = cascade_study(sim, sched, cmodel, ctr);

  Outcome o;
  o.pass = worst_resid <= 1e-10 * (1.0 + 1e-9) && ratio >= 3.0 && ratio <= 5.5 &&
           rep.eps_monotone;
  o.detail = fmt("worst residual %.3g, remainder ratio %.2f, schedule monotone %g",
                 worst_resid, ratio, rep.eps_monotone ? 1.0 : 0.0);
  return o;
}

// ---- criterion 9: weak-form residual --------------------------------------

Outcome criterion_weak_form() {
  RunConfig cfg = desk_config();
  cfg.lambda = 0.25;
  cfg.t_final = 0.25;
  cfg.paths = 1;
  cfg.weak_modes = 8;
  cfg.diag_energy = false;
  // Asymmetric datum: against the centered bump, one symmetric mode's
  // leading pairing cancels and its residual is all higher-order terms.
  cfg.datum.profile = "floor_two_bumps";
  NoiseModel model = build_noise_model(cfg.noise, config_grid(cfg));
  SpectralTransform tr(config_grid(cfg));

  SimConfig coarse = to_sim_config(cfg);
  const TimeGrid tg = resolve_time_grid(coarse);
  coarse.dt = tg.dt;
  coarse.noise_refine = 1;
  SimConfig fine = coarse;
  fine.dt = tg.dt / 2.0;
  fine.noise_refine = 0;
  fine.output_stride = 2;

  PathDiagnostics dc = simulate_path(coarse, model, tr, 0);
  PathDiagnostics df = simulate_path(fine, model, tr, 0);

  int compared = 0, in_range = 0;
  double worst_ratio = 0.0;
  for (int j = 0; j < 8; ++j) {
    WeakResidualSeries sc = weak_form_residual(dc, model, j);
    WeakResidualSeries sf = weak_form_residual(df, model, j);
    const double floor = 1e-14 * std::max(1.0, std::fabs(dc.weak_value.back()[j]));
    if (sc.final_residual < floor && sf.final_residual < floor) continue;
    const double ratio = sc.final_residual / sf.final_residual;
    ++compared;
    if (ratio >= 1.4 && ratio <= 2.6) ++in_range;
    worst_ratio = std::max(worst_ratio, std::fabs(ratio - 2.0));
  }

  Outcome o;
  o.pass = compared >= 4 && in_range == compared;
  o.detail = fmt("%g modes compared, %g ratios within 2 +/- 0.6 (worst offset %.2f)",
                 double(compared), double(in_range), worst_ratio);
  return o;
}

// ---- criterion 10: reproducibility ----------------------------------------

Outcome criterion_reproducibility() {
  RunConfig cfg = desk_config();
  cfg.t_final = 0.05;
  cfg.paths = 4;
  cfg.seed = 9;
  NoiseModel model = build_noise_model(cfg.noise, config_grid(cfg));

  cfg.workers = 1;
  RunOutcome serial = run_ensemble(cfg, model);
  cfg.workers = 3;
  RunOutcome threaded = run_ensemble(cfg, model);
  RunOutcome again = run_ensemble(cfg, model);

  const std::string csv_serial = diagnostics_csv(serial.paths);
  const std::string csv_threaded = diagnostics_csv(threaded.paths);
  const std::string csv_again = diagnostics_csv(again.paths);
  const bool workers_equal = csv_serial == csv_threaded;
  const bool repeat_equal = csv_threaded == csv_again;
  const std::string man9 = manifest_hash(cfg);
  const std::string cfg9 = config_hash(cfg);
  const bool hash_equal = man9 == manifest_hash(cfg);

  cfg.seed = 10;
  const bool seed_separates = manifest_hash(cfg) != man9 && config_hash(cfg) == cfg9 &&
                              diagnostics_csv(run_ensemble(cfg, model).paths) != csv_serial;

  Outcome o;
  o.pass = workers_equal && repeat_equal && hash_equal && seed_separates;
  o.detail = std::string("worker-count invariant ") + (workers_equal ? "yes" : "NO") +
             ", repeat identical " + (repeat_equal ? "yes" : "NO") +
             ", seed separates " + (seed_separates ? "yes" : "NO");
  return o;
}

} // namespace

int main() {
  bool all_pass = true;
  int done = 0;
  auto print = [&](int id, const char* name, const Outcome& o, double secs) {
    std::printf("[PRIMARY %d] %s: %s (%s) [%.1fs]\n", id, name,
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
    ++done;
  };
  auto guard = [&](auto&& fn) -> Outcome {
    try {
      return fn();
    } catch (const std::exception& e) {
      Outcome o;
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
      return o;
    }
  };

  auto timed = [&](int id, const char* name, auto&& fn) {
    const double start = now_seconds();
    const Outcome o = guard(fn);
    print(id, name, o, now_seconds() - start);
  };

  timed(1, "scalar calculus", criterion_scalar);
  timed(2, "spectral identities", criterion_spectral);
  timed(3, "noise identities", criterion_noise);

  // The lambda = 0.25 driven ensemble feeds both positivity and energy.
  double t0 = now_seconds();
  EnergyRun shared;
  Outcome pos;
  try {
    shared = run_energy_ensemble(0.25, 100, 2026);
    pos = guard([&] { return criterion_positivity(shared); });
  } catch (const std::exception& e) {
    pos.pass = false;
    pos.detail = std::string("exception: ") + e.what();
  }
  print(4, "positivity and undershoot detector", pos, now_seconds() - t0);
  t0 = now_seconds();
  const Outcome ener = shared.outcome.paths.empty()
                           ? Outcome{false, "ensemble unavailable"}
                           : guard([&] { return criterion_energy(shared); });
  print(5, "energy balance", ener, now_seconds() - t0);

  timed(6, "moment-bound constants", criterion_moments);
  timed(7, "shift-parameter rate", criterion_nu_rate);
  timed(8, "outer resolvent", criterion_resolvent);
  timed(9, "weak-form residual", criterion_weak_form);
  timed(10, "reproducibility", criterion_reproducibility);

  std::printf("%d/10 criteria evaluated, overall %s\n", done, all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}
