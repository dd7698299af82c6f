#include <doctest.h>

#include <cmath>

#include "logdiff/diagnostics.hpp"
#include "logdiff/rng.hpp"

using namespace logdiff;

namespace {

SimConfig tiny_config_1d() {
  SimConfig cfg;
  cfg.grid = make_grid(1, 32, 8.0);
  cfg.noise.mode_count = 8;
  cfg.params.lambda = 0.25;
  cfg.t_final = 0.1;
  cfg.datum.floor = 1.0;
  cfg.datum.amplitude = 0.5;
  cfg.datum.width = 2.0;
  cfg.seed = 3;
  return cfg;
}

// Hand-built trajectory with two records on a shared time grid.
PathDiagnostics synthetic_path(double scale) {
  PathDiagnostics d;
  d.dt = 0.05;
  d.lambda = 0.25;
  d.records.resize(3);
  for (int i = 0; i < 3; ++i) {
    DiagRecord& r = d.records[i];
    r.time = 0.05 * i;
    r.l2_sq = scale * (1.0 + i);
    r.hm1_nu_sq = scale * (2.0 + i);
    r.hm1_one_sq = scale * (3.0 + i);
    r.hm1_homog_sq = scale * (0.5 + i);
    r.phi = scale * (4.0 - i);
    r.grad_psi_sq = scale;
    r.mass = scale;
    r.min_value = scale;
    r.neg_fraction = 0.0;
    r.leakage = 0.1 * scale;
    r.int_grad_psi_sq = scale * r.time;
    r.int_l2_sq = scale * r.time;
  }
  d.datum_l2_sq = scale;
  d.datum_hm1_nu_sq = scale;
  d.datum_hm1_one_sq = scale;
  d.datum_phi = scale * 4.0;
  return d;
}

} // namespace

TEST_CASE("energy functional closed forms") {
  const Grid g = make_grid(1, 32, 8.0);  // box volume 16
  const double vol = 16.0;

  // Constant one: j_lambda(1) = j(1) = -1, quadratic term lambda/2.
  ScalarField one(g, 1.0);
  PhiResult p1 = phi_lambda(one, 0.5);
  CHECK(p1.value == doctest::Approx(vol * (-1.0 + 0.25)).epsilon(1e-13));
  CHECK(!p1.flagged);

  // Constant zero: envelope value at zero, no quadratic term.
  ScalarField zero(g, 0.0);
  PhiResult p0 = phi_lambda(zero, 0.5);
  CHECK(p0.value == doctest::Approx(vol * -0.60803678652288196).epsilon(1e-13));
  CHECK(!p0.flagged);

  // Generic constant agrees with the scalar quadrature.
  YosidaParams yp(0.5);
  ScalarField c(g, 2.5);
  PhiResult pc = phi_lambda(c, yp);
  const double expect = vol * (moreau_envelope(2.5, yp) + 0.25 * 2.5 * 2.5);
  CHECK(pc.value == doctest::Approx(expect).epsilon(1e-13));

  // The envelope never exceeds the exact potential.
  ScalarField mix(g);
  for (int i = 0; i < g.n; ++i) mix.values[i] = 0.5 + 0.1 * i;
  const double phi_val = phi_lambda(mix, yp).value;
  double exact = 0.0;
  for (int i = 0; i < g.n; ++i)
    exact += potential(mix.values[i]) + 0.25 * mix.values[i] * mix.values[i];
  exact *= g.cell_volume();
  CHECK(phi_val <= exact + 1e-12);
}

TEST_CASE("negative values flow through the envelope continuation") {
  const Grid g = make_grid(1, 32, 8.0);
  ScalarField f(g, 1.0);
  f.values[3] = -0.2;
  YosidaParams yp(0.25);
  PhiResult p = phi_lambda(f, yp);
  CHECK(p.flagged);
  CHECK(std::isfinite(p.value));
  // The continuation is the same formula evaluated at the negative point:
  // j(J(r)) + (r - J)^2 / (2 lambda) with J still positive.
  const double r = -0.2;
  const double J = resolvent(r, yp);
  const double cont = potential(J) + (r - J) * (r - J) / (2.0 * 0.25);
  ScalarField base(g, 1.0);
  const double delta = p.value - phi_lambda(base, yp).value;
  const double expect =
      (cont + 0.125 * r * r - (moreau_envelope(1.0, yp) + 0.125)) * g.cell_volume();
  CHECK(delta == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("entropy integral") {
  const Grid g = make_grid(1, 32, 8.0);
  ScalarField one(g, 1.0);
  CHECK(entropy_integral(one) == doctest::Approx(-16.0).epsilon(1e-13));
  ScalarField zero(g, 0.0);
  CHECK(entropy_integral(zero) == doctest::Approx(0.0));
  ScalarField neg(g, 1.0);
  neg.values[0] = -1.0;
  CHECK_THROWS_AS(entropy_integral(neg), DomainError);
}

TEST_CASE("log-log slope fit recovers an exact power law") {
  std::vector<double> xs = {0.1, 0.2, 0.4, 0.8};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * x * x);
  RateFit fit = fit_log_log_slope(xs, ys);
  CHECK(fit.alpha == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit.log_c) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.n_points == 4);
  CHECK_THROWS_AS(fit_log_log_slope({1.0, 2.0}, {1.0}), ParamError);
  // Nonpositive samples are dropped, and an underdetermined fit is inert.
  RateFit dropped = fit_log_log_slope({1.0, -2.0}, {1.0, 1.0});
  CHECK(dropped.n_points == 1);
  CHECK(dropped.alpha == 0.0);
}

TEST_CASE("rate check over a synthetic pair schedule") {
  std::vector<PairDistance> stage;
  for (double gap : {0.4, 0.2, 0.1}) {
    PairDistance p;
    p.param_a = 2.0 * gap;
    p.param_b = gap;  // gap = |a - b| = gap
    p.mean_sup_dist_sq = 5.0 * gap;
    stage.push_back(p);
  }
  RateFit fit = nu_rate_check(stage);
  CHECK(fit.alpha == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("energy balance arithmetic on synthetic trajectories") {
  SimConfig cfg = tiny_config_1d();
  cfg.noise_off = true;
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);

  std::vector<PathDiagnostics> ens = {synthetic_path(1.0), synthetic_path(2.0)};
  EnergyReport rep = energy_balance_check(ens, cfg, model);
  CHECK(rep.n_paths == 2);
  CHECK(rep.coeff == 0.0);  // drive off
  REQUIRE(rep.points.size() == 3);
  // t = 0: lhs = mean phi(0) = 1.5*4, rhs = mean datum phi; slack 0.
  CHECK(rep.points[0].slack == doctest::Approx(0.0).epsilon(1e-12));
  // t = 0.1: lhs = mean(phi) + mean(int_grad) with trapezoid int on the
  // output grid; synthetic int_grad matches scale * t.
  const double mphi = 0.5 * (2.0 + 4.0);      // records[2].phi means
  const double mint = 0.5 * (0.1 + 0.2);      // scale * 0.1
  CHECK(rep.points[2].lhs == doctest::Approx(mphi + mint).epsilon(1e-12));
  CHECK(rep.points[2].rhs == doctest::Approx(0.5 * (4.0 + 8.0)).epsilon(1e-12));
  CHECK(rep.min_slack <= rep.points[0].slack + 1e-15);

  cfg.noise_off = false;
  EnergyReport driven = energy_balance_check(ens, cfg, model);
  CHECK(driven.coeff ==
        doctest::Approx(model.sum_mu_sup_sq * (cfg.params.lambda + 1.0)).epsilon(1e-13));
  CHECK(driven.points[2].rhs > rep.points[2].rhs);

  cfg.params.lambda = 0.6;
  CHECK_THROWS_AS(energy_balance_check(ens, cfg, model), ParamError);
  cfg.params.lambda = 0.25;
  CHECK_THROWS_AS(energy_balance_check({}, cfg, model), ParamError);
}

TEST_CASE("energy balance holds on a driven run") {
  SimConfig cfg = tiny_config_1d();
  cfg.params.lambda = 0.25;
  cfg.t_final = 0.1;
  cfg.n_paths = 8;
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);
  SpectralTransform tr(cfg.grid);
  std::vector<PathDiagnostics> ens;
  for (int p = 0; p < 8; ++p) ens.push_back(simulate_path(cfg, model, tr, p));
  EnergyReport rep = energy_balance_check(ens, cfg, model);
  CHECK(!rep.phi_flagged);
  CHECK(rep.min_slack_plus_band >= 0.0);
}

TEST_CASE("moment fits on synthetic trajectories") {
  std::vector<PathDiagnostics> ens = {synthetic_path(1.0), synthetic_path(1.0)};
  MomentFit fit = moment_bound_check(ens);
  CHECK(fit.n_paths == 2);
  // sup_t l2_sq = 3 against datum 1.
  CHECK(fit.c_l2_sup == doctest::Approx(3.0).epsilon(1e-12));
  // hm1 records run 2, 3, 4: sup over the t = 0 value.
  CHECK(fit.c_hm1_sup == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.c_l2_esssup == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.c_hm1_band3 == doctest::Approx(0.0));

  PathDiagnostics bad = synthetic_path(1.0);
  bad.records.front().l2_sq = 0.0;
  CHECK_THROWS_AS(moment_bound_check({bad}), ParamError);
  CHECK_THROWS_AS(moment_bound_check({}), ParamError);
}

TEST_CASE("gradient bound fit on a unit datum") {
  const Grid g = make_grid(1, 32, 8.0);
  ScalarField one(g, 1.0);
  // denominator = 1 + |x|^2 + entropy = 1 + 16 - 16 = 1.
  std::vector<PathDiagnostics> ens = {synthetic_path(1.0)};
  GradientFit fit = gradient_bound_fit(ens, one);
  CHECK(fit.denominator == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.numerator == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fit.c_fitted == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("weak-form residual replay on synthetic series") {
  PathDiagnostics d = synthetic_path(1.0);
  CHECK_THROWS_AS(weak_form_residual(d, NoiseModel{}, 0), ReplayError);

  d.weak_mode_count = 2;
  d.weak_value = {{1.0, 2.0}, {1.3, 2.2}, {1.5, 2.5}};
  d.weak_drift_int = {{0.0, 0.0}, {0.2, 0.1}, {0.4, 0.3}};
  d.weak_stoch_int = {{0.0, 0.0}, {0.1, 0.05}, {0.1, 0.15}};
  NoiseModel model;
  model.modes.resize(2);
  WeakResidualSeries s = weak_form_residual(d, model, 1);
  REQUIRE(s.time.size() == 3);
  CHECK(s.residual[0] == doctest::Approx(0.0));
  // r(t) = |<X(t),e> - <X(0),e> - drift - stoch|.
  CHECK(s.residual[1] == doctest::Approx(std::fabs(2.2 - 2.0 - 0.1 - 0.05)).epsilon(1e-12));
  CHECK(s.final_residual == doctest::Approx(std::fabs(2.5 - 2.0 - 0.3 - 0.15)).epsilon(1e-12));
  CHECK_THROWS_AS(weak_form_residual(d, model, 2), ReplayError);
  CHECK_THROWS_AS(weak_form_residual(d, model, -1), ReplayError);
}

TEST_CASE("weak-form residual scales linearly in dt on a real run") {
  SimConfig cfg = tiny_config_1d();
  cfg.t_final = 0.05;
  cfg.diag.weak_modes = 4;
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);
  SpectralTransform tr(cfg.grid);

  TimeGrid tg = resolve_time_grid(cfg);
  SimConfig coarse = cfg;
  coarse.dt = tg.dt;
  coarse.noise_refine = 1;
  SimConfig fine = cfg;
  fine.dt = tg.dt / 2.0;
  fine.noise_refine = 0;
  fine.output_stride = 2;

  PathDiagnostics dc = simulate_path(coarse, model, tr, 0);
  PathDiagnostics df = simulate_path(fine, model, tr, 0);
  REQUIRE(dc.records.size() == df.records.size());

  int compared = 0;
  for (int j = 0; j < 4; ++j) {
    WeakResidualSeries sc = weak_form_residual(dc, model, j);
    WeakResidualSeries sf = weak_form_residual(df, model, j);
    const double scale = std::fabs(sc.time.back());
    if (sc.final_residual < 1e-14 * std::max(scale, 1.0) &&
        sf.final_residual < 1e-14 * std::max(scale, 1.0))
      continue;  // both below noise floor
    const double ratio = sc.final_residual / sf.final_residual;
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.6);
    ++compared;
  }
  CHECK(compared >= 1);
}

TEST_CASE("weak-form residual vanishes on a stationary deterministic run") {
  SimConfig cfg = tiny_config_1d();
  cfg.noise_off = true;
  cfg.datum.profile = "constant";
  cfg.params.nu = 0.0;
  cfg.t_final = 0.05;
  cfg.diag.weak_modes = 3;
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);
  SpectralTransform tr(cfg.grid);
  PathDiagnostics d = simulate_path(cfg, model, tr, 0);
  for (int j = 0; j < 3; ++j) {
    WeakResidualSeries s = weak_form_residual(d, model, j);
    for (double r : s.residual) CHECK(std::fabs(r) <= 1e-12);
  }
}

TEST_CASE("ensemble summary means and bands") {
  std::vector<PathDiagnostics> ens = {synthetic_path(1.0), synthetic_path(3.0)};
  EnsembleReport rep = summarize_ensemble(ens);
  CHECK(rep.n_paths == 2);
  REQUIRE(rep.l2_sq.time.size() == 3);
  CHECK(rep.l2_sq.mean[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep.phi.mean[2] == doctest::Approx(4.0).epsilon(1e-14));
  // band3 = 3 * std / sqrt(n) with the n-1 denominator: values 1 and 3
  // give std = sqrt(2), band = 3 sqrt(2) / sqrt(2) = 3.
  CHECK(rep.l2_sq.band3[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(rep.mass.mean[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(rep.leakage.mean[0] == doctest::Approx(0.2).epsilon(1e-12));

  // Mismatched grids are rejected.
  std::vector<PathDiagnostics> bad = {synthetic_path(1.0), synthetic_path(1.0)};
  bad[1].records.pop_back();
  CHECK_THROWS_AS(summarize_ensemble(bad), ParamError);
  CHECK_THROWS_AS(summarize_ensemble({}), ParamError);
}
