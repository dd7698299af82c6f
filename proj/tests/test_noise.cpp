#include <doctest.h>

#include <cmath>

#include "logdiff/noise.hpp"
#include "logdiff/rng.hpp"

using namespace logdiff;

namespace {

NoiseSpec dyadic_spec(int k, double scale = 1.0) {
  NoiseSpec s;
  s.family = "bump";
  s.mode_count = k;
  s.decay = "dyadic";
  s.scale = scale;
  return s;
}

ScalarField random_field(const Grid& g, std::uint64_t seed) {
  ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = 0.5 + 0.2 * normal_draw(seed, 0, i, 0);
  return f;
}

} // namespace

TEST_CASE("bump modes are supported inside the central half-box") {
  const Grid g = make_grid(2, 32, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  REQUIRE(model.mode_count() == 8);
  for (const NoiseMode& m : model.modes) {
    CHECK(m.sup_norm == doctest::Approx(max_abs(m.field)).epsilon(1e-15));
    CHECK(m.sup_norm > 0.0);
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        const double x = g.coordinate(i);
        const double y = g.coordinate(j);
        const double v = m.field.values[static_cast<std::size_t>(i) * g.n + j];
        const bool inside = std::fabs(x) < g.half_length / 2.0 + 1e-12 &&
                            std::fabs(y) < g.half_length / 2.0 + 1e-12;
        if (!inside) CHECK(v == 0.0);
      }
    }
  }
}

TEST_CASE("support patches reproduce the full field") {
  const Grid g = make_grid(2, 32, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  for (const NoiseMode& m : model.modes) {
    ScalarField rebuilt(g, 0.0);
    std::size_t p = 0;
    for (int i = 0; i < m.count[0]; ++i)
      for (int j = 0; j < m.count[1]; ++j)
        rebuilt.values[static_cast<std::size_t>(m.start[0] + i) * g.n +
                       (m.start[1] + j)] = m.patch[p++];
    CHECK(p == m.patch.size());
    for (std::size_t q = 0; q < rebuilt.size(); ++q)
      CHECK(rebuilt.values[q] == m.field.values[q]);
  }
}

TEST_CASE("dyadic intensities and derived constants") {
  const Grid g = make_grid(2, 32, 8.0);
  const double scale = 0.7;
  NoiseModel model = build_noise_model(dyadic_spec(8, scale), g);
  double c0 = 0.0, trace = 0.0, musup = 0.0;
  for (int k = 0; k < model.mode_count(); ++k) {
    const NoiseMode& m = model.modes[k];
    CHECK(m.mu == doctest::Approx(scale * std::pow(2.0, -(k + 1))).epsilon(1e-14));
    const double sup2 = m.sup_norm * m.sup_norm;
    const double grad2 = m.grad_ld_norm * m.grad_ld_norm;
    CHECK(m.mu_prime == doctest::Approx(sup2 + grad2 + 1.0).epsilon(1e-14));
    c0 += m.mu * std::max(sup2, 1.0) * (sup2 + 4.0 * grad2);
    trace += m.mu * m.mu_prime;
    musup += m.mu * sup2;
  }
  CHECK(model.c0 == doctest::Approx(c0).epsilon(1e-14));
  CHECK(model.trace_sum == doctest::Approx(trace).epsilon(1e-14));
  CHECK(model.sum_mu_sup_sq == doctest::Approx(musup).epsilon(1e-14));
  // sigma_sq really is sum mu_k e_k^2.
  ScalarField acc(g, 0.0);
  for (int k = 0; k < model.mode_count(); ++k)
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc.values[i] += model.modes[k].mu * model.e_sq_fields[k].values[i] ;
  for (std::size_t i = 0; i < acc.size(); ++i)
    CHECK(acc.values[i] == doctest::Approx(model.sigma_sq.values[i]).epsilon(1e-13));
}

TEST_CASE("covariance operator identities on random fields") {
  const Grid g = make_grid(2, 32, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField x(g);
    for (std::size_t i = 0; i < x.size(); ++i)
      x.values[i] = normal_draw(600 + trial, 0, i, 0);

    // <sigma sigma*(x), x> = sum_k mu_k ||e_k x||^2.
    ScalarField ssx(g, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      ssx.values[i] = model.sigma_sq.values[i] * x.values[i];
    double expect = 0.0;
    for (int k = 0; k < model.mode_count(); ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = model.modes[k].field.values[i] * x.values[i];
        acc += v * v;
      }
      expect += model.modes[k].mu * acc * g.cell_volume();
    }
    const double got = inner_l2(ssx, x);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));

    // Pairing against the negative part: diagonal multiplication keeps
    // sign structure, <sigma sigma*(x), x^-> = -sum mu ||e_k x^-||^2 <= 0.
    ScalarField xneg(g);
    for (std::size_t i = 0; i < x.size(); ++i)
      xneg.values[i] = std::max(-x.values[i], 0.0);
    double pair = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      pair += ssx.values[i] * xneg.values[i];
    CHECK(pair * g.cell_volume() <= 1e-12);
  }
}

TEST_CASE("increment scaling in the time step is exact") {
  const Grid g = make_grid(1, 32, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  WienerIncrement a = sample_increment(model, 0.001, 5, 3, 17);
  WienerIncrement b = sample_increment(model, 0.004, 5, 3, 17);
  // Same counters, four times the step: the assembled field doubles.
  for (std::size_t i = 0; i < a.assembled.size(); ++i)
    CHECK(b.assembled.values[i] == doctest::Approx(2.0 * a.assembled.values[i]).epsilon(1e-14));
  CHECK(a.gaussians == b.gaussians);
}

TEST_CASE("refined sampling telescopes across a step split") {
  const Grid g = make_grid(1, 32, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  const double dt = 0.01;
  for (std::uint64_t step : {0ull, 1ull, 7ull}) {
    WienerIncrement coarse = sample_increment(model, dt, 9, 2, step, 1);
    WienerIncrement f0 = sample_increment(model, dt / 2.0, 9, 2, 2 * step, 0);
    WienerIncrement f1 = sample_increment(model, dt / 2.0, 9, 2, 2 * step + 1, 0);
    for (std::size_t i = 0; i < coarse.assembled.size(); ++i) {
      const double fine = f0.assembled.values[i] + f1.assembled.values[i];
      CHECK(std::fabs(coarse.assembled.values[i] - fine) <=
            1e-15 * std::max(1.0, std::fabs(fine)));
    }
  }
}

TEST_CASE("increment sampling is reproducible and independent of history") {
  const Grid g = make_grid(2, 16, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  WienerIncrement first = sample_increment(model, 0.01, 123, 4, 9);
  sample_increment(model, 0.01, 123, 0, 0);  // unrelated draw in between
  WienerIncrement again = sample_increment(model, 0.01, 123, 4, 9);
  CHECK(first.gaussians == again.gaussians);
  CHECK(first.assembled.values == again.assembled.values);
  // Different path or step decorrelates.
  WienerIncrement other = sample_increment(model, 0.01, 123, 5, 9);
  CHECK(first.gaussians != other.gaussians);
}

TEST_CASE("statistical isometry of the driven increment") {
  const Grid g = make_grid(2, 16, 8.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  SpectralTransform tr(g);
  ScalarField x = random_field(g, 21);
  IsometryReport rep = ito_isometry_check(model, tr, x, 10000, 0.01, 1.0, 77);
  REQUIRE(rep.spaces.size() == 2);
  for (const IsometrySpaceReport& s : rep.spaces) {
    INFO("space ", s.space, " rel dev ", s.rel_deviation, " band ", s.band3_rel);
    CHECK(s.within_band);
    CHECK(s.expected > 0.0);
  }
  // A zero field stays well-defined.
  ScalarField zero(g, 0.0);
  IsometryReport zrep = ito_isometry_check(model, tr, zero, 100, 0.01, 1.0, 77);
  for (const IsometrySpaceReport& s : zrep.spaces) {
    CHECK(s.expected == 0.0);
    CHECK(std::isfinite(s.rel_deviation));
  }
}

TEST_CASE("stratonovich correction is the diagonal multiplier") {
  const Grid g = make_grid(1, 16, 4.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  ScalarField x = random_field(g, 31);
  ScalarField c = strat_correction(x, model);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(c.values[i] == doctest::Approx(model.sigma_sq.values[i] * x.values[i]).epsilon(1e-15));
  WienerIncrement dw = sample_increment(model, 0.01, 1, 0, 0);
  ScalarField sx = sigma_apply(x, dw);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(sx.values[i] == x.values[i] * dw.assembled.values[i]);
}

TEST_CASE("decay-law summability is enforced") {
  const Grid g = make_grid(1, 32, 8.0);
  NoiseSpec s = dyadic_spec(8);
  s.decay = "power";
  s.decay_rate = 1.0;  // harmonic series, not summable
  CHECK_THROWS_AS(build_noise_model(s, g), SummabilityError);
  s.decay_rate = 1.01;  // summable but the truncation tail dominates
  CHECK_THROWS_AS(build_noise_model(s, g), SummabilityError);
  s.decay = "geometric";
  s.decay_rate = 1.0;
  CHECK_THROWS_AS(build_noise_model(s, g), SummabilityError);
  s.decay_rate = 0.5;
  CHECK_NOTHROW(build_noise_model(s, g));
  s.decay = "martingale";
  CHECK_THROWS_AS(build_noise_model(s, g), ParamError);
}

TEST_CASE("constant family closed forms") {
  const Grid g = make_grid(2, 16, 4.0);
  NoiseSpec s;
  s.family = "constant";
  s.mode_count = 1;
  s.constant_value = 2.0;
  s.scale = 0.5;
  NoiseModel model = build_noise_model(s, g);
  REQUIRE(model.mode_count() == 1);
  const NoiseMode& m = model.modes[0];
  CHECK(m.sup_norm == doctest::Approx(2.0));
  CHECK(m.grad_ld_norm == doctest::Approx(0.0));
  CHECK(m.mu_prime == doctest::Approx(5.0));
  for (double v : m.field.values) CHECK(v == 2.0);
  CHECK(model.sum_mu_sup_sq == doctest::Approx(m.mu * 4.0));
}

TEST_CASE("refinement depth is bounded") {
  const Grid g = make_grid(1, 16, 4.0);
  NoiseModel model = build_noise_model(dyadic_spec(8), g);
  CHECK_THROWS_AS(sample_increment(model, 0.01, 1, 0, 0, 31), ParamError);
  CHECK_THROWS_AS(sample_increment(model, 0.01, 1, 0, 0, -1), ParamError);
  CHECK_THROWS_AS(sample_increment(model, -0.01, 1, 0, 0, 0), ParamError);
}
