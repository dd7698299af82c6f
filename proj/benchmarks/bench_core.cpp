// Microbenchmarks for the hot paths: scalar resolvent solves, whole-field
// rectified passes, transform round trips, and full integrator steps.

#include <benchmark/benchmark.h>

#include "logdiff/monotone.hpp"
#include "logdiff/noise.hpp"
#include "logdiff/rng.hpp"
#include "logdiff/solver.hpp"
#include "logdiff/transform.hpp"

using namespace logdiff;

namespace {

ScalarField sample_field(const Grid& g, std::uint64_t seed) {
  ScalarField f(g, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] += 0.25 * to_unit(key_hash(seed, 0, i, 0));
  return f;
}

SimConfig desk_sim(StepMode mode) {
  SimConfig cfg;
  cfg.grid = make_grid(3, 32, 8.0);
  cfg.noise.mode_count = 16;
  cfg.params.lambda = 0.25;
  if (mode == StepMode::yosida) {
    cfg.params.epsilon = 0.002;
    cfg.params.nu = 0.1;
    cfg.params.solver_tol = 1e-8;
    cfg.mode = StepMode::yosida;
  }
  cfg.t_final = 1.0;
  return cfg;
}

void bm_scalar_resolvent(benchmark::State& state) {
  YosidaParams p(0.25);
  double r = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolvent(r, p));
    r = r < 1e3 ? r * 1.37 : 1e-6;
  }
}
BENCHMARK(bm_scalar_resolvent);

void bm_rectified_field_32cubed(benchmark::State& state) {
  const Grid g = make_grid(3, 32, 8.0);
  ScalarField x = sample_field(g, 7);
  YosidaParams p(0.25);
  const double psi0 = yosida(0.0, p);
  ScalarField out(g);
  for (auto _ : state) {
    double y_warm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const LogSolve s = resolvent_log_solve(x.values[i], p, y_warm);
      y_warm = s.y;
      out.values[i] =
          (x.values[i] - s.expy) / p.lambda() - psi0 + p.lambda() * x.values[i];
    }
    benchmark::DoNotOptimize(out.values.data());
  }
}
BENCHMARK(bm_rectified_field_32cubed);

void bm_fft_roundtrip_32cubed(benchmark::State& state) {
  const Grid g = make_grid(3, 32, 8.0);
  SpectralTransform tr(g);
  ScalarField x = sample_field(g, 8);
  SpectralField hat = tr.forward(x);
  ScalarField back(g);
  for (auto _ : state) {
    tr.forward(x, hat);
    tr.inverse(hat, back);
    benchmark::DoNotOptimize(back.values.data());
  }
}
BENCHMARK(bm_fft_roundtrip_32cubed);

void bm_direct_step(benchmark::State& state) {
  SimConfig cfg = desk_sim(StepMode::direct);
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);
  SpectralTransform tr(cfg.grid);
  PathStepper stepper(cfg, model, tr);
  stepper.start(0);
  const int horizon = stepper.total_steps();
  for (auto _ : state) {
    if (stepper.state().step_index >= horizon) stepper.start(0);
    stepper.advance();
    benchmark::DoNotOptimize(stepper.state().field.values.data());
  }
}
BENCHMARK(bm_direct_step);

void bm_yosida_step(benchmark::State& state) {
  SimConfig cfg = desk_sim(StepMode::yosida);
  NoiseModel model = build_noise_model(cfg.noise, cfg.grid);
  SpectralTransform tr(cfg.grid);
  PathStepper stepper(cfg, model, tr);
  stepper.start(0);
  const int horizon = stepper.total_steps();
  for (auto _ : state) {
    if (stepper.state().step_index >= horizon) stepper.start(0);
    stepper.advance();
    benchmark::DoNotOptimize(stepper.state().field.values.data());
  }
}
BENCHMARK(bm_yosida_step);

} // namespace

BENCHMARK_MAIN();
