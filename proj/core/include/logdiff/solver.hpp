#ifndef LOGDIFF_SOLVER_HPP
#define LOGDIFF_SOLVER_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "logdiff/grid.hpp"
#include "logdiff/monotone.hpp"
#include "logdiff/noise.hpp"
#include "logdiff/trajectory.hpp"
#include "logdiff/transform.hpp"

namespace logdiff {

struct RegularizationParams {
  double lambda = 0.25;
  double nu = 0.0;
  double epsilon = 0.0;  // 0 disables the outer resolvent (direct stepping)
  double solver_tol = 1e-10;
  int solver_max_iter = 400;
};

void validate_params(const RegularizationParams& p);

enum class StepMode { direct, yosida };

// Strictly positive smooth initial profiles: a configurable floor plus a
// compact bump, so ln x stays finite on the whole torus.
struct DatumSpec {
  std::string profile = "floor_bump";  // "floor_bump", "floor_two_bumps", "constant"
  double floor = 1.0;
  double amplitude = 0.5;
  double width = 2.0;
};

ScalarField build_datum(const DatumSpec& spec, const Grid& grid);

struct DiagnosticsOptions {
  bool energy = true;      // per-step Phi and gradient-integral accumulation
  int weak_modes = 0;      // track weak-form series for the first j modes
  double hm1_nu_override = -1.0;  // record nu for the H^-1 norm; <0 = use run nu (1 if 0)
};

struct SimConfig {
  Grid grid;
  NoiseSpec noise;
  RegularizationParams params;
  StepMode mode = StepMode::direct;
  double dt = 0.0;        // requested; 0 means take the stability bound
  double c_stab = 0.25;
  double t_final = 1.0;
  int output_stride = 1;  // record every this many steps
  int noise_refine = 0;   // increment counter refinement (dt-halving coupling)
  bool noise_off = false; // deterministic reduction: no increments, no correction
  DatumSpec datum;
  int n_paths = 1;
  std::uint64_t seed = 1;
  DiagnosticsOptions diag;
  bool skip_dt_validation = false;  // detector tests only; config loading never sets it
};

// Largest admissible dt: c_stab * lambda / (nu + (pi N / (2L))^2).
double stability_bound(const Grid& grid, const RegularizationParams& p, double c_stab = 0.25);

// Number of steps and the exact dt actually used: dt divides t_final so
// the final record lands on T and halving stays nested.
struct TimeGrid {
  int n_steps = 0;
  double dt = 0.0;
};
TimeGrid resolve_time_grid(const SimConfig& cfg);

struct SolverState {
  double time = 0.0;
  long step_index = 0;
  ScalarField field;
};

// Drift of the (lambda, nu) equation including the Stratonovich
// correction: (Lap - nu) rectified(x) + (1/2) sigma_sq x.
ScalarField drift_lambda_nu(const ScalarField& x, const RegularizationParams& p,
                            const NoiseModel& model, SpectralTransform& tr);

// The monotone part alone: (Lap - nu) rectified(x).
ScalarField drift_monotone_part(const ScalarField& x, const RegularizationParams& p,
                                SpectralTransform& tr);

struct ResolventStats {
  int iterations = 0;
  double rel_residual = 0.0;
  bool used_newton = false;
};

// Solves u - epsilon (Lap - nu) rectified(u) = x to a relative residual of
// solver_tol in the H^-1_nu norm (nu = 1 norm when the run nu is 0).
// Damped spectral-preconditioned fixed point with a matrix-free
// Newton-Krylov fallback; strong monotonicity makes the solution unique.
ScalarField resolvent_full_drift(const ScalarField& x, const RegularizationParams& p,
                                 SpectralTransform& tr, ResolventStats* stats = nullptr,
                                 const ScalarField* initial_guess = nullptr);

// One-path integrator. Owns every per-step buffer (warm starts, spectral
// scratch, weak-form accumulators); one instance per worker thread.
class PathStepper {
 public:
  PathStepper(const SimConfig& cfg, const NoiseModel& model, SpectralTransform& tr);
  ~PathStepper();
  PathStepper(const PathStepper&) = delete;
  PathStepper& operator=(const PathStepper&) = delete;

  // Runs one full path and returns its diagnostics.
  PathDiagnostics run(std::uint64_t path_id);

  // Stepwise interface for coupled studies.
  void start(std::uint64_t path_id);
  void advance();  // one Euler-Maruyama step
  const SolverState& state() const;
  const SpectralField& state_hat();  // transform of the current field
  double current_dt() const;
  int total_steps() const;

  PathDiagnostics& diagnostics();
  void record_now();  // append a diagnostic record for the current state

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend SolverState step_ito(const SolverState&, const SimConfig&, const NoiseModel&,
                              SpectralTransform&, StepMode);
};

// Single Euler-Maruyama step on a caller-held state; convenience wrapper
// for tests (constructs a throwaway stepper).
SolverState step_ito(const SolverState& state, const SimConfig& cfg,
                     const NoiseModel& model, SpectralTransform& tr, StepMode mode);

// Runs one path of cfg.
PathDiagnostics simulate_path(const SimConfig& cfg, const NoiseModel& model,
                              SpectralTransform& tr, std::uint64_t path_id);

struct ScheduleSpec {
  std::vector<double> epsilons;  // decreasing, all > 0
  std::vector<double> nus;       // decreasing
  std::vector<double> lambdas;   // decreasing
};

struct PairDistance {
  double param_a = 0.0;
  double param_b = 0.0;
  double mean_sup_dist_sq = 0.0;  // ensemble mean of sup-in-time squared distance
  double band3 = 0.0;             // 3 sigma band of that mean
};

struct CascadeReport {
  int n_paths = 0;
  std::vector<PairDistance> eps_stage;     // each epsilon against the direct path
  std::vector<PairDistance> nu_stage;      // consecutive nu pairs
  std::vector<PairDistance> lambda_stage;  // consecutive lambda pairs, windowed norm
  bool eps_monotone = true;     // distances decrease with epsilon
  bool lambda_shrinking = true; // distances decrease along the schedule
  double nu_rate_alpha = 0.0;   // fitted exponent of dist^2 vs |nu - nu'|
  double nu_rate_logc = 0.0;
};

// Synchronously coupled convergence study: every schedule member consumes
// identical Wiener increments. Stages run in the limit order epsilon,
// then nu, then lambda. Each stage is skipped when its schedule has
// fewer than the needed entries.
CascadeReport cascade_study(const SimConfig& base, const ScheduleSpec& schedules,
                            const NoiseModel& model, SpectralTransform& tr);

} // namespace logdiff

#endif
