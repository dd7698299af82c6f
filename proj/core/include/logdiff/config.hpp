#ifndef LOGDIFF_CONFIG_HPP
#define LOGDIFF_CONFIG_HPP

#include <cstdint>
#include <string>

#include "logdiff/noise.hpp"
#include "logdiff/solver.hpp"

namespace logdiff {

// Experiment description, loaded from a block-structured text file and
// normalized so that load -> dump -> load is a fixed point.
struct RunConfig {
  // grid block
  int dim = 3;
  int n = 32;
  double half_length = 8.0;

  // noise block
  NoiseSpec noise;

  // params block
  double lambda = 0.25;
  double nu = 0.0;
  double epsilon = 0.0;
  std::string mode = "direct";  // direct | yosida
  bool drive = true;            // off disables the stochastic term
  double solver_tol = 1e-10;
  int solver_max_iter = 400;

  // time block
  double dt = 0.0;  // 0 = auto from the stability bound
  double t_final = 1.0;
  int output_stride = 1;
  double c_stab = 0.25;
  int noise_refine = 0;

  // datum block
  DatumSpec datum;

  // ensemble block
  int paths = 1;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency

  // diagnostics block
  bool diag_energy = true;
  int weak_modes = 0;
  double hm1_nu = 0.0;  // 0 = default recording shift

  // output block
  std::string out_dir = "out";
  bool snapshots = false;
  bool csv = true;

  // schedules block (cascade runs)
  ScheduleSpec schedules;
};

// Parses the block grammar; unknown blocks or keys are ConfigError with the
// offending line. `origin` names the source in error messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

// Canonical form: fixed block order, shortest round-trip number format.
std::string dump_run_config(const RunConfig& cfg);

// Cross-field validation; throws ConfigError / ParamError / StabilityError.
void validate_run_config(const RunConfig& cfg);

// Environment overrides, applied after load: LOGDIFF_OUT replaces the
// output directory, LOGDIFF_WORKERS the worker count. Nothing else.
void apply_env_overrides(RunConfig& cfg);

Grid config_grid(const RunConfig& cfg);
SimConfig to_sim_config(const RunConfig& cfg);

} // namespace logdiff

#endif
