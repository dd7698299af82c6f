#ifndef LOGDIFF_RUNNER_HPP
#define LOGDIFF_RUNNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "logdiff/config.hpp"
#include "logdiff/diagnostics.hpp"

namespace logdiff {

// FNV-1a 64-bit content hash, hex-encoded; used for config and artifact
// fingerprints in the manifest.
std::uint64_t fnv1a(const void* data, std::size_t n);
std::string fnv1a_hex(const std::string& data);

// Hash of the normalized config text alone.
std::string config_hash(const RunConfig& cfg);
// Hash covering normalized config + code version + seed; two runs with the
// same manifest hash produce byte-identical diagnostic CSVs.
std::string manifest_hash(const RunConfig& cfg);

struct RunOutcome {
  std::vector<PathDiagnostics> paths;    // indexed by path id
  std::vector<ScalarField> final_fields; // filled when snapshots are on
  TimeGrid time_grid;
  double stability = 0.0;
};

// Runs the ensemble over a worker pool. Workers share only the immutable
// config and noise model; each owns its transform and stepper, so results
// are identical for any worker count.
RunOutcome run_ensemble(const RunConfig& cfg, const NoiseModel& model);

// Serialized artifact emission into cfg.out_dir: normalized config, CSVs,
// optional snapshots, and manifest.json listing every artifact hash.
void write_run_artifacts(const RunConfig& cfg, const NoiseModel& model,
                         const RunOutcome& outcome);

// run_ensemble + write_run_artifacts; returns the outcome.
RunOutcome simulate_and_write(const RunConfig& cfg);

// Cascade orchestration in the limit order epsilon, nu, lambda, plus its
// artifacts (cascade_report.json, distances.csv).
CascadeReport cascade_and_write(const RunConfig& cfg);

std::string diagnostics_csv(const std::vector<PathDiagnostics>& paths);
std::string weak_series_csv(const std::vector<PathDiagnostics>& paths);

} // namespace logdiff

#endif
