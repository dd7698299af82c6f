#ifndef LOGDIFF_REPORT_HPP
#define LOGDIFF_REPORT_HPP

#include <string>
#include <vector>

#include "logdiff/diagnostics.hpp"

namespace logdiff {

// Parses a diagnostics CSV back into per-path trajectories (summary fields
// only; weak-form series are not reloaded).
std::vector<PathDiagnostics> read_diagnostics_csv(const std::string& text);

struct ReportResult {
  EnsembleReport ensemble;
  bool integrity_ok = true;               // artifact hashes match the manifest
  std::vector<std::string> warnings;
  std::string manifest_hash;
};

// Loads manifest + CSVs from a run directory, verifies artifact hashes,
// and aggregates the ensemble. ArtifactError when required files are absent.
ReportResult build_report(const std::string& run_dir);

// Emits summary.csv, summary.json and a gnuplot script for the norm and
// energy trajectories into the run directory.
void write_report(const std::string& run_dir, const ReportResult& result);

// Gnuplot script overlaying the mean trajectories of two run directories.
std::string overlay_script(const std::string& dir_a, const std::string& dir_b);

} // namespace logdiff

#endif
