#include "logdiff/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logdiff/runner.hpp"

namespace logdiff {

namespace {

namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing artifact '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

} // namespace

std::vector<PathDiagnostics> read_diagnostics_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw ArtifactError("diagnostics CSV is empty");
  const auto header = split(line, ',');
  if (header.size() != 18 || header[0] != "path" || header[1] != "time")
    throw ArtifactError("diagnostics CSV has an unexpected header");

  std::vector<PathDiagnostics> paths;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;  // comment lines are not data
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ArtifactError("diagnostics CSV row has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(header.size()));
    const auto id = static_cast<std::uint64_t>(std::stoull(cells[0]));
    if (paths.empty() || paths.back().path_id != id) {
      paths.emplace_back();
      paths.back().path_id = id;
    }
    DiagRecord r;
    int c = 1;
    auto next = [&]() { return std::stod(cells[static_cast<std::size_t>(c++)]); };
    r.time = next();
    r.l2_sq = next();
    r.hm1_nu_sq = next();
    r.hm1_one_sq = next();
    r.hm1_homog_sq = next();
    r.mean = next();
    r.mass = next();
    r.min_value = next();
    r.neg_fraction = next();
    r.phi = next();
    r.phi_flagged = next() != 0.0;
    r.grad_psi_sq = next();
    r.int_grad_psi_sq = next();
    r.int_l2_sq = next();
    r.leakage = next();
    r.solver_resid = next();
    r.solver_iters = static_cast<int>(next());
    paths.back().records.push_back(r);
  }
  if (paths.empty()) throw ArtifactError("diagnostics CSV holds no rows");
  return paths;
}

ReportResult build_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const auto man = nlohmann::json::parse(read_file(dir / "manifest.json"));

  ReportResult res;
  res.manifest_hash = man.value("manifest_hash", "");

  if (man.contains("artifacts")) {
    for (const auto& [name, hash] : man["artifacts"].items()) {
      const fs::path f = dir / name;
      if (!fs::exists(f)) {
        res.integrity_ok = false;
        res.warnings.push_back("integrity warning: artifact '" + name + "' is missing");
        continue;
      }
      const std::string actual = fnv1a_hex(read_file(f));
      if (actual != hash.get<std::string>()) {
        res.integrity_ok = false;
        res.warnings.push_back("integrity warning: artifact '" + name +
                               "' does not match its manifest hash");
      }
    }
  }

  const auto paths = read_diagnostics_csv(read_file(dir / "path_diagnostics.csv"));
  res.ensemble = summarize_ensemble(paths);
  return res;
}

void write_report(const std::string& run_dir, const ReportResult& result) {
  const fs::path dir(run_dir);
  const EnsembleReport& e = result.ensemble;

  struct Column {
    const char* name;
    const TimeSeriesStat* stat;
  };
  const Column cols[] = {
      {"l2_sq", &e.l2_sq},           {"hm1_nu_sq", &e.hm1_nu_sq},
      {"hm1_one_sq", &e.hm1_one_sq}, {"hm1_homog_sq", &e.hm1_homog_sq},
      {"phi", &e.phi},               {"grad_psi_sq", &e.grad_psi_sq},
      {"mass", &e.mass},             {"min_value", &e.min_value},
      {"neg_fraction", &e.neg_fraction}, {"leakage", &e.leakage},
  };

  std::string csv = "time";
  for (const auto& c : cols) {
    csv += std::string(",") + c.name + "_mean," + c.name + "_band3";
  }
  csv += "\n";
  const std::size_t n = e.l2_sq.time.size();
  for (std::size_t i = 0; i < n; ++i) {
    csv += g17(e.l2_sq.time[i]);
    for (const auto& c : cols) {
      csv += ',';
      csv += g17(c.stat->mean[i]);
      csv += ',';
      csv += g17(c.stat->band3[i]);
    }
    csv += '\n';
  }
  std::ofstream csv_out(dir / "summary.csv", std::ios::binary);
  csv_out << csv;

  nlohmann::json j;
  j["n_paths"] = e.n_paths;
  j["integrity_ok"] = result.integrity_ok;
  j["warnings"] = result.warnings;
  j["manifest_hash"] = result.manifest_hash;
  for (const auto& c : cols) {
    j[std::string(c.name) + "_final_mean"] = c.stat->mean.empty() ? 0.0 : c.stat->mean.back();
    j[std::string(c.name) + "_final_band3"] =
        c.stat->band3.empty() ? 0.0 : c.stat->band3.back();
  }
  std::ofstream json_out(dir / "summary.json", std::ios::binary);
  json_out << j.dump(2) << "\n";

  std::string gp;
  gp += "set datafile separator ','\n";
  gp += "set key autotitle columnhead\n";
  gp += "set xlabel 'time'\n";
  gp += "set terminal pngcairo size 1200,800\n";
  gp += "set output 'norms.png'\n";
  gp += "plot 'summary.csv' using 1:2 with lines title 'l2_sq mean', \\\n";
  gp += "     'summary.csv' using 1:4 with lines title 'hm1_nu_sq mean'\n";
  gp += "set output 'energy.png'\n";
  gp += "plot 'summary.csv' using 1:10 with lines title 'phi mean', \\\n";
  gp += "     'summary.csv' using 1:12 with lines title 'grad_psi_sq mean'\n";
  std::ofstream gp_out(dir / "plot.gp", std::ios::binary);
  gp_out << gp;
}

std::string overlay_script(const std::string& dir_a, const std::string& dir_b) {
  std::string gp;
  gp += "set datafile separator ','\n";
  gp += "set xlabel 'time'\n";
  gp += "set terminal pngcairo size 1200,800\n";
  gp += "set output 'overlay.png'\n";
  gp += "plot '" + dir_a + "/summary.csv' using 1:2 with lines title 'A l2_sq', \\\n";
  gp += "     '" + dir_b + "/summary.csv' using 1:2 with lines title 'B l2_sq', \\\n";
  gp += "     '" + dir_a + "/summary.csv' using 1:10 with lines title 'A phi', \\\n";
  gp += "     '" + dir_b + "/summary.csv' using 1:10 with lines title 'B phi'\n";
  return gp;
}

} // namespace logdiff
