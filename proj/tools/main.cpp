#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "logdiff/diagnostics.hpp"
#include "logdiff/monotone.hpp"
#include "logdiff/report.hpp"
#include "logdiff/rng.hpp"
#include "logdiff/runner.hpp"
#include "logdiff/version.hpp"

namespace {

using namespace logdiff;

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int paths = 0;
  int workers = -1;
  std::string out_dir;
  bool json = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool need_config) {
  auto* c = sub->add_option("--config", f.config_path, "experiment config file");
  if (need_config) c->required();
  sub->add_option("--seed", f.seed, "override the ensemble seed")
      ->each([&f](const std::string&) { f.seed_set = true; });
  sub->add_option("--paths", f.paths, "override the path count");
  sub->add_option("--workers", f.workers, "override the worker count");
  sub->add_option("--out", f.out_dir, "override the output directory");
  sub->add_flag("--json", f.json, "machine-readable output");
}

RunConfig load_with_overrides(const CommonFlags& f) {
  RunConfig cfg = load_run_config(f.config_path);
  apply_env_overrides(cfg);
  if (f.seed_set) cfg.seed = f.seed;
  if (f.paths > 0) cfg.paths = f.paths;
  if (f.workers >= 0) cfg.workers = f.workers;
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  validate_run_config(cfg);
  return cfg;
}

void print_ledger(const std::vector<LedgerEntry>& ledger, bool json) {
  if (json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : ledger)
      arr.push_back({{"name", e.name},
                     {"pass", e.pass},
                     {"value", e.value},
                     {"threshold", e.threshold},
                     {"detail", e.detail}});
    std::cout << arr.dump(2) << "\n";
    return;
  }
  for (const auto& e : ledger)
    std::printf("%s %-28s value=%.6g threshold=%.6g %s\n", e.pass ? "PASS" : "FAIL",
                e.name.c_str(), e.value, e.threshold, e.detail.c_str());
}

// Scalar calculus property suite over the resolvent and its derived maps.
int cmd_check_scalar(const std::vector<double>& lambdas, bool json) {
  std::vector<LedgerEntry> ledger;
  auto push = [&](const std::string& name, double value, double threshold,
                  const std::string& detail = "") {
    ledger.push_back({name, value <= threshold, value, threshold, detail});
  };

  // 200-point log sweep of r over [1e-6, 1e3].
  std::vector<double> rs;
  for (int i = 0; i < 200; ++i)
    rs.push_back(std::pow(10.0, -6.0 + 9.0 * i / 199.0));

  double gap_max = -1e300;
  double bracket_viol = 0.0;
  double resid_max = 0.0;
  for (double lam : lambdas) {
    if (lam > 0.5)
      throw ParamError("check-scalar: the gap bound needs lambda <= 1/2, got " +
                       std::to_string(lam));
    YosidaParams p(lam);
    for (double r : rs) {
      gap_max = std::max(gap_max, propaux_gap(r, p));
      const double J = resolvent(r, p);
      bracket_viol = std::max(bracket_viol, (r + lam) / (1.0 + lam) - J);
      bracket_viol = std::max(bracket_viol, J - std::exp(std::min(r, 700.0)));
      resid_max = std::max(resid_max, std::fabs(J + lam * std::log(J) - r));
    }
  }
  push("propaux_gap_max", gap_max, 1e-9, "sup of the gap over the sweep");
  push("resolvent_bracket", bracket_viol, 0.0, "(r+l)/(1+l) <= J <= exp(r)");
  push("resolvent_residual", resid_max, 1e-12, "|J + l ln J - r| on the sweep");

  // Small-lambda agreement with the logarithm.
  {
    YosidaParams p(1e-4);
    double dev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double r = 0.1 * std::pow(100.0, i / 400.0);
      dev = std::max(dev, std::fabs(yosida(r, p) - std::log(r)));
    }
    push("yosida_vs_log", dev, 0.01, "sup |psi_l(r) - ln r|, l=1e-4, r in [0.1,10]");
  }

  // Nonexpansiveness of J and 1/lambda-Lipschitz bound of psi_l on random
  // pairs, plus monotonicity.
  {
    const std::uint64_t seed = 42;
    double j_ratio = 0.0, psi_ratio = 0.0;
    int mono_viol = 0;
    for (double lam : {0.5, 0.1}) {
      YosidaParams p(lam);
      for (int i = 0; i < 10000; ++i) {
        const double a =
            -5.0 + 25.0 * to_unit(key_hash(seed, 0, static_cast<std::uint64_t>(i), 0));
        const double b =
            -5.0 + 25.0 * to_unit(key_hash(seed, 1, static_cast<std::uint64_t>(i), 0));
        if (a == b) continue;
        const double dj = resolvent(a, p) - resolvent(b, p);
        const double dpsi = yosida(a, p) - yosida(b, p);
        j_ratio = std::max(j_ratio, std::fabs(dj) / std::fabs(a - b));
        psi_ratio = std::max(psi_ratio, lam * std::fabs(dpsi) / std::fabs(a - b));
        if (dj * (a - b) < 0.0 || dpsi * (a - b) < 0.0) ++mono_viol;
      }
    }
    push("resolvent_nonexpansive", j_ratio, 1.0 + 1e-12, "sup |dJ|/|dr|, 1e4 pairs");
    push("yosida_lipschitz", psi_ratio, 1.0 + 1e-12, "sup l|dpsi|/|dr|, 1e4 pairs");
    push("monotonicity_violations", static_cast<double>(mono_viol), 0.0,
         "sign agreement of increments");
  }

  // Derivative of the rectified map against a central difference.
  {
    YosidaParams p(0.25);
    double dev = 0.0;
    for (double r : {0.5, 1.0, 2.0, 10.0}) {
      const double h = 1e-6 * std::max(1.0, std::fabs(r));
      const double fd = (rectified(r + h, p) - rectified(r - h, p)) / (2.0 * h);
      dev = std::max(dev, std::fabs(fd - rectified_derivative(r, p)) /
                              rectified_derivative(r, p));
    }
    push("rectified_derivative", dev, 1e-6, "central difference agreement");
  }

  print_ledger(ledger, json);
  bool all = true;
  for (const auto& e : ledger) all = all && e.pass;
  return all ? 0 : 2;
}

int cmd_simulate(const CommonFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const RunOutcome outcome = simulate_and_write(cfg);
  if (flags.json) {
    nlohmann::json j;
    j["out_dir"] = cfg.out_dir;
    j["paths"] = cfg.paths;
    j["dt"] = outcome.time_grid.dt;
    j["n_steps"] = outcome.time_grid.n_steps;
    j["stability_bound"] = outcome.stability;
    j["manifest_hash"] = manifest_hash(cfg);
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("simulated %d path(s): %d step(s) of dt=%.6g (bound %.6g)\n", cfg.paths,
                outcome.time_grid.n_steps, outcome.time_grid.dt, outcome.stability);
    std::printf("artifacts in %s (manifest %s)\n", cfg.out_dir.c_str(),
                manifest_hash(cfg).c_str());
  }
  return 0;
}

int cmd_cascade(const CommonFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const CascadeReport rep = cascade_and_write(cfg);
  if (flags.json) {
    std::ifstream in(cfg.out_dir + "/cascade_report.json");
    std::cout << in.rdbuf();
    return 0;
  }
  auto show = [](const char* stage, const std::vector<PairDistance>& v) {
    for (const auto& pd : v)
      std::printf("%-8s %-9.4g -> %-9.4g mean sup dist^2 %.6g (band %.2g)\n", stage,
                  pd.param_a, pd.param_b, pd.mean_sup_dist_sq, pd.band3);
  };
  show("epsilon", rep.eps_stage);
  show("nu", rep.nu_stage);
  show("lambda", rep.lambda_stage);
  if (!rep.nu_stage.empty())
    std::printf("nu rate alpha = %.4f (paths %d)\n", rep.nu_rate_alpha, rep.n_paths);
  std::printf("epsilon distances monotone: %s; lambda distances shrinking: %s\n",
              rep.eps_monotone ? "yes" : "no", rep.lambda_shrinking ? "yes" : "no");
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, bool json) {
  const ReportResult res = build_report(dirs[0]);
  write_report(dirs[0], res);
  for (const auto& w : res.warnings) std::fprintf(stderr, "%s\n", w.c_str());
  if (dirs.size() == 2) {
    const std::string gp = overlay_script(dirs[0], dirs[1]);
    std::ofstream out(dirs[0] + "/overlay.gp", std::ios::binary);
    out << gp;
    std::printf("overlay script: %s/overlay.gp\n", dirs[0].c_str());
  }
  if (json) {
    std::ifstream in(dirs[0] + "/summary.json");
    std::cout << in.rdbuf();
  } else {
    std::printf("summary for %d path(s), %zu output time(s) in %s\n", res.ensemble.n_paths,
                res.ensemble.l2_sq.time.size(), dirs[0].c_str());
    std::printf("integrity: %s\n", res.integrity_ok ? "ok" : "MISMATCH");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral simulator for singular-diffusion ensembles"};
  app.set_version_flag("--version", logdiff::version_string);
  app.require_subcommand(1);

  auto* check = app.add_subcommand("check-scalar", "run the scalar calculus suite");
  std::vector<double> check_lambdas{0.5, 0.25, 0.1, 0.01};
  bool check_json = false;
  check->add_option("--propaux-lambda", check_lambdas,
                    "lambda sweep for the gap bound (each must be <= 1/2)");
  check->add_flag("--json", check_json, "machine-readable ledger");

  CommonFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "run a seeded ensemble and write artifacts");
  add_common(sim, sim_flags, true);

  CommonFlags cas_flags;
  auto* cas = app.add_subcommand("cascade", "run the limit-order schedule study");
  add_common(cas, cas_flags, true);

  auto* rep = app.add_subcommand("report", "summarize one run directory (two: overlay)");
  std::vector<std::string> rep_dirs;
  bool rep_json = false;
  rep->add_option("dirs", rep_dirs, "run directories")->expected(1, 2)->required();
  rep->add_flag("--json", rep_json, "print the JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check_scalar(check_lambdas, check_json);
    if (sim->parsed()) return cmd_simulate(sim_flags);
    if (cas->parsed()) return cmd_cascade(cas_flags);
    if (rep->parsed()) return cmd_report(rep_dirs, rep_json);
  } catch (const logdiff::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const logdiff::ParamError& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const logdiff::DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 2;
  } catch (const logdiff::GridMismatchError& e) {
    std::fprintf(stderr, "grid mismatch: %s\n", e.what());
    return 2;
  } catch (const logdiff::ZeroModeError& e) {
    std::fprintf(stderr, "zero mode error: %s\n", e.what());
    return 2;
  } catch (const logdiff::SummabilityError& e) {
    std::fprintf(stderr, "summability error: %s\n", e.what());
    return 2;
  } catch (const logdiff::StabilityError& e) {
    std::fprintf(stderr, "stability error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
