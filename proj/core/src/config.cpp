#include "logdiff/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace logdiff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_double(v[i]);
  }
  return out;
}

struct Parser {
  std::string origin;
  int line_no = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  }

  double num(const std::string& v) const {
    const std::string t = trim(v);
    char* end = nullptr;
    const double d = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || t.empty()) fail("expected a number, got '" + t + "'");
    return d;
  }

  int integer(const std::string& v) const {
    const double d = num(v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail("expected an integer, got '" + trim(v) + "'");
    return i;
  }

  std::uint64_t uinteger(const std::string& v) const {
    const std::string t = trim(v);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(t.c_str(), t.c_str() + t.size(), out);
    if (ec != std::errc() || p != t.c_str() + t.size())
      fail("expected a nonnegative integer, got '" + t + "'");
    return out;
  }

  bool flag(const std::string& v) const {
    const std::string t = trim(v);
    if (t == "on" || t == "true" || t == "1") return true;
    if (t == "off" || t == "false" || t == "0") return false;
    fail("expected on/off, got '" + t + "'");
  }

  std::vector<double> list(const std::string& v) const {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(trim(v));
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail("empty entry in list");
      out.push_back(num(item));
    }
    return out;
  }
};

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  Parser p{origin};
  std::stringstream stream(text);
  std::string raw;
  std::string block;
  bool saw_grid = false;

  auto handle = [&](const std::string& key, const std::string& val) {
    if (block == "grid") {
      if (key == "dim") cfg.dim = p.integer(val);
      else if (key == "n") cfg.n = p.integer(val);
      else if (key == "half_length") cfg.half_length = p.num(val);
      else p.fail("unknown key '" + key + "' in block 'grid'");
    } else if (block == "noise") {
      if (key == "family") cfg.noise.family = trim(val);
      else if (key == "modes") cfg.noise.mode_count = p.integer(val);
      else if (key == "decay") cfg.noise.decay = trim(val);
      else if (key == "decay_rate") cfg.noise.decay_rate = p.num(val);
      else if (key == "scale") cfg.noise.scale = p.num(val);
      else if (key == "constant_value") cfg.noise.constant_value = p.num(val);
      else p.fail("unknown key '" + key + "' in block 'noise'");
    } else if (block == "params") {
      if (key == "lambda") cfg.lambda = p.num(val);
      else if (key == "nu") cfg.nu = p.num(val);
      else if (key == "epsilon") cfg.epsilon = p.num(val);
      else if (key == "mode") cfg.mode = trim(val);
      else if (key == "drive") cfg.drive = p.flag(val);
      else if (key == "solver_tol") cfg.solver_tol = p.num(val);
      else if (key == "solver_max_iter") cfg.solver_max_iter = p.integer(val);
      else p.fail("unknown key '" + key + "' in block 'params'");
    } else if (block == "time") {
      if (key == "dt") cfg.dt = p.num(val);
      else if (key == "t_final") cfg.t_final = p.num(val);
      else if (key == "output_stride") cfg.output_stride = p.integer(val);
      else if (key == "c_stab") cfg.c_stab = p.num(val);
      else if (key == "noise_refine") cfg.noise_refine = p.integer(val);
      else p.fail("unknown key '" + key + "' in block 'time'");
    } else if (block == "datum") {
      if (key == "profile") cfg.datum.profile = trim(val);
      else if (key == "floor") cfg.datum.floor = p.num(val);
      else if (key == "amplitude") cfg.datum.amplitude = p.num(val);
      else if (key == "width") cfg.datum.width = p.num(val);
      else p.fail("unknown key '" + key + "' in block 'datum'");
    } else if (block == "ensemble") {
      if (key == "paths") cfg.paths = p.integer(val);
      else if (key == "seed") cfg.seed = p.uinteger(val);
      else if (key == "workers") cfg.workers = p.integer(val);
      else p.fail("unknown key '" + key + "' in block 'ensemble'");
    } else if (block == "diagnostics") {
      if (key == "energy") cfg.diag_energy = p.flag(val);
      else if (key == "weak_modes") cfg.weak_modes = p.integer(val);
      else if (key == "hm1_nu") cfg.hm1_nu = p.num(val);
      else p.fail("unknown key '" + key + "' in block 'diagnostics'");
    } else if (block == "output") {
      if (key == "directory") cfg.out_dir = trim(val);
      else if (key == "snapshots") cfg.snapshots = p.flag(val);
      else if (key == "csv") cfg.csv = p.flag(val);
      else p.fail("unknown key '" + key + "' in block 'output'");
    } else if (block == "schedules") {
      if (key == "epsilons") cfg.schedules.epsilons = p.list(val);
      else if (key == "nus") cfg.schedules.nus = p.list(val);
      else if (key == "lambdas") cfg.schedules.lambdas = p.list(val);
      else p.fail("unknown key '" + key + "' in block 'schedules'");
    } else {
      p.fail("key outside any block");
    }
  };

  while (std::getline(stream, raw)) {
    ++p.line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line == "}") {
      if (block.empty()) p.fail("unmatched '}'");
      block.clear();
      continue;
    }
    if (line.size() > 1 && line.back() == '{') {
      if (!block.empty()) p.fail("nested block");
      block = trim(line.substr(0, line.size() - 1));
      static const char* known[] = {"grid",   "noise",       "params", "time",     "datum",
                                    "ensemble", "diagnostics", "output", "schedules"};
      bool ok = false;
      for (const char* k : known)
        if (block == k) ok = true;
      if (!ok) p.fail("unknown block '" + block + "'");
      if (block == "grid") saw_grid = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) p.fail("expected 'key = value'");
    if (block.empty()) p.fail("key outside any block");
    handle(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  if (!block.empty()) throw ConfigError(origin + ": unterminated block '" + block + "'");
  if (!saw_grid) throw ConfigError(origin + ": missing required block 'grid'");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string dump_run_config(const RunConfig& c) {
  std::ostringstream o;
  o << "grid {\n"
    << "  dim = " << c.dim << "\n"
    << "  n = " << c.n << "\n"
    << "  half_length = " << fmt_double(c.half_length) << "\n"
    << "}\n"
    << "noise {\n"
    << "  family = " << c.noise.family << "\n"
    << "  modes = " << c.noise.mode_count << "\n"
    << "  decay = " << c.noise.decay << "\n"
    << "  decay_rate = " << fmt_double(c.noise.decay_rate) << "\n"
    << "  scale = " << fmt_double(c.noise.scale) << "\n"
    << "  constant_value = " << fmt_double(c.noise.constant_value) << "\n"
    << "}\n"
    << "params {\n"
    << "  lambda = " << fmt_double(c.lambda) << "\n"
    << "  nu = " << fmt_double(c.nu) << "\n"
    << "  epsilon = " << fmt_double(c.epsilon) << "\n"
    << "  mode = " << c.mode << "\n"
    << "  drive = " << (c.drive ? "on" : "off") << "\n"
    << "  solver_tol = " << fmt_double(c.solver_tol) << "\n"
    << "  solver_max_iter = " << c.solver_max_iter << "\n"
    << "}\n"
    << "time {\n"
    << "  dt = " << fmt_double(c.dt) << "\n"
    << "  t_final = " << fmt_double(c.t_final) << "\n"
    << "  output_stride = " << c.output_stride << "\n"
    << "  c_stab = " << fmt_double(c.c_stab) << "\n"
    << "  noise_refine = " << c.noise_refine << "\n"
    << "}\n"
    << "datum {\n"
    << "  profile = " << c.datum.profile << "\n"
    << "  floor = " << fmt_double(c.datum.floor) << "\n"
    << "  amplitude = " << fmt_double(c.datum.amplitude) << "\n"
    << "  width = " << fmt_double(c.datum.width) << "\n"
    << "}\n"
    << "ensemble {\n"
    << "  paths = " << c.paths << "\n"
    << "  seed = " << c.seed << "\n"
    << "  workers = " << c.workers << "\n"
    << "}\n"
    << "diagnostics {\n"
    << "  energy = " << (c.diag_energy ? "on" : "off") << "\n"
    << "  weak_modes = " << c.weak_modes << "\n"
    << "  hm1_nu = " << fmt_double(c.hm1_nu) << "\n"
    << "}\n"
    << "output {\n"
    << "  directory = " << c.out_dir << "\n"
    << "  snapshots = " << (c.snapshots ? "on" : "off") << "\n"
    << "  csv = " << (c.csv ? "on" : "off") << "\n"
    << "}\n"
    << "schedules {\n"
    << "  epsilons = " << fmt_list(c.schedules.epsilons) << "\n"
    << "  nus = " << fmt_list(c.schedules.nus) << "\n"
    << "  lambdas = " << fmt_list(c.schedules.lambdas) << "\n"
    << "}\n";
  return o.str();
}

void validate_run_config(const RunConfig& cfg) {
  make_grid(cfg.dim, cfg.n, cfg.half_length);
  if (cfg.mode != "direct" && cfg.mode != "yosida")
    throw ConfigError("params: mode must be 'direct' or 'yosida', got '" + cfg.mode + "'");
  if (cfg.mode == "yosida" && !(cfg.epsilon > 0.0))
    throw ConfigError("params: yosida mode requires epsilon > 0");
  if (cfg.diag_energy && cfg.lambda > 0.5)
    throw ConfigError("params: lambda > 1/2 is incompatible with energy diagnostics");
  if (cfg.paths < 1) throw ConfigError("ensemble: paths must be >= 1");
  if (cfg.workers < 0) throw ConfigError("ensemble: workers must be >= 0");
  if (cfg.t_final < 0.0) throw ConfigError("time: t_final must be >= 0");
  if (cfg.output_stride < 1) throw ConfigError("time: output_stride must be >= 1");
  if (cfg.noise_refine < 0 || cfg.noise_refine > 20)
    throw ConfigError("time: noise_refine must lie in [0, 20]");
  if (!(cfg.c_stab > 0.0)) throw ConfigError("time: c_stab must be positive");
  if (cfg.weak_modes < 0) throw ConfigError("diagnostics: weak_modes must be >= 0");
  if (cfg.weak_modes > cfg.noise.mode_count)
    throw ConfigError("diagnostics: weak_modes exceeds the noise mode count");
  if (cfg.hm1_nu < 0.0) throw ConfigError("diagnostics: hm1_nu must be >= 0");
  auto reversed = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[i - 1]) return true;
    return false;
  };
  if (reversed(cfg.schedules.epsilons) || reversed(cfg.schedules.nus) ||
      reversed(cfg.schedules.lambdas))
    throw ConfigError("schedules: entries must be non-increasing (limits are downward)");
  // Module-level preconditions, including dt against the stability bound.
  SimConfig sim = to_sim_config(cfg);
  validate_params(sim.params);
  resolve_time_grid(sim);
  build_datum(sim.datum, sim.grid);
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* out = std::getenv("LOGDIFF_OUT"); out && *out) cfg.out_dir = out;
  if (const char* w = std::getenv("LOGDIFF_WORKERS"); w && *w) {
    char* end = nullptr;
    const long v = std::strtol(w, &end, 10);
    if (end == w || *end != '\0' || v < 0)
      throw ConfigError("LOGDIFF_WORKERS must be a nonnegative integer");
    cfg.workers = static_cast<int>(v);
  }
}

Grid config_grid(const RunConfig& cfg) { return make_grid(cfg.dim, cfg.n, cfg.half_length); }

SimConfig to_sim_config(const RunConfig& cfg) {
  SimConfig sim;
  sim.grid = config_grid(cfg);
  sim.noise = cfg.noise;
  sim.params.lambda = cfg.lambda;
  sim.params.nu = cfg.nu;
  sim.params.epsilon = cfg.epsilon;
  sim.params.solver_tol = cfg.solver_tol;
  sim.params.solver_max_iter = cfg.solver_max_iter;
  sim.mode = cfg.mode == "yosida" ? StepMode::yosida : StepMode::direct;
  sim.dt = cfg.dt;
  sim.c_stab = cfg.c_stab;
  sim.t_final = cfg.t_final;
  sim.output_stride = cfg.output_stride;
  sim.noise_refine = cfg.noise_refine;
  sim.noise_off = !cfg.drive;
  sim.datum = cfg.datum;
  sim.n_paths = cfg.paths;
  sim.seed = cfg.seed;
  sim.diag.energy = cfg.diag_energy;
  sim.diag.weak_modes = cfg.weak_modes;
  sim.diag.hm1_nu_override = cfg.hm1_nu > 0.0 ? cfg.hm1_nu : -1.0;
  return sim;
}

} // namespace logdiff
