#include "logdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "logdiff/diagnostics.hpp"

namespace logdiff {

namespace {

double box_volume(const Grid& g) {
  double v = 1.0;
  for (int a = 0; a < g.dim; ++a) v *= 2.0 * g.half_length;
  return v;
}

// Mollifier profile shared with the noise family.
double bump(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s);
}

// Interior window: central half-box, all |xi_a| <= L/2.
std::vector<std::uint8_t> interior_mask(const Grid& g) {
  std::vector<std::uint8_t> mask(g.point_count(), 1);
  const int n = g.n;
  const double half = g.half_length / 2.0;
  const std::size_t total = g.point_count();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    bool inside = true;
    for (int a = g.dim - 1; a >= 0; --a) {
      const int idx = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
      if (std::fabs(g.coordinate(idx)) > half) {
        inside = false;
        break;
      }
    }
    mask[flat] = inside ? 1 : 0;
  }
  return mask;
}

double dot_patch(const ScalarField& f, const NoiseMode& mode) {
  const Grid& g = f.grid;
  const int n = g.n;
  std::size_t strides[3] = {1, 1, 1};
  for (int a = g.dim - 2; a >= 0; --a)
    strides[a] = strides[a + 1] * static_cast<std::size_t>(n);
  double s = 0.0;
  std::size_t pp = 0;
  for (int i = 0; i < mode.count[0]; ++i)
    for (int j = 0; j < mode.count[1]; ++j) {
      std::size_t flat = (mode.start[0] + i) * strides[0];
      if (g.dim > 1) flat += (mode.start[1] + j) * strides[1];
      if (g.dim > 2) flat += mode.start[2];
      const double* fv = f.values.data() + flat;
      const double* mv = mode.patch.data() + pp;
      for (int l = 0; l < mode.count[2]; ++l) s += fv[l] * mv[l];
      pp += mode.count[2];
    }
  return s * g.cell_volume();
}

} // namespace

void validate_params(const RegularizationParams& p) {
  if (!(p.lambda > 0.0) || !(p.lambda <= 1.0))
    throw ParamError("params: lambda must lie in (0, 1], got " + std::to_string(p.lambda));
  if (!(p.nu >= 0.0) || !(p.nu <= 1.0))
    throw ParamError("params: nu must lie in [0, 1], got " + std::to_string(p.nu));
  if (!(p.epsilon >= 0.0))
    throw ParamError("params: epsilon must be nonnegative");
  if (!(p.solver_tol > 0.0))
    throw ParamError("params: solver_tol must be positive");
  if (p.solver_max_iter < 1)
    throw ParamError("params: solver_max_iter must be >= 1");
}

ScalarField build_datum(const DatumSpec& spec, const Grid& grid) {
  if (!(spec.floor > 0.0))
    throw ParamError("datum: floor must be strictly positive");
  ScalarField x(grid, spec.floor);
  auto add_bump = [&](double amplitude, const std::array<double, 3>& center, double width) {
    if (!(width > 0.0) || width > grid.half_length)
      throw ParamError("datum: bump width must lie in (0, L]");
    const std::size_t total = grid.point_count();
    const int n = grid.n;
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      double prod = 1.0;
      for (int a = grid.dim - 1; a >= 0; --a) {
        const int idx = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
        prod *= bump((grid.coordinate(idx) - center[a]) / width);
        if (prod == 0.0) break;
      }
      x.values[flat] += amplitude * prod;
    }
  };

  if (spec.profile == "constant") {
    // floor only
  } else if (spec.profile == "floor_bump") {
    add_bump(spec.amplitude, {0.0, 0.0, 0.0}, spec.width);
  } else if (spec.profile == "floor_two_bumps") {
    const double c = grid.half_length / 4.0;
    add_bump(spec.amplitude, {-c, -c, -c}, spec.width);
    add_bump(0.5 * spec.amplitude, {c, c, c}, spec.width);
  } else {
    throw ParamError("datum: unknown profile '" + spec.profile + "'");
  }

  if (!all_finite(x) || min_value(x) <= 0.0)
    throw ParamError("datum: profile must be strictly positive and finite");
  return x;
}

double stability_bound(const Grid& grid, const RegularizationParams& p, double c_stab) {
  const double kmax = 3.14159265358979323846 * grid.n / (2.0 * grid.half_length);
  return c_stab * p.lambda / (p.nu + kmax * kmax);
}

TimeGrid resolve_time_grid(const SimConfig& cfg) {
  const double bound = stability_bound(cfg.grid, cfg.params, cfg.c_stab);
  double dt_auto = bound;
  // The outer Yosida increment is an explicit Euler step of a 1/epsilon-
  // Lipschitz flow, so the automatic step also stays below epsilon.
  if (cfg.mode == StepMode::yosida && cfg.params.epsilon > 0.0)
    dt_auto = std::min(dt_auto, cfg.params.epsilon);
  double dt_req = cfg.dt > 0.0 ? cfg.dt : dt_auto;
  if (!cfg.skip_dt_validation && dt_req > bound * (1.0 + 1e-12))
    throw StabilityError("dt " + std::to_string(dt_req) + " exceeds the stability bound " +
                         std::to_string(bound));
  TimeGrid tg;
  if (cfg.t_final <= 0.0) {
    tg.n_steps = 0;
    tg.dt = dt_req;
    return tg;
  }
  tg.n_steps = static_cast<int>(std::ceil(cfg.t_final / dt_req - 1e-9));
  tg.n_steps = std::max(tg.n_steps, 1);
  tg.dt = cfg.t_final / tg.n_steps;
  return tg;
}

ScalarField drift_monotone_part(const ScalarField& x, const RegularizationParams& p,
                                SpectralTransform& tr) {
  validate_params(p);
  YosidaParams yp(p.lambda);
  ScalarField psi = apply_pointwise([&](double r) { return rectified(r, yp); }, x);
  SpectralField ph = tr.forward(psi);
  const std::size_t m = ph.size();
  for (std::size_t i = 0; i < m; ++i) ph.coeffs[i] *= -(p.nu + tr.ksq(i));
  return tr.inverse(ph);
}

ScalarField drift_lambda_nu(const ScalarField& x, const RegularizationParams& p,
                            const NoiseModel& model, SpectralTransform& tr) {
  ScalarField out = drift_monotone_part(x, p, tr);
  require_same_grid(x.grid, model.grid, "drift_lambda_nu");
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i)
    out.values[i] += 0.5 * model.sigma_sq.values[i] * x.values[i];
  return out;
}

namespace {

// Scratch for the epsilon-resolvent solve; owned per stepping context so
// results depend only on (config, seed, path), never on worker scheduling.
struct ResolventWorkspace {
  SpectralField xhat, uhat, rhat, phat, qhat, zhat;
  ScalarField u, work;
  std::vector<double> ylog;
  bool ylog_valid = false;
};

double hm1_norm_sq(const SpectralField& f, const SpectralTransform& tr, double nu,
                   double box) {
  double s = 0.0;
  const std::size_t m = f.size();
  for (std::size_t i = 0; i < m; ++i) s += std::norm(f.coeffs[i]) / (nu + tr.ksq(i));
  return s * box;
}

double hm1_inner(const SpectralField& a, const SpectralField& b, const SpectralTransform& tr,
                 double nu, double box) {
  double s = 0.0;
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i)
    s += (a.coeffs[i] * std::conj(b.coeffs[i])).real() / (nu + tr.ksq(i));
  return s * box;
}

ScalarField resolvent_full_drift_ws(const ScalarField& x, const RegularizationParams& p,
                                    SpectralTransform& tr, ResolventWorkspace& ws,
                                    ResolventStats* stats, const ScalarField* guess) {
  validate_params(p);
  if (!(p.epsilon > 0.0))
    throw ParamError("resolvent_full_drift: epsilon must be positive");
  require_same_grid(x.grid, tr.grid(), "resolvent_full_drift");

  const double eps = p.epsilon;
  const double nu = p.nu;
  const double norm_nu = nu > 0.0 ? nu : 1.0;  // residual is measured here
  const double box = box_volume(x.grid);
  const std::size_t m = x.grid.point_count();
  const YosidaParams yp(p.lambda);

  tr.forward(x, ws.xhat);
  const double xnorm = std::sqrt(hm1_norm_sq(ws.xhat, tr, norm_nu, box));

  ws.u = guess ? *guess : x;
  if (ws.ylog.size() != m) {
    ws.ylog.assign(m, 0.0);
    ws.ylog_valid = false;
  }
  tr.forward(ws.u, ws.uhat);
  if (ws.rhat.grid.dim == 0) {
    ws.rhat = SpectralField(x.grid);
    ws.phat = SpectralField(x.grid);
    ws.qhat = SpectralField(x.grid);
    ws.zhat = SpectralField(x.grid);
  }
  ws.work.grid = x.grid;
  ws.work.values.resize(m);

  const double lam = p.lambda;
  const double y0 = yp.yosida_at_zero();

  // rectified(u) with warm-started roots; also refreshes ws.ylog.
  auto eval_psi = [&](const ScalarField& u, ScalarField& out) {
    for (std::size_t i = 0; i < m; ++i) {
      const double r = u.values[i];
      const LogSolve ls =
          resolvent_log_solve(r, yp, ws.ylog_valid ? ws.ylog[i] : r > 0.0 ? std::log1p(r) : 0.0);
      ws.ylog[i] = ls.y;
      out.values[i] = (r - ls.expy) / lam - y0 + lam * r;
    }
    ws.ylog_valid = true;
  };

  // Residual in spectral form: rhat = uhat + eps (nu + k^2) psihat - xhat.
  auto eval_residual = [&](double& res_rel) {
    eval_psi(ws.u, ws.work);
    tr.forward(ws.work, ws.phat);
    for (std::size_t i = 0; i < m; ++i)
      ws.rhat.coeffs[i] =
          ws.uhat.coeffs[i] + eps * (nu + tr.ksq(i)) * ws.phat.coeffs[i] - ws.xhat.coeffs[i];
    const double rnorm = std::sqrt(hm1_norm_sq(ws.rhat, tr, norm_nu, box));
    res_rel = xnorm > 0.0 ? rnorm / xnorm : rnorm;
  };

  ResolventStats local;
  double res = 0.0;
  eval_residual(res);
  double res_prev = res;
  int stagnant = 0;

  // Stage 1: damped fixed point preconditioned by the linearization at the
  // spatial mean of the iterate.
  const int fp_cap = std::min(p.solver_max_iter, 24);
  while (res > p.solver_tol && local.iterations < fp_cap) {
    const double wbar = rectified_derivative(field_mean(ws.u), yp);
    for (std::size_t i = 0; i < m; ++i) {
      const double mk = 1.0 + eps * wbar * (nu + tr.ksq(i));
      ws.uhat.coeffs[i] -= ws.rhat.coeffs[i] / mk;
    }
    tr.inverse(ws.uhat, ws.u);
    ++local.iterations;
    eval_residual(res);
    if (res > 0.9 * res_prev) {
      if (++stagnant >= 2) break;
    } else {
      stagnant = 0;
    }
    res_prev = res;
  }

  // Stage 2: Newton-Krylov. The Jacobian I + eps (nu - Lap)(w .) is
  // self-adjoint positive in the H^-1_nu inner product, so CG applies
  // with the same spectral preconditioner.
  if (res > p.solver_tol) {
    local.used_newton = true;
    std::vector<double> w(m);
    for (int outer = 0; outer < 16 && res > p.solver_tol; ++outer) {
      for (std::size_t i = 0; i < m; ++i)
        w[i] = lam + 1.0 / (lam + std::exp(ws.ylog[i]));

      auto apply_jac = [&](const SpectralField& in, SpectralField& out) {
        tr.inverse(in, ws.work);
        for (std::size_t i = 0; i < m; ++i) ws.work.values[i] *= w[i];
        tr.forward(ws.work, out);
        for (std::size_t i = 0; i < m; ++i)
          out.coeffs[i] = in.coeffs[i] + eps * (nu + tr.ksq(i)) * out.coeffs[i];
      };

      const double wbar = rectified_derivative(field_mean(ws.u), yp);
      auto precond = [&](const SpectralField& in, SpectralField& out) {
        for (std::size_t i = 0; i < m; ++i)
          out.coeffs[i] = in.coeffs[i] / (1.0 + eps * wbar * (nu + tr.ksq(i)));
      };

      // CG on J delta = -r, delta accumulated in zhat.
      SpectralField& rk = ws.rhat;  // current residual of the linear system
      for (std::size_t i = 0; i < m; ++i) {
        rk.coeffs[i] = -rk.coeffs[i];
        ws.zhat.coeffs[i] = 0.0;
      }
      precond(rk, ws.phat);
      SpectralField pk = ws.phat;  // search direction
      double rz = hm1_inner(rk, ws.phat, tr, norm_nu, box);
      const double lin_target = 0.05 * std::sqrt(std::fabs(rz));
      for (int cg = 0; cg < 64; ++cg) {
        apply_jac(pk, ws.qhat);
        const double pq = hm1_inner(pk, ws.qhat, tr, norm_nu, box);
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < m; ++i) {
          ws.zhat.coeffs[i] += alpha * pk.coeffs[i];
          rk.coeffs[i] -= alpha * ws.qhat.coeffs[i];
        }
        const double rn = std::sqrt(hm1_norm_sq(rk, tr, norm_nu, box));
        ++local.iterations;
        if (rn <= std::max(lin_target, 0.05 * p.solver_tol * xnorm)) break;
        precond(rk, ws.phat);
        const double rz_new = hm1_inner(rk, ws.phat, tr, norm_nu, box);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < m; ++i)
          pk.coeffs[i] = ws.phat.coeffs[i] + beta * pk.coeffs[i];
      }
      for (std::size_t i = 0; i < m; ++i) ws.uhat.coeffs[i] += ws.zhat.coeffs[i];
      tr.inverse(ws.uhat, ws.u);
      eval_residual(res);
      if (local.iterations > p.solver_max_iter) break;
    }
  }

  local.rel_residual = res;
  if (stats) *stats = local;
  if (res > p.solver_tol) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "resolvent_full_drift: relative residual %.3e above tolerance %.3e", res,
                  p.solver_tol);
    throw NonConvergenceError(msg);
  }
  return ws.u;
}

} // namespace

ScalarField resolvent_full_drift(const ScalarField& x, const RegularizationParams& p,
                                 SpectralTransform& tr, ResolventStats* stats,
                                 const ScalarField* initial_guess) {
  ResolventWorkspace ws;
  return resolvent_full_drift_ws(x, p, tr, ws, stats, initial_guess);
}

// ---------------------------------------------------------------------------

struct PathStepper::Impl {
  SimConfig cfg;
  const NoiseModel& model;
  SpectralTransform& tr;
  YosidaParams yp;
  TimeGrid tg;
  double box;
  double nu_rec;  // nu used for recorded H^-1 norms

  std::vector<std::uint8_t> mask;
  std::vector<ScalarField> weak_lap_e;  // (Lap - nu) e_j for tracked modes

  // state
  SolverState st;
  SpectralField xhat;
  bool xhat_valid = false;

  // buffers
  ScalarField Y;  // yosida(X) - yosida(0)
  SpectralField yhat, ghat;
  ScalarField G, dw, psi_full;
  std::vector<double> gaussians, ylog;
  bool ylog_valid = false;
  ScalarField u_prev, x_prev;
  bool u_prev_valid = false;
  ResolventWorkspace rws;

  // analysis of the current state
  bool have_resolvent_pass = false;
  double a_phi = 0.0, a_l2 = 0.0, a_min = 0.0, a_negfrac = 0.0;
  double a_mass = 0.0, a_mean = 0.0, a_grad = 0.0, a_leak = 0.0;
  bool a_phi_flag = false;

  // accumulators
  double int_l2 = 0.0, int_grad = 0.0;
  double prev_l2 = 0.0, prev_grad = 0.0;
  double worst_resid = 0.0;
  int worst_iters = 0;
  std::vector<double> wf_drift, wf_stoch;

  PathDiagnostics diag;

  Impl(const SimConfig& c, const NoiseModel& mdl, SpectralTransform& t)
      : cfg(c), model(mdl), tr(t), yp(c.params.lambda) {
    validate_params(cfg.params);
    require_same_grid(cfg.grid, model.grid, "PathStepper");
    require_same_grid(cfg.grid, tr.grid(), "PathStepper");
    if (cfg.mode == StepMode::yosida && !(cfg.params.epsilon > 0.0))
      throw ParamError("stepper: yosida mode needs epsilon > 0");
    if (cfg.output_stride < 1) throw ParamError("stepper: output stride must be >= 1");
    if (cfg.diag.weak_modes > model.mode_count())
      throw ParamError("stepper: cannot track more weak-form modes than the model has");
    tg = resolve_time_grid(cfg);
    box = box_volume(cfg.grid);
    nu_rec = cfg.diag.hm1_nu_override > 0.0
                 ? cfg.diag.hm1_nu_override
                 : (cfg.params.nu > 0.0 ? cfg.params.nu : 1.0);
    mask = interior_mask(cfg.grid);

    const std::size_t m = cfg.grid.point_count();
    Y = ScalarField(cfg.grid);
    G = ScalarField(cfg.grid);
    psi_full = ScalarField(cfg.grid);
    ylog.assign(m, 0.0);
    xhat = SpectralField(cfg.grid);
    yhat = SpectralField(cfg.grid);
    ghat = SpectralField(cfg.grid);

    for (int j = 0; j < cfg.diag.weak_modes; ++j) {
      SpectralField eh = tr.forward(model.modes[j].field);
      for (std::size_t i = 0; i < m; ++i)
        eh.coeffs[i] *= -(cfg.params.nu + tr.ksq(i));
      weak_lap_e.push_back(tr.inverse(eh));
    }
  }

  bool needs_resolvent_every_step() const {
    return cfg.mode == StepMode::direct || cfg.diag.energy || cfg.diag.weak_modes > 0;
  }

  // Cheap quadratures of the current field; always runs.
  void stats_pass() {
    const std::size_t m = st.field.size();
    const double cv = cfg.grid.cell_volume();
    double sum = 0.0, sumsq = 0.0, mn = st.field.values[0];
    std::size_t neg = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = st.field.values[i];
      sum += v;
      sumsq += v * v;
      if (v < mn) mn = v;
      if (v < 0.0) ++neg;
    }
    if (!std::isfinite(sum) || !std::isfinite(sumsq))
      throw StabilityError("state blew up at step " + std::to_string(st.step_index) +
                           ", time " + std::to_string(st.time));
    a_mass = sum * cv;
    a_mean = sum / static_cast<double>(m);
    a_l2 = sumsq * cv;
    a_min = mn;
    a_negfrac = static_cast<double>(neg) / static_cast<double>(m);
    double out_abs = 0.0, all_abs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = std::fabs(st.field.values[i] - a_mean);
      all_abs += d;
      if (!mask[i]) out_abs += d;
    }
    a_leak = all_abs > 0.0 ? out_abs / all_abs : 0.0;
  }

  // Pointwise resolvent pass: fills Y (and phi when energy is on), then
  // the spectral pieces needed for the gradient term.
  void resolvent_pass(bool want_grad) {
    const std::size_t m = st.field.size();
    const double lam = cfg.params.lambda;
    const double y0 = yp.yosida_at_zero();
    const double cv = cfg.grid.cell_volume();
    double phi = 0.0;
    bool flag = false;
    const bool want_phi = cfg.diag.energy;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = st.field.values[i];
      const LogSolve ls =
          resolvent_log_solve(r, yp, ylog_valid ? ylog[i] : (r > 0.0 ? std::log1p(r) : 0.0));
      ylog[i] = ls.y;
      const double J = ls.expy;
      Y.values[i] = (r - J) / lam - y0;
      if (want_phi) {
        const double d = r - J;
        phi += (J * ls.y - J) + d * d / (2.0 * lam) + 0.5 * lam * r * r;
        if (r < 0.0) flag = true;
      }
    }
    ylog_valid = true;
    a_phi = phi * cv;
    a_phi_flag = flag;
    have_resolvent_pass = true;

    if (want_grad) {
      if (!xhat_valid) {
        tr.forward(st.field, xhat);
        xhat_valid = true;
      }
      tr.forward(Y, yhat);
      double gsum = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double re = yhat.coeffs[i].real() + lam * xhat.coeffs[i].real();
        const double im = yhat.coeffs[i].imag() + lam * xhat.coeffs[i].imag();
        gsum += tr.ksq(i) * (re * re + im * im);
      }
      a_grad = gsum * box;
    } else {
      a_grad = 0.0;
    }
  }

  void analyze(bool is_record_step) {
    stats_pass();
    const bool res_pass = needs_resolvent_every_step() || is_record_step;
    if (res_pass) resolvent_pass(cfg.diag.energy || is_record_step || cfg.mode == StepMode::direct);
    // Trapezoid accumulation between the previous state and this one.
    if (st.step_index > 0) {
      int_l2 += 0.5 * tg.dt * (prev_l2 + a_l2);
      if (cfg.diag.energy) int_grad += 0.5 * tg.dt * (prev_grad + a_grad);
    }
    prev_l2 = a_l2;
    prev_grad = a_grad;
  }

  void start(std::uint64_t path_id, const ScalarField* initial) {
    st.field = initial ? *initial : build_datum(cfg.datum, cfg.grid);
    require_same_grid(st.field.grid, cfg.grid, "start");
    st.time = 0.0;
    st.step_index = 0;
    xhat_valid = false;
    ylog_valid = false;
    u_prev_valid = false;
    rws.ylog_valid = false;
    int_l2 = int_grad = 0.0;
    prev_l2 = prev_grad = 0.0;
    worst_resid = 0.0;
    worst_iters = 0;
    wf_drift.assign(cfg.diag.weak_modes, 0.0);
    wf_stoch.assign(cfg.diag.weak_modes, 0.0);

    diag = PathDiagnostics{};
    diag.path_id = path_id;
    diag.seed = cfg.seed;
    diag.dt = tg.dt;
    diag.noise_refine = cfg.noise_refine;
    diag.mode = cfg.mode == StepMode::direct ? 0 : 1;
    diag.lambda = cfg.params.lambda;
    diag.nu = cfg.params.nu;
    diag.epsilon = cfg.params.epsilon;
    diag.hm1_nu = nu_rec;
    diag.zero_mode_flag = cfg.params.nu == 0.0;
    diag.weak_mode_count = cfg.diag.weak_modes;

    analyze(true);
    // Datum summary.
    if (!xhat_valid) {
      tr.forward(st.field, xhat);
      xhat_valid = true;
    }
    diag.datum_l2_sq = a_l2;
    diag.datum_hm1_nu_sq = hm1_norm_sq(xhat, tr, nu_rec, box);
    diag.datum_hm1_one_sq = hm1_norm_sq(xhat, tr, 1.0, box);
    diag.datum_phi = a_phi;
  }

  void ensure_xhat() {
    if (!xhat_valid) {
      tr.forward(st.field, xhat);
      xhat_valid = true;
    }
  }

  void record_now() {
    ensure_xhat();
    DiagRecord r;
    r.time = st.time;
    r.l2_sq = a_l2;
    r.hm1_nu_sq = hm1_norm_sq(xhat, tr, nu_rec, box);
    r.hm1_one_sq = hm1_norm_sq(xhat, tr, 1.0, box);
    double hom = 0.0;
    const std::size_t m = xhat.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (tr.ksq(i) == 0.0) continue;
      hom += std::norm(xhat.coeffs[i]) / tr.ksq(i);
    }
    r.hm1_homog_sq = hom * box;
    r.mean = a_mean;
    r.mass = a_mass;
    r.min_value = a_min;
    r.neg_fraction = a_negfrac;
    r.phi = a_phi;
    r.phi_flagged = a_phi_flag;
    r.grad_psi_sq = a_grad;
    r.int_grad_psi_sq = int_grad;
    r.int_l2_sq = int_l2;
    r.leakage = a_leak;
    r.solver_resid = worst_resid;
    r.solver_iters = worst_iters;
    diag.records.push_back(r);
    worst_resid = 0.0;
    worst_iters = 0;

    if (cfg.diag.weak_modes > 0) {
      std::vector<double> vals(cfg.diag.weak_modes);
      for (int j = 0; j < cfg.diag.weak_modes; ++j)
        vals[j] = dot_patch(st.field, model.modes[j]);
      diag.weak_value.push_back(std::move(vals));
      diag.weak_drift_int.push_back(wf_drift);
      diag.weak_stoch_int.push_back(wf_stoch);
    }
  }

  void advance() {
    if (!have_resolvent_pass && needs_resolvent_every_step())
      resolvent_pass(cfg.diag.energy || cfg.mode == StepMode::direct);

    const double dt = tg.dt;
    const double lam = cfg.params.lambda;
    const double nu = cfg.params.nu;
    const std::size_t m = st.field.size();

    // Weak-form drift integral uses the start-of-step state (left rule:
    // the residual it leaves is exactly first order in dt).
    if (cfg.diag.weak_modes > 0) {
      for (std::size_t i = 0; i < m; ++i)
        psi_full.values[i] = Y.values[i] + lam * st.field.values[i];
      for (int j = 0; j < cfg.diag.weak_modes; ++j)
        wf_drift[j] += dt * inner_l2(psi_full, weak_lap_e[j]);
    }

    // Noise term G = X dW + (dt/2) sigma_sq X.
    const bool noisy = !cfg.noise_off;
    if (noisy) {
      sample_increment_into(model, dt, cfg.seed, diag.path_id,
                            static_cast<std::uint64_t>(st.step_index), cfg.noise_refine,
                            gaussians, dw);
      for (std::size_t i = 0; i < m; ++i)
        G.values[i] =
            st.field.values[i] * (dw.values[i] + 0.5 * dt * model.sigma_sq.values[i]);
      for (int j = 0; j < cfg.diag.weak_modes; ++j)
        wf_stoch[j] += dot_patch(G, model.modes[j]);
    }

    if (cfg.mode == StepMode::direct) {
      ensure_xhat();
      if (noisy) tr.forward(G, ghat);
      for (std::size_t i = 0; i < m; ++i) {
        const double resp = nu + tr.ksq(i);
        std::complex<double> v = xhat.coeffs[i] - dt * resp * yhat.coeffs[i];
        if (noisy) v += ghat.coeffs[i];
        xhat.coeffs[i] = v / (1.0 + dt * lam * resp);
      }
      tr.inverse(xhat, st.field);
      xhat_valid = true;
    } else {
      // Outer Yosida increment (1/eps)(resolvent - identity).
      ResolventStats stats;
      const ScalarField* guess = nullptr;
      if (u_prev_valid) {
        // Shift the previous solution by the state change for the warm start.
        for (std::size_t i = 0; i < m; ++i)
          u_prev.values[i] += st.field.values[i] - x_prev.values[i];
        guess = &u_prev;
      }
      x_prev = st.field;
      ScalarField u = resolvent_full_drift_ws(st.field, cfg.params, tr, rws, &stats, guess);
      worst_resid = std::max(worst_resid, stats.rel_residual);
      worst_iters = std::max(worst_iters, stats.iterations);
      const double scale = dt / cfg.params.epsilon;
      for (std::size_t i = 0; i < m; ++i) {
        double v = st.field.values[i] + scale * (u.values[i] - st.field.values[i]);
        if (noisy) v += G.values[i];
        st.field.values[i] = v;
      }
      u_prev = std::move(u);
      u_prev_valid = true;
      xhat_valid = false;
    }

    ++st.step_index;
    st.time = st.step_index * tg.dt;
    have_resolvent_pass = false;
    const bool rec = st.step_index % cfg.output_stride == 0 || st.step_index == tg.n_steps;
    analyze(rec);
  }

  PathDiagnostics run(std::uint64_t path_id) {
    start(path_id, nullptr);
    record_now();
    for (int s = 0; s < tg.n_steps; ++s) {
      advance();
      if (st.step_index % cfg.output_stride == 0 || st.step_index == tg.n_steps)
        record_now();
    }
    return std::move(diag);
  }
};

PathStepper::PathStepper(const SimConfig& cfg, const NoiseModel& model, SpectralTransform& tr)
    : impl_(std::make_unique<Impl>(cfg, model, tr)) {}
PathStepper::~PathStepper() = default;

PathDiagnostics PathStepper::run(std::uint64_t path_id) { return impl_->run(path_id); }
void PathStepper::start(std::uint64_t path_id) { impl_->start(path_id, nullptr); }
void PathStepper::advance() { impl_->advance(); }
const SolverState& PathStepper::state() const { return impl_->st; }
const SpectralField& PathStepper::state_hat() {
  impl_->ensure_xhat();
  return impl_->xhat;
}
double PathStepper::current_dt() const { return impl_->tg.dt; }
int PathStepper::total_steps() const { return impl_->tg.n_steps; }
PathDiagnostics& PathStepper::diagnostics() { return impl_->diag; }
void PathStepper::record_now() { impl_->record_now(); }

SolverState step_ito(const SolverState& state, const SimConfig& cfg,
                     const NoiseModel& model, SpectralTransform& tr, StepMode mode) {
  SimConfig c = cfg;
  c.mode = mode;
  PathStepper stepper(c, model, tr);
  stepper.impl_->start(0, &state.field);
  stepper.impl_->st.time = state.time;
  stepper.impl_->st.step_index = state.step_index;
  stepper.impl_->advance();
  return stepper.impl_->st;
}

PathDiagnostics simulate_path(const SimConfig& cfg, const NoiseModel& model,
                              SpectralTransform& tr, std::uint64_t path_id) {
  PathStepper stepper(cfg, model, tr);
  return stepper.run(path_id);
}

// ---------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double band3_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  s /= static_cast<double>(v.size() - 1);
  return 3.0 * std::sqrt(s / static_cast<double>(v.size()));
}

// Squared H^-1_nu distance between two spectral states.
double dist_sq_hm1(const SpectralField& a, const SpectralField& b,
                   const SpectralTransform& tr, double nu, double box) {
  double s = 0.0;
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i)
    s += std::norm(a.coeffs[i] - b.coeffs[i]) / (nu + tr.ksq(i));
  return s * box;
}

// Windowed homogeneous order -1 distance: restrict the difference to the
// interior window, drop its mean (torus zero mode), then weight by 1/k^2.
double dist_sq_windowed(const ScalarField& fa, const ScalarField& fb,
                        const std::vector<std::uint8_t>& mask, SpectralTransform& tr,
                        ScalarField& scratch, double box) {
  const std::size_t m = fa.size();
  scratch.grid = fa.grid;
  scratch.values.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    scratch.values[i] = mask[i] ? fa.values[i] - fb.values[i] : 0.0;
  SpectralField sh = tr.forward(scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (tr.ksq(i) == 0.0) continue;  // mean of the windowed difference dropped
    s += std::norm(sh.coeffs[i]) / tr.ksq(i);
  }
  return s * box;
}

} // namespace

CascadeReport cascade_study(const SimConfig& base, const ScheduleSpec& schedules,
                            const NoiseModel& model, SpectralTransform& tr) {
  auto check_decreasing = [](const std::vector<double>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[i - 1])
        throw ParamError(std::string("cascade: ") + name + " schedule must be non-increasing");
  };
  check_decreasing(schedules.epsilons, "epsilon");
  check_decreasing(schedules.nus, "nu");
  check_decreasing(schedules.lambdas, "lambda");

  CascadeReport rep;
  rep.n_paths = base.n_paths;
  const double box = box_volume(base.grid);
  const auto mask = interior_mask(base.grid);
  ScalarField scratch(base.grid);

  // Runs all member configs in lockstep with shared increments; returns
  // per-pair vectors of sup-in-time squared distances, one entry per path.
  // pair_fn maps member states to the list of (index_a, index_b, nu_norm,
  // windowed) tuples to measure.
  struct PairSpec {
    std::size_t a, b;
    double nu_norm;
    bool windowed;
  };
  auto run_members = [&](const std::vector<SimConfig>& members,
                         const std::vector<PairSpec>& pairs)
      -> std::vector<std::vector<double>> {
    std::vector<std::unique_ptr<PathStepper>> steppers;
    steppers.reserve(members.size());
    for (const auto& mc : members) steppers.push_back(std::make_unique<PathStepper>(mc, model, tr));
    const int n_steps = steppers.front()->total_steps();
    for (const auto& s : steppers)
      if (s->total_steps() != n_steps)
        throw ParamError("cascade: members disagree on the step count");

    std::vector<std::vector<double>> sup_sq(pairs.size());
    for (auto& v : sup_sq) v.reserve(base.n_paths);
    for (int p = 0; p < base.n_paths; ++p) {
      for (auto& s : steppers) s->start(static_cast<std::uint64_t>(p));
      std::vector<double> cur(pairs.size(), 0.0);
      auto measure = [&]() {
        for (std::size_t q = 0; q < pairs.size(); ++q) {
          const PairSpec& ps = pairs[q];
          double d;
          if (ps.windowed) {
            d = dist_sq_windowed(steppers[ps.a]->state().field, steppers[ps.b]->state().field,
                                 mask, tr, scratch, box);
          } else {
            d = dist_sq_hm1(steppers[ps.a]->state_hat(), steppers[ps.b]->state_hat(), tr,
                            ps.nu_norm, box);
          }
          cur[q] = std::max(cur[q], d);
        }
      };
      measure();
      for (int s = 0; s < n_steps; ++s) {
        for (auto& st : steppers) st->advance();
        if ((s + 1) % base.output_stride == 0 || s + 1 == n_steps) measure();
      }
      for (std::size_t q = 0; q < pairs.size(); ++q) sup_sq[q].push_back(cur[q]);
    }
    return sup_sq;
  };

  auto member_base = [&](double lambda, double nu, double eps, StepMode mode) {
    SimConfig mc = base;
    mc.params.lambda = lambda;
    mc.params.nu = nu;
    mc.params.epsilon = eps;
    mc.mode = mode;
    mc.diag.energy = false;
    mc.diag.weak_modes = 0;
    return mc;
  };

  // Stage 1: epsilon schedule against the direct path at fixed (lambda, nu).
  if (!schedules.epsilons.empty()) {
    std::vector<SimConfig> members;
    members.push_back(member_base(base.params.lambda, base.params.nu, 0.0, StepMode::direct));
    for (double eps : schedules.epsilons)
      members.push_back(member_base(base.params.lambda, base.params.nu, eps, StepMode::yosida));
    // Common dt: the stability bound capped by the smallest epsilon.
    double dt = 0.0;
    for (auto& mc : members) {
      const double b = stability_bound(mc.grid, mc.params, mc.c_stab);
      dt = dt == 0.0 ? b : std::min(dt, b);
    }
    for (double eps : schedules.epsilons) dt = std::min(dt, eps);
    for (auto& mc : members) mc.dt = dt;
    const double nu_norm = base.params.nu > 0.0 ? base.params.nu : 1.0;
    std::vector<PairSpec> pairs;
    for (std::size_t e = 0; e < schedules.epsilons.size(); ++e)
      pairs.push_back({e + 1, 0, nu_norm, false});
    auto sup = run_members(members, pairs);
    for (std::size_t e = 0; e < schedules.epsilons.size(); ++e)
      rep.eps_stage.push_back(
          {schedules.epsilons[e], 0.0, mean_of(sup[e]), band3_of(sup[e])});
    for (std::size_t e = 1; e < rep.eps_stage.size(); ++e)
      if (rep.eps_stage[e].mean_sup_dist_sq > rep.eps_stage[e - 1].mean_sup_dist_sq)
        rep.eps_monotone = false;
  }

  // Stage 2: nu schedule at fixed lambda, direct mode.
  if (schedules.nus.size() >= 2) {
    std::vector<SimConfig> members;
    for (double nu : schedules.nus)
      members.push_back(member_base(base.params.lambda, nu, 0.0, StepMode::direct));
    double dt = 0.0;
    for (auto& mc : members) {
      const double b = stability_bound(mc.grid, mc.params, mc.c_stab);
      dt = dt == 0.0 ? b : std::min(dt, b);
    }
    for (auto& mc : members) mc.dt = dt;
    std::vector<PairSpec> pairs;
    for (std::size_t i = 0; i + 1 < schedules.nus.size(); ++i) {
      const double nu_norm = std::max(schedules.nus[i], schedules.nus[i + 1]);
      pairs.push_back({i, i + 1, nu_norm > 0.0 ? nu_norm : 1.0, false});
    }
    auto sup = run_members(members, pairs);
    for (std::size_t i = 0; i + 1 < schedules.nus.size(); ++i)
      rep.nu_stage.push_back(
          {schedules.nus[i], schedules.nus[i + 1], mean_of(sup[i]), band3_of(sup[i])});
    const RateFit fit = nu_rate_check(rep.nu_stage);
    rep.nu_rate_alpha = fit.alpha;
    rep.nu_rate_logc = fit.log_c;
  }

  // Stage 3: lambda schedule, windowed homogeneous distance.
  if (schedules.lambdas.size() >= 2) {
    std::vector<SimConfig> members;
    for (double lam : schedules.lambdas)
      members.push_back(member_base(lam, base.params.nu, 0.0, StepMode::direct));
    double dt = 0.0;
    for (auto& mc : members) {
      const double b = stability_bound(mc.grid, mc.params, mc.c_stab);
      dt = dt == 0.0 ? b : std::min(dt, b);
    }
    for (auto& mc : members) mc.dt = dt;
    std::vector<PairSpec> pairs;
    for (std::size_t i = 0; i + 1 < schedules.lambdas.size(); ++i)
      pairs.push_back({i, i + 1, 1.0, true});
    auto sup = run_members(members, pairs);
    for (std::size_t i = 0; i + 1 < schedules.lambdas.size(); ++i)
      rep.lambda_stage.push_back({schedules.lambdas[i], schedules.lambdas[i + 1],
                                  mean_of(sup[i]), band3_of(sup[i])});
    for (std::size_t i = 1; i < rep.lambda_stage.size(); ++i)
      if (rep.lambda_stage[i].mean_sup_dist_sq > rep.lambda_stage[i - 1].mean_sup_dist_sq)
        rep.lambda_shrinking = false;
  }

  return rep;
}

} // namespace logdiff
