#include "logdiff/noise.hpp"

#include <algorithm>
#include <cmath>

#include "logdiff/rng.hpp"

namespace logdiff {

namespace {

// Mollifier profile with unit peak: exp(1 - 1/(1-u^2)) inside |u| < 1.
double bump(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s);
}

double bump_deriv(double u) {
  const double s = 1.0 - u * u;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / s) * (-2.0 * u / (s * s));
}

struct Placement {
  std::array<double, 3> center{{0.0, 0.0, 0.0}};
  double width = 0.0;
};

// Dyadic bump placement: level l has width L / 2^{l+1} and per-axis
// centers -L/2 + (i + 1/2) L / 2^l, so every support sits inside the
// central half-box [-L/2, L/2]^d.
std::vector<Placement> dyadic_placements(const Grid& g, int k_count) {
  std::vector<Placement> out;
  const double L = g.half_length;
  for (int level = 0; static_cast<int>(out.size()) < k_count; ++level) {
    const int per_axis = 1 << level;
    const double width = L / (2 << level);
    const int total = 1 << (level * g.dim);
    for (int m = 0; m < total && static_cast<int>(out.size()) < k_count; ++m) {
      Placement p;
      p.width = width;
      int rem = m;
      for (int a = g.dim - 1; a >= 0; --a) {
        const int i = rem % per_axis;
        rem /= per_axis;
        p.center[a] = -L / 2.0 + (i + 0.5) * L / per_axis;
      }
      out.push_back(p);
    }
  }
  return out;
}

double decay_value(const NoiseSpec& spec, int k /* 1-based */) {
  if (spec.decay == "dyadic") return spec.scale * std::pow(2.0, -k);
  if (spec.decay == "geometric") return spec.scale * std::pow(spec.decay_rate, k);
  if (spec.decay == "power") return spec.scale * std::pow(static_cast<double>(k), -spec.decay_rate);
  throw ParamError("noise: unknown decay law '" + spec.decay + "'");
}

// Analytic bound on sum_{k > K} mu_k; infinite decay laws throw here.
double decay_tail(const NoiseSpec& spec, int k_count) {
  if (spec.decay == "dyadic") return spec.scale * std::pow(2.0, -k_count);
  if (spec.decay == "geometric") {
    if (!(spec.decay_rate > 0.0) || spec.decay_rate >= 1.0)
      throw SummabilityError("noise: geometric decay needs ratio in (0,1), got " +
                             std::to_string(spec.decay_rate));
    return spec.scale * std::pow(spec.decay_rate, k_count + 1) / (1.0 - spec.decay_rate);
  }
  if (spec.decay == "power") {
    if (spec.decay_rate <= 1.0)
      throw SummabilityError("noise: power decay with exponent <= 1 is not summable");
    return spec.scale * std::pow(static_cast<double>(k_count), 1.0 - spec.decay_rate) /
           (spec.decay_rate - 1.0);
  }
  throw ParamError("noise: unknown decay law '" + spec.decay + "'");
}

void fill_bump_mode(NoiseMode& mode, const Grid& g, const Placement& p) {
  const int n = g.n;
  const double h = g.spacing();
  // Per-axis sample tables over the support range.
  std::array<std::vector<double>, 3> vals, derivs;
  for (int a = 0; a < g.dim; ++a) {
    const double c = p.center[a];
    int s = static_cast<int>(std::ceil((c - p.width + g.half_length) / h));
    int e = static_cast<int>(std::floor((c + p.width + g.half_length) / h));
    s = std::max(s, 0);
    e = std::min(e, n - 1);
    mode.start[a] = s;
    mode.count[a] = e - s + 1;
    vals[a].resize(mode.count[a]);
    derivs[a].resize(mode.count[a]);
    for (int i = 0; i < mode.count[a]; ++i) {
      const double u = (g.coordinate(s + i) - c) / p.width;
      vals[a][i] = bump(u);
      derivs[a][i] = bump_deriv(u) / p.width;
    }
  }
  for (int a = g.dim; a < 3; ++a) {
    mode.start[a] = 0;
    mode.count[a] = 1;
    vals[a] = {1.0};
    derivs[a] = {0.0};
  }

  mode.field = ScalarField(g, 0.0);
  mode.patch.assign(static_cast<std::size_t>(mode.count[0]) * mode.count[1] * mode.count[2], 0.0);

  std::size_t strides[3] = {1, 1, 1};
  for (int a = g.dim - 2; a >= 0; --a)
    strides[a] = strides[a + 1] * static_cast<std::size_t>(n);

  double sup = 0.0;
  double grad_int = 0.0;  // integral of |grad e|^d
  std::size_t pp = 0;
  for (int i = 0; i < mode.count[0]; ++i)
    for (int j = 0; j < mode.count[1]; ++j)
      for (int l = 0; l < mode.count[2]; ++l, ++pp) {
        const double v = vals[0][i] * vals[1][j] * vals[2][l];
        mode.patch[pp] = v;
        std::size_t flat = (mode.start[0] + i) * strides[0];
        if (g.dim > 1) flat += (mode.start[1] + j) * strides[1];
        if (g.dim > 2) flat += (mode.start[2] + l) * strides[2];
        mode.field.values[flat] = v;
        sup = std::max(sup, std::fabs(v));
        double gsq = 0.0;
        double d0 = derivs[0][i] * vals[1][j] * vals[2][l];
        gsq += d0 * d0;
        if (g.dim > 1) {
          double d1 = vals[0][i] * derivs[1][j] * vals[2][l];
          gsq += d1 * d1;
        }
        if (g.dim > 2) {
          double d2 = vals[0][i] * vals[1][j] * derivs[2][l];
          gsq += d2 * d2;
        }
        grad_int += std::pow(gsq, 0.5 * g.dim);
      }
  mode.sup_norm = sup;
  mode.grad_ld_norm = std::pow(grad_int * g.cell_volume(), 1.0 / g.dim);
}

void fill_constant_mode(NoiseMode& mode, const Grid& g, double value) {
  mode.field = ScalarField(g, value);
  mode.start = {0, 0, 0};
  mode.count = {g.n, g.dim > 1 ? g.n : 1, g.dim > 2 ? g.n : 1};
  mode.patch.assign(g.point_count(), value);
  mode.sup_norm = std::fabs(value);
  mode.grad_ld_norm = 0.0;
}

void add_patch(ScalarField& out, const NoiseMode& mode, double coeff) {
  const Grid& g = out.grid;
  const int n = g.n;
  std::size_t strides[3] = {1, 1, 1};
  for (int a = g.dim - 2; a >= 0; --a)
    strides[a] = strides[a + 1] * static_cast<std::size_t>(n);
  std::size_t pp = 0;
  for (int i = 0; i < mode.count[0]; ++i)
    for (int j = 0; j < mode.count[1]; ++j) {
      std::size_t flat = (mode.start[0] + i) * strides[0];
      if (g.dim > 1) flat += (mode.start[1] + j) * strides[1];
      if (g.dim > 2) flat += mode.start[2];
      double* dst = out.values.data() + flat;
      const double* src = mode.patch.data() + pp;
      for (int l = 0; l < mode.count[2]; ++l) dst[l] += coeff * src[l];
      pp += mode.count[2];
    }
}

} // namespace

NoiseModel build_noise_model(const NoiseSpec& spec, const Grid& grid) {
  if (spec.mode_count < 1)
    throw ParamError("noise: mode_count must be >= 1");
  if (!(spec.scale > 0.0))
    throw ParamError("noise: scale must be positive");
  if (spec.family != "bump" && spec.family != "constant")
    throw ParamError("noise: unknown mode family '" + spec.family + "'");

  NoiseModel model;
  model.grid = grid;
  model.spec = spec;
  model.modes.resize(spec.mode_count);

  if (spec.family == "bump") {
    const auto placements = dyadic_placements(grid, spec.mode_count);
    for (int k = 0; k < spec.mode_count; ++k)
      fill_bump_mode(model.modes[k], grid, placements[k]);
  } else {
    if (spec.mode_count != 1)
      throw ParamError("noise: constant family has exactly one mode");
    fill_constant_mode(model.modes[0], grid, spec.constant_value);
  }

  double max_mu_prime = 0.0;
  model.sigma_sq = ScalarField(grid, 0.0);
  model.e_sq_fields.reserve(model.modes.size());
  for (int k = 0; k < spec.mode_count; ++k) {
    NoiseMode& m = model.modes[k];
    m.mu = decay_value(spec, k + 1);
    m.mu_prime = m.sup_norm * m.sup_norm + m.grad_ld_norm * m.grad_ld_norm + 1.0;
    max_mu_prime = std::max(max_mu_prime, m.mu_prime);

    const double sup_sq = m.sup_norm * m.sup_norm;
    model.trace_sum += m.mu * m.mu_prime;
    model.c0 += m.mu * std::max(sup_sq, 1.0) *
                (sup_sq + 4.0 * m.grad_ld_norm * m.grad_ld_norm);
    model.sum_mu_sup_sq += m.mu * sup_sq;

    ScalarField esq(grid, 0.0);
    const std::size_t mgrid = grid.point_count();
    for (std::size_t i = 0; i < mgrid; ++i) {
      const double v = m.field.values[i];
      esq.values[i] = v * v;
      model.sigma_sq.values[i] += m.mu * v * v;
    }
    model.e_sq_fields.push_back(std::move(esq));
  }

  // Tail criterion: the truncated trace must carry at least 99% of the
  // analytic tail-summed limit, with the tail weighted by the worst
  // per-mode constant seen. The constant family is a finite (single-mode)
  // covariance with no truncation tail, so it is exempt.
  if (spec.family != "constant") {
    const double tail = decay_tail(spec, spec.mode_count) * max_mu_prime;
    if (!(tail <= 0.01 * (model.trace_sum + tail)))
      throw SummabilityError(
          "noise: decay tail beyond the configured modes exceeds 1% of the trace sum "
          "(tail " + std::to_string(tail) + " vs partial " + std::to_string(model.trace_sum) + ")");
  }

  return model;
}

void sample_increment_into(const NoiseModel& model, double dt,
                           std::uint64_t seed, std::uint64_t path,
                           std::uint64_t step, int refine,
                           std::vector<double>& gaussians, ScalarField& assembled) {
  if (!(dt > 0.0)) throw ParamError("sample_increment: dt must be positive");
  if (refine < 0 || refine > 30) throw ParamError("sample_increment: bad refine level");
  const int k_count = model.mode_count();
  gaussians.resize(k_count);
  const std::uint64_t slots = 1ull << refine;
  const double inv_sqrt_slots = 1.0 / std::sqrt(static_cast<double>(slots));
  for (int k = 0; k < k_count; ++k) {
    double g = 0.0;
    for (std::uint64_t j = 0; j < slots; ++j)
      g += normal_draw(seed, path, step * slots + j, static_cast<std::uint64_t>(k));
    gaussians[k] = g * inv_sqrt_slots;
  }
  assembled.grid = model.grid;
  assembled.values.assign(model.grid.point_count(), 0.0);
  for (int k = 0; k < k_count; ++k)
    add_patch(assembled, model.modes[k], std::sqrt(model.modes[k].mu * dt) * gaussians[k]);
}

WienerIncrement sample_increment(const NoiseModel& model, double dt,
                                 std::uint64_t seed, std::uint64_t path,
                                 std::uint64_t step, int refine) {
  WienerIncrement inc;
  inc.dt = dt;
  sample_increment_into(model, dt, seed, path, step, refine, inc.gaussians, inc.assembled);
  return inc;
}

ScalarField sigma_apply(const ScalarField& x, const WienerIncrement& dw) {
  require_same_grid(x.grid, dw.assembled.grid, "sigma_apply");
  ScalarField out(x.grid);
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i)
    out.values[i] = x.values[i] * dw.assembled.values[i];
  return out;
}

ScalarField strat_correction(const ScalarField& x, const NoiseModel& model) {
  require_same_grid(x.grid, model.grid, "strat_correction");
  ScalarField out(x.grid);
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i)
    out.values[i] = x.values[i] * model.sigma_sq.values[i];
  return out;
}

IsometryReport ito_isometry_check(const NoiseModel& model, SpectralTransform& tr,
                                  const ScalarField& x, int n_samples, double dt,
                                  double nu, std::uint64_t seed) {
  require_same_grid(x.grid, model.grid, "ito_isometry_check");
  if (n_samples < 100) throw ParamError("ito_isometry_check: need at least 100 samples");
  const int k_count = model.mode_count();
  const std::size_t m = x.size();

  std::vector<SpectralField> xe_hat;
  xe_hat.reserve(k_count);
  ScalarField prod(x.grid);
  for (int k = 0; k < k_count; ++k) {
    for (std::size_t i = 0; i < m; ++i)
      prod.values[i] = x.values[i] * model.modes[k].field.values[i];
    xe_hat.push_back(tr.forward(prod));
  }

  double box = 1.0;
  for (int a = 0; a < x.grid.dim; ++a) box *= 2.0 * x.grid.half_length;

  // Gram matrices sqrt(mu_k mu_l) <x e_k, x e_l> in both test spaces.
  std::vector<double> gram_l2(static_cast<std::size_t>(k_count) * k_count, 0.0);
  std::vector<double> gram_hm1(gram_l2.size(), 0.0);
  const std::size_t nspec = x.grid.point_count();
  for (int k = 0; k < k_count; ++k)
    for (int l = k; l < k_count; ++l) {
      double s2 = 0.0, sh = 0.0;
      for (std::size_t i = 0; i < nspec; ++i) {
        const double re = (xe_hat[k].coeffs[i] * std::conj(xe_hat[l].coeffs[i])).real();
        s2 += re;
        sh += re / (nu + tr.ksq(i));
      }
      const double w = std::sqrt(model.modes[k].mu * model.modes[l].mu) * box;
      gram_l2[k * k_count + l] = gram_l2[l * k_count + k] = w * s2;
      gram_hm1[k * k_count + l] = gram_hm1[l * k_count + k] = w * sh;
    }

  const std::uint64_t eff_seed = mix64(seed ^ 0x49534F4D45545259ull);
  std::vector<double> g(k_count);
  double mean2 = 0.0, msq2 = 0.0, meanh = 0.0, msqh = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    for (int k = 0; k < k_count; ++k)
      g[k] = normal_draw(eff_seed, static_cast<std::uint64_t>(s), 0, static_cast<std::uint64_t>(k));
    double q2 = 0.0, qh = 0.0;
    for (int k = 0; k < k_count; ++k) {
      const double gk = g[k];
      const double* row2 = gram_l2.data() + static_cast<std::size_t>(k) * k_count;
      const double* rowh = gram_hm1.data() + static_cast<std::size_t>(k) * k_count;
      for (int l = 0; l < k_count; ++l) {
        q2 += gk * g[l] * row2[l];
        qh += gk * g[l] * rowh[l];
      }
    }
    mean2 += q2;
    msq2 += q2 * q2;
    meanh += qh;
    msqh += qh * qh;
  }
  mean2 /= n_samples;
  msq2 /= n_samples;
  meanh /= n_samples;
  msqh /= n_samples;

  auto make_space = [&](const char* name, double mean, double msq,
                        const std::vector<double>& gram) {
    IsometrySpaceReport r;
    r.space = name;
    r.empirical = mean;
    double trace = 0.0;
    for (int k = 0; k < k_count; ++k) trace += gram[static_cast<std::size_t>(k) * k_count + k];
    r.expected = trace;
    const double var = std::max(msq - mean * mean, 0.0);
    const double band3 = 3.0 * std::sqrt(var / n_samples);
    if (trace > 0.0) {
      r.rel_deviation = std::fabs(mean - trace) / trace;
      r.band3_rel = band3 / trace;
    } else {
      r.rel_deviation = std::fabs(mean - trace);
      r.band3_rel = band3;
    }
    r.within_band = std::fabs(mean - trace) <= band3 || trace == 0.0;
    return r;
  };

  IsometryReport rep;
  rep.n_samples = n_samples;
  rep.dt = dt;
  rep.spaces.push_back(make_space("L2", mean2, msq2, gram_l2));
  rep.spaces.push_back(make_space("Hminus1", meanh, msqh, gram_hm1));
  return rep;
}

} // namespace logdiff
