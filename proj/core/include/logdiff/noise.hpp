#ifndef LOGDIFF_NOISE_HPP
#define LOGDIFF_NOISE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "logdiff/grid.hpp"
#include "logdiff/transform.hpp"

namespace logdiff {

// Configuration block for the driving noise.
struct NoiseSpec {
  std::string family = "bump";   // "bump" or "constant"
  int mode_count = 16;
  std::string decay = "dyadic";  // "dyadic", "geometric", "power"
  double decay_rate = 0.5;       // ratio for geometric, exponent for power
  double scale = 1.0;            // overall intensity prefactor on mu_k
  double constant_value = 1.0;   // amplitude of the single constant mode
};

struct NoiseMode {
  ScalarField field;          // e_k on the grid
  double mu = 0.0;            // intensity mu_k
  double sup_norm = 0.0;      // ||e_k||_inf over the grid
  double grad_ld_norm = 0.0;  // || |grad e_k| ||_{L^d}, analytic gradient quadrature
  double mu_prime = 0.0;      // sup^2 + grad_ld^2 + 1
  // Support bounding box (per axis start index and count); the bump
  // family has compact support inside the central half-box, so hot loops
  // only touch these points. Unused axes have count n.
  std::array<int, 3> start{{0, 0, 0}};
  std::array<int, 3> count{{0, 0, 0}};
  std::vector<double> patch;  // field values inside the box, row-major
};

struct NoiseModel {
  Grid grid;
  NoiseSpec spec;
  std::vector<NoiseMode> modes;
  std::vector<ScalarField> e_sq_fields;  // e_k^2
  ScalarField sigma_sq;                  // sum_k mu_k e_k^2
  double c0 = 0.0;         // sum mu_k (sup^2 v 1)(sup^2 + 4 grad_ld^2)
  double trace_sum = 0.0;  // sum mu_k mu_prime_k
  double sum_mu_sup_sq = 0.0;  // sum mu_k sup_k^2 (multiplication-operator norm bound)

  int mode_count() const { return static_cast<int>(modes.size()); }
};

// Builds the mode family and all per-mode constants by grid quadrature.
// Throws SummabilityError when the decay law fails the 1% tail criterion
// against the worst mu_prime, or is outright non-summable.
NoiseModel build_noise_model(const NoiseSpec& spec, const Grid& grid);

struct WienerIncrement {
  double dt = 0.0;
  std::vector<double> gaussians;  // one standard normal per mode
  ScalarField assembled;          // sum_k sqrt(mu_k dt) g_k e_k
};

// Draw the increment for one (path, step). `refine` subdivides the step
// into 2^refine counter slots and sums them, so a run at dt and a run at
// dt/2 with refine+1 / refine see the same Brownian path.
WienerIncrement sample_increment(const NoiseModel& model, double dt,
                                 std::uint64_t seed, std::uint64_t path,
                                 std::uint64_t step, int refine = 0);

// Same, writing into caller storage (gaussians sized K, field on the grid).
void sample_increment_into(const NoiseModel& model, double dt,
                           std::uint64_t seed, std::uint64_t path,
                           std::uint64_t step, int refine,
                           std::vector<double>& gaussians, ScalarField& assembled);

// Pointwise product x * assembled increment.
ScalarField sigma_apply(const ScalarField& x, const WienerIncrement& dw);

// Pointwise product x * sum_k mu_k e_k^2 (the Stratonovich-to-Ito
// rectification operator).
ScalarField strat_correction(const ScalarField& x, const NoiseModel& model);

struct IsometrySpaceReport {
  std::string space;        // "L2" or "Hminus1"
  double empirical = 0.0;   // mean of ||x dW||^2 / dt over samples
  double expected = 0.0;    // sum_k mu_k ||x e_k||^2
  double rel_deviation = 0.0;
  double band3_rel = 0.0;   // three-sigma Monte-Carlo band, relative
  bool within_band = false;
};

struct IsometryReport {
  int n_samples = 0;
  double dt = 0.0;
  std::vector<IsometrySpaceReport> spaces;
};

// Statistical check of E ||x dW||^2 = dt sum_k mu_k ||x e_k||^2 in L2 and
// in the nu-shifted negative-order norm. Implemented through the Gram
// matrix G_kl = sqrt(mu_k mu_l) <x e_k, x e_l>, whose quadratic form in
// the sampled gaussians equals the per-sample squared norm exactly, so no
// transform runs inside the sample loop.
IsometryReport ito_isometry_check(const NoiseModel& model, SpectralTransform& tr,
                                  const ScalarField& x, int n_samples, double dt,
                                  double nu, std::uint64_t seed);

} // namespace logdiff

#endif
