#ifndef LOGDIFF_TRAJECTORY_HPP
#define LOGDIFF_TRAJECTORY_HPP

#include <cstdint>
#include <vector>

namespace logdiff {

// One diagnostic sample along a path. Time integrals are accumulated by
// the trapezoid rule at full step resolution inside the stepper, so a
// coarse output stride does not degrade them.
struct DiagRecord {
  double time = 0.0;
  double l2_sq = 0.0;           // ||X||_{L2}^2
  double hm1_nu_sq = 0.0;       // ||X||_{H^-1_nu}^2 at the recorded nu
  double hm1_one_sq = 0.0;      // same norm at nu = 1, comparable across runs
  double hm1_homog_sq = 0.0;    // homogeneous order -1 norm^2 of X - mean(X)
  double mean = 0.0;            // spatial mean (zero-mode tracking)
  double mass = 0.0;            // integral of X over the box
  double min_value = 0.0;
  double neg_fraction = 0.0;    // fraction of grid points with X < 0
  double phi = 0.0;             // Phi_lambda(X)
  bool phi_flagged = false;     // negative arguments met the extended envelope
  double grad_psi_sq = 0.0;     // ||grad rectified(X)||_{L2}^2
  double int_grad_psi_sq = 0.0; // integral_0^t of the above
  double int_l2_sq = 0.0;       // integral_0^t of ||X||_{L2}^2
  double leakage = 0.0;         // fluctuation mass fraction outside the interior window
  double solver_resid = 0.0;    // worst inner-solve relative residual since last record
  int solver_iters = 0;         // worst inner-solve iteration count since last record
};

// Full per-path record. The weak-form series store, per output time and
// tracked noise mode j: the pairing <X(t), e_j>, the accumulated drift
// integral int_0^t <rectified(X), (Lap - nu) e_j> ds, and the accumulated
// stochastic integral sum <X dW + (dt/2) sigma_sq X, e_j>. Together these
// replay the realized increments for the weak-form residual without
// storing whole fields.
struct PathDiagnostics {
  std::uint64_t path_id = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  int noise_refine = 0;
  int mode = 0;  // 0 = direct, 1 = yosida
  double lambda = 0.0;
  double nu = 0.0;
  double epsilon = 0.0;
  double hm1_nu = 1.0;  // nu actually used for hm1_nu_sq (1 when run nu = 0)
  bool zero_mode_flag = false;  // run had nu = 0: zero mode tracked via mean

  std::vector<DiagRecord> records;

  int weak_mode_count = 0;
  std::vector<std::vector<double>> weak_value;      // [record][mode] <X, e_j>
  std::vector<std::vector<double>> weak_drift_int;  // [record][mode]
  std::vector<std::vector<double>> weak_stoch_int;  // [record][mode]

  double datum_l2_sq = 0.0;
  double datum_hm1_nu_sq = 0.0;
  double datum_hm1_one_sq = 0.0;
  double datum_phi = 0.0;

  bool has_weak_series() const { return weak_mode_count > 0; }
};

} // namespace logdiff

#endif
