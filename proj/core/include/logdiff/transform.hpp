#ifndef LOGDIFF_TRANSFORM_HPP
#define LOGDIFF_TRANSFORM_HPP

#include <vector>

#include "logdiff/grid.hpp"

namespace logdiff {

// Spectral engine for one grid. Owns FFTW plans and scratch storage, so it
// is not thread-safe; give each worker thread its own instance. Plan
// creation is internally serialized (FFTW planning is a global operation)
// and uses estimate-mode planning so repeated runs pick identical plans.
//
// Conventions. The forward transform is normalized by 1/N^d, so coeffs[k]
// is the coefficient of exp(i k.xi) with wavevector components
// (pi/L) * mode_number. Plancherel then reads
//   ||f||_{L2}^2 = (2L)^d * sum_k |F_k|^2,
// which matches the cell-volume quadrature of f^2 exactly.
class SpectralTransform {
 public:
  explicit SpectralTransform(const Grid& g);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const Grid& grid() const { return grid_; }

  SpectralField forward(const ScalarField& f);
  ScalarField inverse(const SpectralField& f);
  void forward(const ScalarField& f, SpectralField& out);
  void inverse(const SpectralField& f, ScalarField& out);

  // |k|^2 at a flat spectral index.
  double ksq(std::size_t flat) const { return ksq_[flat]; }
  const std::vector<double>& ksq_table() const { return ksq_; }

  ScalarField laplacian(const ScalarField& f);
  // (nu + |k|^2)^{-s} multiplier; nu > 0 required when s > 0 would hit a
  // zero denominator at k = 0, i.e. nu == 0 demands a mean-free field.
  ScalarField shifted_inverse(const ScalarField& f, double nu, double s);
  // Spectral gradient, one field per axis. The Nyquist mode has no
  // well-defined odd derivative on a real grid and is dropped.
  std::vector<ScalarField> gradient(const ScalarField& f);

  double norm_l2(const SpectralField& f) const;
  // Full H^1 norm: sum of (1 + |k|^2) weights.
  double norm_h1(const SpectralField& f) const;
  // ||(nu - Laplacian)^{-1/2} f||_{L2}; nu must be positive.
  double norm_hminus1(const SpectralField& f, double nu) const;
  // Homogeneous norm with weight |k|^{2s}, zero mode excluded. For s < 0
  // the field must be numerically mean-free: |mean| <= 1e-10 * ||f||_{L2}.
  double norm_homogeneous(const SpectralField& f, double s) const;
  // Dual-space norm ||(nu - Laplacian)^{-1} f||_{L2}.
  double norm_dual(const SpectralField& f, double nu) const;
  // Inner product of the nu-shifted negative-order space,
  // <(nu-Lap)^{-1/2} u, (nu-Lap)^{-1/2} v>_{L2}.
  double inner_hminus1(const SpectralField& u, const SpectralField& v, double nu) const;

  // Conveniences that transform first.
  double norm_h1(const ScalarField& f);
  double norm_hminus1(const ScalarField& f, double nu);
  double norm_homogeneous(const ScalarField& f, double s);
  double inner_hminus1(const ScalarField& u, const ScalarField& v, double nu);

 private:
  Grid grid_;
  std::vector<double> ksq_;        // |k|^2 per flat index
  std::vector<double> axis_wave_;  // k component per axis index
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
  std::vector<std::complex<double>> scratch_a_;
  std::vector<std::complex<double>> scratch_b_;

  void check_grid(const Grid& g, const char* where) const;
};

} // namespace logdiff

#endif
