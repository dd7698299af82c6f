#ifndef LOGDIFF_GRID_HPP
#define LOGDIFF_GRID_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "logdiff/errors.hpp"

namespace logdiff {

// Uniform periodic grid on the box [-L, L)^d, N points per axis.
// Point index (i_0, ..., i_{d-1}) is stored row-major (last axis fastest)
// and maps to the coordinate xi_a = -L + i_a * (2L / N).
struct Grid {
  int dim = 0;
  int n = 0;          // points per axis
  double half_length = 0.0;  // L

  std::size_t point_count() const {
    std::size_t p = 1;
    for (int a = 0; a < dim; ++a) p *= static_cast<std::size_t>(n);
    return p;
  }
  double spacing() const { return 2.0 * half_length / n; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing();
    return v;
  }
  double coordinate(int index) const { return -half_length + index * spacing(); }

  // Signed integer mode number for a storage index along one axis,
  // in [-N/2 + 1, N/2] with the Nyquist index N/2 taken positive.
  int mode_number(int index) const { return index <= n / 2 ? index : index - n; }
  // Wavevector component pi/L * mode_number.
  double wavenumber(int index) const {
    return 3.14159265358979323846 / half_length * mode_number(index);
  }

  bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, int n, double half_length);

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid(g), values(g.point_count(), fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct SpectralField {
  Grid grid;
  std::vector<std::complex<double>> coeffs;

  SpectralField() = default;
  explicit SpectralField(const Grid& g)
      : grid(g), coeffs(g.point_count(), std::complex<double>(0.0, 0.0)) {}

  std::size_t size() const { return coeffs.size(); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b))
    throw GridMismatchError(std::string(where) + ": fields live on different grids");
}

// Mean over the box: (1 / (2L)^d) * integral of f.
double field_mean(const ScalarField& f);
// Integral of f over the box (cell volume quadrature, exact for the
// trigonometric interpolant).
double field_integral(const ScalarField& f);
// Plain L2(box) inner product of two fields.
double inner_l2(const ScalarField& a, const ScalarField& b);
// L2 norm via quadrature.
double norm_l2(const ScalarField& f);
double min_value(const ScalarField& f);
double max_abs(const ScalarField& f);
// Fraction of grid points with a strictly negative value.
double negative_fraction(const ScalarField& f);
bool all_finite(const ScalarField& f);

// Evaluate f at every grid point of x; on failure rethrows with the flat
// index and coordinate location attached.
template <class F>
ScalarField apply_pointwise(F&& f, const ScalarField& x) {
  ScalarField out(x.grid);
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i) {
    try {
      out.values[i] = f(x.values[i]);
    } catch (const Error& e) {
      throw DomainError("apply_pointwise: at flat index " + std::to_string(i) +
                        ": " + e.what());
    }
  }
  return out;
}

} // namespace logdiff

#endif
