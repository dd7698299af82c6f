#include "logdiff/grid.hpp"

#include <cmath>
#include <string>

namespace logdiff {

Grid make_grid(int dim, int n, double half_length) {
  if (dim < 1 || dim > 3)
    throw ParamError("make_grid: dim must be 1, 2 or 3, got " + std::to_string(dim));
  if (n < 4 || n % 2 != 0)
    throw ParamError("make_grid: points per axis must be even and >= 4, got " +
                     std::to_string(n));
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ParamError("make_grid: box half length must be positive and finite");
  return Grid{dim, n, half_length};
}

double field_integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double field_mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / static_cast<double>(f.size());
}

double inner_l2(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "inner_l2");
  double s = 0.0;
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) s += a.values[i] * b.values[i];
  return s * a.grid.cell_volume();
}

double norm_l2(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_volume());
}

double min_value(const ScalarField& f) {
  double m = f.values.empty() ? 0.0 : f.values[0];
  for (double v : f.values)
    if (v < m) m = v;
  return m;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) {
    double a = std::fabs(v);
    if (a > m) m = a;
  }
  return m;
}

double negative_fraction(const ScalarField& f) {
  if (f.values.empty()) return 0.0;
  std::size_t c = 0;
  for (double v : f.values)
    if (v < 0.0) ++c;
  return static_cast<double>(c) / static_cast<double>(f.size());
}

bool all_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

} // namespace logdiff
