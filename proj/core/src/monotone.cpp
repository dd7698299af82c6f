#include "logdiff/monotone.hpp"

#include <cmath>
#include <string>

namespace logdiff {

namespace {

// Residual of the log-coordinate equation at y: e^y + lambda y - r.
// Equals the residual of x + lambda ln x = r at x = e^y.
inline double residual(double y, double lambda, double r) {
  return std::exp(y) + lambda * y - r;
}

// Bracketed Newton with bisection safeguard on g(y) = e^y + lambda y - r.
// g is smooth, strictly increasing and convex, so a Newton step from a
// point with g <= 0 stays below the root and converges monotonically;
// steps that leave the bracket are replaced by bisection.
double solve_cold(double r, double lambda, double tol, int max_iter) {
  double lo, hi;
  if (r > 0.0) {
    lo = std::log((r + lambda) / (1.0 + lambda));
    hi = r;
  } else {
    lo = (r - 1.0) / lambda;
    hi = 0.0;
  }
  double y = (r > 0.0) ? lo : hi;
  double g = residual(y, lambda, r);
  if (std::fabs(g) <= tol) return y;
  for (int it = 0; it < max_iter; ++it) {
    if (g > 0.0) hi = y; else lo = y;
    const double dg = std::exp(y) + lambda;
    double ynext = y - g / dg;
    if (!(ynext > lo) || !(ynext < hi)) ynext = 0.5 * (lo + hi);
    y = ynext;
    g = residual(y, lambda, r);
    if (std::fabs(g) <= tol) return y;
    // The bracket can collapse to adjacent doubles before the residual
    // tolerance is met when |r| is so large that the residual cannot be
    // evaluated to that absolute accuracy; the midpoint is then the root
    // to within one ulp, which is the best double precision can state.
    if (hi - lo <= 4.0 * std::fabs(y) * 2.2e-16 + 1e-300) return y;
  }
  throw NonConvergenceError("resolvent: residual " + std::to_string(std::fabs(g)) +
                            " above tolerance after max_iter iterations (r = " +
                            std::to_string(r) + ", lambda = " + std::to_string(lambda) + ")");
}

inline void check_params(const YosidaParams& p) {
  (void)p;  // construction already validated; kept for clarity at call sites
}

inline void check_finite(double r, const char* who) {
  if (!std::isfinite(r)) throw DomainError(std::string(who) + ": argument must be finite");
}

} // namespace

YosidaParams::YosidaParams(double lambda, double newton_tol, int max_iter)
    : lambda_(lambda), newton_tol_(newton_tol), max_iter_(max_iter) {
  if (!(lambda > 0.0) || !(lambda <= 1.0) || !std::isfinite(lambda))
    throw ParamError("YosidaParams: lambda must lie in (0, 1], got " + std::to_string(lambda));
  if (!(newton_tol > 0.0) || !std::isfinite(newton_tol))
    throw ParamError("YosidaParams: newton_tol must be positive");
  if (max_iter < 1) throw ParamError("YosidaParams: max_iter must be >= 1");
  const double y0 = solve_cold(0.0, lambda_, newton_tol_, max_iter_);
  yosida_at_zero_ = (0.0 - std::exp(y0)) / lambda_;
}

double resolvent_log(double r, const YosidaParams& p) {
  check_params(p);
  check_finite(r, "resolvent");
  return solve_cold(r, p.lambda(), p.newton_tol(), p.max_iter());
}

LogSolve resolvent_log_solve(double r, const YosidaParams& p, double y_guess) {
  check_finite(r, "resolvent");
  const double lambda = p.lambda();
  const double tol = p.newton_tol();
  if (std::isfinite(y_guess) && y_guess <= 700.0) {
    double y = y_guess;
    // Pure Newton: convexity sends the first step at or above the root and
    // the rest decrease monotonically, so no bracket is needed as long as
    // exp(y) stays representable (guesses above 700 are rejected here).
    for (int it = 0; it < 12; ++it) {
      const double e = std::exp(y);
      const double g = e + lambda * y - r;
      if (std::fabs(g) <= tol) return {y, e};
      y -= g / (e + lambda);
      if (!std::isfinite(y)) break;
    }
  }
  const double y = solve_cold(r, lambda, tol, p.max_iter());
  return {y, std::exp(y)};
}

double resolvent_log_guess(double r, const YosidaParams& p, double y_guess) {
  return resolvent_log_solve(r, p, y_guess).y;
}

double resolvent(double r, const YosidaParams& p) {
  return std::exp(resolvent_log(r, p));
}

double yosida(double r, const YosidaParams& p) {
  const double y = resolvent_log(r, p);
  return (r - std::exp(y)) / p.lambda();
}

double rectified(double r, const YosidaParams& p) {
  return yosida(r, p) - p.yosida_at_zero() + p.lambda() * r;
}

double rectified_derivative(double r, const YosidaParams& p) {
  const double x = resolvent(r, p);
  return p.lambda() + 1.0 / (p.lambda() + x);
}

double potential(double r) {
  if (r < 0.0) throw DomainError("potential: argument must be nonnegative");
  if (r == 0.0) return 0.0;
  return r * std::log(r) - r;
}

double moreau_envelope(double r, const YosidaParams& p) {
  if (r < 0.0) throw DomainError("moreau_envelope: argument must be nonnegative");
  const double x = resolvent(r, p);
  const double d = r - x;
  return potential(x) + d * d / (2.0 * p.lambda());
}

double propaux_gap(double r, const YosidaParams& p) {
  if (p.lambda() > 0.5)
    throw ParamError("propaux_gap: requires lambda <= 1/2, got " + std::to_string(p.lambda()));
  if (!(r > 0.0)) throw DomainError("propaux_gap: argument must be positive");
  const double x = resolvent(r, p);
  return yosida(r, p) + r / (p.lambda() + x) - 2.0 * r;
}

} // namespace logdiff
