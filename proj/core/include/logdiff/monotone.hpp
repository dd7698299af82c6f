#ifndef LOGDIFF_MONOTONE_HPP
#define LOGDIFF_MONOTONE_HPP

#include "logdiff/errors.hpp"

namespace logdiff {

// Scalar calculus for the logarithm as a maximal monotone graph on r > 0.
// Everything is built from the resolvent x = J(r), the unique positive
// root of x + lambda * ln x = r. All functions are pure; a YosidaParams
// value is immutable after construction and safe to share across threads.
class YosidaParams {
 public:
  explicit YosidaParams(double lambda, double newton_tol = 1e-12, int max_iter = 100);

  double lambda() const { return lambda_; }
  double newton_tol() const { return newton_tol_; }
  int max_iter() const { return max_iter_; }
  // Cached yosida(0), needed by every rectified evaluation.
  double yosida_at_zero() const { return yosida_at_zero_; }

 private:
  double lambda_;
  double newton_tol_;
  int max_iter_;
  double yosida_at_zero_;
};

// J(r): positive root of x + lambda ln x = r, with residual at most
// newton_tol. Lies in [(r+lambda)/(1+lambda), e^r] for r > 0.
double resolvent(double r, const YosidaParams& p);

// ln J(r), solved directly in log coordinates. The root find runs on
// g(y) = e^y + lambda y - r, which stays well-scaled even when the
// resolvent itself underflows (r strongly negative).
double resolvent_log(double r, const YosidaParams& p);

// Same, warm-started from a previous root; used by field loops where the
// argument changes little between calls. Falls back to the bracketed
// solve if the guess does not pan out.
double resolvent_log_guess(double r, const YosidaParams& p, double y_guess);

// Hot-path variant returning both the log root and the resolvent value,
// avoiding a redundant exp in fused field loops.
struct LogSolve {
  double y;     // ln J(r)
  double expy;  // J(r)
};
LogSolve resolvent_log_solve(double r, const YosidaParams& p, double y_guess);

// Yosida approximation (r - J(r)) / lambda; equals ln J(r) up to solver
// tolerance.
double yosida(double r, const YosidaParams& p);

// Rectified nonlinearity yosida(r) - yosida(0) + lambda r. Vanishes at 0,
// strongly monotone with modulus lambda, defined for every real r.
double rectified(double r, const YosidaParams& p);

// d/dr rectified = lambda + 1/(lambda + J(r)).
double rectified_derivative(double r, const YosidaParams& p);

// Potential j(r) = r ln r - r with j(0) = 0; DomainError for r < 0.
double potential(double r);

// Moreau envelope of j: j(J(r)) + (r - J(r))^2 / (2 lambda), for r >= 0.
double moreau_envelope(double r, const YosidaParams& p);

// yosida(r) + r/(lambda + J(r)) - 2r; non-positive for r > 0 when
// lambda <= 1/2. ParamError for larger lambda, DomainError for r <= 0.
double propaux_gap(double r, const YosidaParams& p);

} // namespace logdiff

#endif
