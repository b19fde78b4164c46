#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "foflux/errors.hpp"

namespace foflux {

struct BrentResult {
  double root = 0.0;
  double f_root = 0.0;
  int iterations = 0;
};

// Classic Brent root finder (inverse quadratic interpolation with bisection
// fallback). The bracket [a, b] must satisfy f(a)*f(b) <= 0; iteration stops
// when |f| <= f_tol or the bracket collapses to machine width.
template <typename F>
BrentResult brent_solve(F&& f, double a, double b, double fa, double fb, double f_tol,
                        int max_iter) {
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  if (fa * fb > 0.0)
    throw SolverError("brent_solve: root not bracketed, f(a)=" + std::to_string(fa) +
                      " f(b)=" + std::to_string(fb));

  double c = a, fc = fa;
  double d = b - a, e = d;

  for (int iter = 1; iter <= max_iter; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
    const double xm = 0.5 * (c - b);
    if (std::abs(fb) <= f_tol || std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, iter};

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // interpolation step: secant, or inverse quadratic when three points differ
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
  }
  throw SolverError("brent_solve: no convergence within " + std::to_string(max_iter) +
                    " iterations, last |f|=" + std::to_string(std::abs(fb)));
}

template <typename F>
BrentResult brent_solve(F&& f, double a, double b, double f_tol, int max_iter) {
  const double fa = f(a);
  const double fb = f(b);
  return brent_solve(f, a, b, fa, fb, f_tol, max_iter);
}

}  // namespace foflux
