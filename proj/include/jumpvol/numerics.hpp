#pragma once

#include <functional>
#include <span>

namespace jumpvol::numerics
{

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Standard gamma(a, 1) density at x, accurate for large a.
double gamma_density(double a, double x);

struct Integral
{
    double value = 0.0;
    double error = 0.0;  //!< estimated absolute error
};

/*!
 * Globally adaptive Gauss-Kronrod (15/31) integration of f over the finite
 * [lo, hi]. The panel with the largest error estimate is bisected until the
 * summed error is below max(abs_tol, rel_tol * |integral|).
 */
Integral integrate(std::function<double(double)> const& f,
                   double lo,
                   double hi,
                   double rel_tol = 1e-12,
                   double abs_tol = 0.0);

// Same, starting from the panels between consecutive sorted breakpoints.
Integral integrate_pieces(std::function<double(double)> const& f,
                          std::span<double const> breakpoints,
                          double rel_tol = 1e-12,
                          double abs_tol = 0.0);

}  // namespace jumpvol::numerics
