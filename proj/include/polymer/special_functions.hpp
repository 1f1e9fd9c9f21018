#pragma once

namespace polymer {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Digamma for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);

/// Trigamma for x > 0, same scheme as digamma.
double trigamma(double x);

/// Minimizer z in (0, mu) of  -x*digamma(z) - y*digamma(mu - z), found by
/// bisection on the strictly decreasing x*trigamma(z) - y*trigamma(mu - z).
double shape_minimizer(double mu, double x, double y);

/// Law-of-large-numbers limit of log Z_{0,(x,y)} per unit, for inverse-gamma
/// weights with shape mu:
///   inf_{0<z<mu} [ -x*digamma(z) - y*digamma(mu - z) ].
/// On the diagonal this is -2*digamma(mu/2) per unit of x.
double shape_value(double mu, double x, double y);

/// shape_value(mu, n, n)
double shape_diagonal(double mu, double n);

}  // namespace polymer
