#pragma once

namespace splitband {

// Integer-order Bessel function of the first kind, valid for any sign of
// order and argument.
double bessel_j(int order, double x);

// Smallest n such that |J_m(x)| < tolerance for every |m| > n.
// Used to truncate Jacobi-Anger series.
int jacobi_anger_cutoff(double x, double tolerance);

}  // namespace splitband
