#include "splitband/special.hpp"

#include <cmath>
#include <cstdlib>

namespace splitband {

double bessel_j(int order, double x) {
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
    const int n = std::abs(order);
    double sign = 1.0;
    if (order < 0 && (n % 2) == 1) sign = -sign;
    if (x < 0.0 && (n % 2) == 1) sign = -sign;
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    return sign * std::cyl_bessel_j(static_cast<double>(n), std::abs(x));
}

int jacobi_anger_cutoff(double x, double tolerance) {
    // |J_n(x)| decays monotonically once n > |x|.
    const double ax = std::abs(x);
    int n = static_cast<int>(std::ceil(ax));
    while (std::abs(bessel_j(n + 1, ax)) >= tolerance || n < ax) ++n;
    return n;
}

}  // namespace splitband
