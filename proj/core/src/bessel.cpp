#include "nanofiber/bessel.hpp"

#include <boost/math/special_functions/bessel.hpp>

namespace nanofiber::bessel {

double J(int n, double x) { return boost::math::cyl_bessel_j(n, x); }

double K(int n, double x) { return boost::math::cyl_bessel_k(n, x); }

double I(int n, double x) { return boost::math::cyl_bessel_i(n, x); }

double J1_prime(double x) { return 0.5 * (J(0, x) - J(2, x)); }

double K1_prime(double x) { return -0.5 * (K(0, x) + K(2, x)); }

}  // namespace nanofiber::bessel
