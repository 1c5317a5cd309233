#pragma once

namespace nanofiber::bessel {

// Cylinder functions J_n and modified K_n for n = 0..3, double accuracy
// (a few ulp; the wrapped implementation is validated against recurrence
// and Wronskian identities in the test suite).
double J(int n, double x);
double K(int n, double x);
double I(int n, double x);

/// J1'(x) = (J0 - J2)/2
double J1_prime(double x);
/// K1'(x) = -(K0 + K2)/2
double K1_prime(double x);

}  // namespace nanofiber::bessel
