#pragma once

namespace nanofiber {

// Angular-momentum coefficients evaluated from the Racah closed forms with
// exact rational arithmetic; the returned double is correct to ~1 ulp.
// Arguments are (half-)integers passed as doubles (e.g. 0.5, 3.5).
//
// Selection-rule violations (triangle inequality, M != m1+m2, |m| > j)
// return 0 rather than throwing; non-(half-)integer input throws
// std::invalid_argument.

/// <j1 m1; j2 m2 | J M>
double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double J, double M);

/// {j1 j2 j3; j4 j5 j6}
double wigner_6j(double j1, double j2, double j3,
                 double j4, double j5, double j6);

}  // namespace nanofiber
