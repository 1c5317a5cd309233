#pragma once

namespace nanofiber {

// Lengths are nm, angular frequencies rad/s, rates 1/s, areas nm^2.
inline constexpr double c_nm_per_s = 2.99792458e17;
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace nanofiber
