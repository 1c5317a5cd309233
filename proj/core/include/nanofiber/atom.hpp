#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "nanofiber/fiber.hpp"

namespace nanofiber {

/// Quantization axis of the clock states. Defaults to the transverse x-y
/// plane (theta = pi/2); a polar angle is accepted for full-sphere scans.
struct QuantizationAxis {
    double varphi = 0.0;              // azimuth from e_x, rad
    double theta = 1.5707963267948966;  // polar angle from e_z (fiber axis)

    Eigen::Vector3d e_z_tilde() const;
    /// Completes a right-handed frame (e_x~, e_y~, e_z~).
    Eigen::Vector3d e_x_tilde() const;
    Eigen::Vector3d e_y_tilde() const;
};

/// Atom trap site in the transverse plane.
struct TrapSite {
    double r_perp;  // nm, distance from fiber axis
    double phi;     // azimuth (the standard lattice sits at 0 and pi)
};

/// Cesium line data: hyperfine structure, linewidth, wavelength.
/// Loaded from a JSON data file; see the repository documentation for the
/// schema. All frequencies are stored in rad/s.
struct AtomicSystem {
    std::string line;                 // "D1" or "D2"
    double wavelength_nm = 0;
    double gamma = 0;                 // natural linewidth, rad/s
    double ground_splitting = 0;      // f=4 minus f=3, rad/s
    std::vector<double> excited_shift;  // per f', rad/s from line center
    std::vector<int> excited_f;         // ascending (D1: 3,4; D2: 2..5)
    double j_excited = 0.5;           // 1/2 (D1) or 3/2 (D2)
    double reduced_dipole = 0;        // e*a0 units; informational
    double osc_factor_extra = 0.0;    // oscillator strength (2f+1+extra)

    static constexpr double j_ground = 0.5;
    static constexpr double nuclear_spin = 3.5;
    static constexpr std::array<int, 2> ground_f = {3, 4};

    static AtomicSystem load(const std::string& json_path);
    void validate() const;

    double sigma0() const;                     // 3 lambda^2 / 2pi, nm^2
    double omega_center() const;               // 2 pi c / lambda
    /// Shift of ground level f from the center of gravity (rad/s).
    double ground_shift(int f) const;
    double excited_shift_of(int f_prime) const;
    double transition_omega(int f, int f_prime) const;
    /// f -> f' transition frequency relative to the line center.
    double transition_offset(int f, int f_prime) const;
    /// Detuning of a probe at omega0 from the f -> f' transition.
    double detuning(double omega0, int f, int f_prime) const;
    /// Same with the probe given as an offset from the line center. At
    /// optical frequencies one ulp of an absolute omega is ~0.25 rad/s;
    /// offset arithmetic keeps detunings accurate to micro-hertz, which the
    /// magic-frequency residuals rely on.
    double detuning_offset(double delta_center, int f, int f_prime) const;

    /// Complex characteristic polarizability alpha0(Delta) in nm^3, at the
    /// probe wavenumber k0: -(sigma0/8 pi k0) Gamma / (Delta + i Gamma/2).
    std::complex<double> alpha0(double detuning, double k0) const;
    /// Dispersive (far-detuned, real) kernel -(sigma0/8 pi k0) Gamma/Delta.
    double alpha0_dispersive(double detuning, double k0) const;
};

/// Rank-K irreducible components of the ground-manifold polarizability for
/// one (f, f') pair, in units of alpha0(Delta_ff').
struct IrreducibleCoefficients {
    double c0;
    double c1;
    double c2;
};

/// Relative oscillator strength |o_ff'|^2 = (2j'+1)(2f+1) {j j' 1; f' f I}^2,
/// scaled by the configurable factor override when one is set.
double oscillator_strength_sq(const AtomicSystem& sys, int f, int f_prime);

/// C^(K)_{ff'} from the standard 6-j closed forms (locked against a
/// brute-force dipole-sum oracle in the tests).
IrreducibleCoefficients irreducible_coefficients(const AtomicSystem& sys,
                                                 int f, int f_prime);

/// <f' m'| D_q |f m> in units of the reduced j->j' element, with the
/// quantization axis as z. Zero outside selection rules.
double dipole_matrix_element(const AtomicSystem& sys, int f, double m, int q,
                             int f_prime, double m_prime);

/// Lab-frame 3x3 tensor <f,0| alpha |f,0> for the clock state defined along
/// `axis` (scalar + rank-2 parts; the rank-1 part vanishes for m = 0).
Eigen::Matrix3cd clock_polarizability(const AtomicSystem& sys, int f,
                                      const QuantizationAxis& axis,
                                      double omega0);
/// Same with the real dispersive kernel (used throughout the magic-detuning
/// and coupling calculations).
Eigen::Matrix3d clock_polarizability_dispersive(const AtomicSystem& sys,
                                                int f,
                                                const QuantizationAxis& axis,
                                                double omega0);

/// Detuning-weighted structure coefficients a_f, b_f of the clock coupling:
/// a_f = sum_f' (C0 + f(f+1) C2 / 6) Gamma/(4 Delta_ff'),
/// b_f = (f(f+1)/2) sum_f' C2 Gamma/(4 Delta_ff').
struct ChiCoefficients {
    double a;
    double b;
};
ChiCoefficients chi_coefficients(const AtomicSystem& sys, int f,
                                 double omega0, double resonance_guard = 10.0);
ChiCoefficients chi_coefficients_offset(const AtomicSystem& sys, int f,
                                        double delta_center,
                                        double resonance_guard = 10.0);

/// Clock-state/photon coupling  chi_{p,f} = n_g sigma0 (a_f |u_p|^2 -
/// b_f |e_z~ . u_p|^2)  evaluated at the trap site (rad per photon).
double coupling_chi(const AtomicSystem& sys, const GuidedModeSolution& sol,
                    int f, ModeBasis p, const QuantizationAxis& axis,
                    const TrapSite& site, double omega0,
                    double resonance_guard = 10.0);
double coupling_chi_offset(const AtomicSystem& sys,
                           const GuidedModeSolution& sol, int f, ModeBasis p,
                           const QuantizationAxis& axis, const TrapSite& site,
                           double delta_center,
                           double resonance_guard = 10.0);

}  // namespace nanofiber
