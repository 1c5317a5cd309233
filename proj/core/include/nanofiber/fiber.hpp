#pragma once

#include <Eigen/Core>
#include <complex>

namespace nanofiber {

/// Two-layer step-index fiber: core radius and the two refractive indices.
struct FiberSpec {
    double radius_nm = 225.0;
    double n1 = 1.4469;  // core
    double n2 = 1.0;     // cladding (vacuum)

    /// Throws std::invalid_argument unless radius > 0 and n1 > n2 >= 1.
    void validate() const;
};

enum class ModeBasis {
    quasilinear_H,
    quasilinear_V,
    quasicircular_plus,
    quasicircular_minus,
};

/// Real radial profile functions (u_r, u_phi, u_z) of the fundamental mode.
struct RadialProfile {
    double u_r;
    double u_phi;
    double u_z;
};

/// Complex mode field at one transverse point, in cylindrical components
/// (e_r, e_phi, e_z). The z component carries the i*b quadrature phase.
struct ModeField {
    ModeBasis basis;
    int direction;  // b = +1 forward, -1 backward
    double r_perp;
    double phi;
    Eigen::Vector3cd cylindrical;

    /// Same vector in fixed Cartesian components (x, y, z).
    Eigen::Vector3cd cartesian() const;
};

/// Solved HE11 dispersion state at one frequency, with normalized fields.
struct GuidedModeSolution {
    FiberSpec fiber;
    double omega0;    // rad/s
    double k0;        // 1/nm
    double beta0;     // 1/nm, in (n2 k0, n1 k0)
    double h_in;      // interior transverse wavenumber, 1/nm
    double q_out;     // exterior decay constant, 1/nm
    double s_param;   // hybrid-mode mixing parameter
    double u0;        // normalization amplitude, 1/nm
    double n_g;       // group index c/v_g
    double v_number;
    bool multimode_warning;  // V above the next-mode cutoff

    /// Radial profiles at r_perp > 0 (interior Bessel J, exterior K forms).
    RadialProfile profile(double r_perp) const;

    /// Full complex mode field, assembled from profile() per basis.
    ModeField field(ModeBasis basis, int direction, double r_perp,
                    double phi) const;

    /// A = 1 / (n_g |u|^2) for a given local field vector (nm^2).
    double effective_area(const Eigen::Vector3cd& u_local) const;
};

/// Dispersion-relation residual at (k0, beta), normalized by the magnitude
/// sum of its terms. Zero at a guided-mode eigenvalue.
double dispersion_residual(const FiberSpec& fiber, double k0, double beta);

/// Signed value of the dispersion relation (the quantity whose root defines
/// beta0); useful for independent root bracketing.
double dispersion_value(const FiberSpec& fiber, double k0, double beta);

/// Weighted norm integral  2*pi * Int n^2(r) |u|^2 r dr  for a trial
/// amplitude u0 (adaptive quadrature, interior + exterior pieces).
double mode_norm_integral(const GuidedModeSolution& sol, double u0);

/// Solve the HE11 eigenvalue problem at the given vacuum wavelength and
/// normalize the transverse mode to Int n^2 |u|^2 d2r = 1.
/// Throws NoGuidedMode / QuadratureFailure on failure.
GuidedModeSolution solve_he11(const FiberSpec& fiber, double wavelength_nm);

/// Probe input polarizations used by the measurement configurations.
enum class InputPolarization { H, V, plus45 };

/// Local (complex, unnormalized) input-field vector at (r_perp, phi) for a
/// forward-propagating probe of the given polarization, Cartesian components.
Eigen::Vector3cd input_field(const GuidedModeSolution& sol,
                             InputPolarization pol, double r_perp, double phi);

}  // namespace nanofiber
