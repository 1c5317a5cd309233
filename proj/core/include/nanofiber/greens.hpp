#pragma once

#include <Eigen/Core>
#include <complex>
#include <span>

#include "nanofiber/atom.hpp"
#include "nanofiber/fiber.hpp"

namespace nanofiber {

/// Guided-mode dyadic Green's function G_g(r, r'; omega0), dense complex 3x3
/// in Cartesian components (1/nm^3). Positions are Cartesian (nm). Only the
/// causal propagation direction contributes; throws DegenerateGeometry when
/// z == z'.
Eigen::Matrix3cd guided_greens(const GuidedModeSolution& sol,
                               const Eigen::Vector3d& r,
                               const Eigen::Vector3d& r_prime);

/// Im G_g(r', r') — the local mode-sum matrix governing emission into the
/// guided modes. Real, symmetric, positive semidefinite.
Eigen::Matrix3d im_greens_local(const GuidedModeSolution& sol,
                                const Eigen::Vector3d& r_prime);

/// Guided-mode decay rate in units of the free-space linewidth, via the
/// Green's-function route (2/hbar) sum_g d_ge . Im G . d_eg. Dipole vectors
/// are <g|d|e> in units of the reduced j->j' element.
double gamma_1d_greens(const GuidedModeSolution& sol,
                       std::span<const Eigen::Vector3cd> dipoles_ge,
                       const Eigen::Vector3d& r_prime);

/// Same rate from the direct mode sum 2pi sum_{b,p,g} |g_{mu,e,g}|^2.
double gamma_1d_modesum(const GuidedModeSolution& sol,
                        std::span<const Eigen::Vector3cd> dipoles_ge,
                        const Eigen::Vector3d& r_prime);

enum class PolarizationBasis { quasilinear, quasicircular };

/// Transmission/reflection response of a point polarizability at r', and the
/// per-polarization phase shift / attenuation of the weak-scattering limit.
struct ScatteringMatrices {
    PolarizationBasis basis;
    Eigen::Matrix2cd t;
    Eigen::Matrix2cd r;
    std::array<double, 2> delta_phi;    // rad
    std::array<double, 2> attenuation;  // R_p, dimensionless

    /// Weak-scattering sanity: |t_pp| <= 1 + 1e-9 and R_p in [0, 1).
    void validate() const;
};

/// alpha is the complex polarizability tensor in Cartesian components
/// (nm^3). r_prime is the scatterer position (Cartesian nm).
ScatteringMatrices scattering_matrices(const GuidedModeSolution& sol,
                                       const Eigen::Matrix3cd& alpha,
                                       const Eigen::Vector3d& r_prime,
                                       PolarizationBasis basis);

/// Dispersive phase shift of polarization p for an atom in ground state
/// |f, m> (quantized along `axis`):
///   delta_phi = -(omega0/v_g) sum_e 2pi |<e|d|g> . u_p|^2 / (hbar Delta_eg).
/// Throws ResonanceError when any contributing |Delta| < guard * Gamma.
double phase_shift_multilevel(const GuidedModeSolution& sol,
                              const AtomicSystem& sys, int f, double m,
                              const QuantizationAxis& axis, ModeBasis p,
                              const TrapSite& site, double omega0,
                              double resonance_guard = 10.0);

}  // namespace nanofiber
