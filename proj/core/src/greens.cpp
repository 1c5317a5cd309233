#include "nanofiber/greens.hpp"

#include <cmath>
#include <complex>

#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"

namespace nanofiber {
namespace {

using cd = std::complex<double>;
constexpr cd iu(0, 1);

struct Transverse {
    double r;
    double phi;
};

Transverse transverse_of(const Eigen::Vector3d& pos) {
    return {std::hypot(pos.x(), pos.y()), std::atan2(pos.y(), pos.x())};
}

std::array<ModeBasis, 2> basis_pair(PolarizationBasis basis) {
    if (basis == PolarizationBasis::quasilinear)
        return {ModeBasis::quasilinear_H, ModeBasis::quasilinear_V};
    return {ModeBasis::quasicircular_plus, ModeBasis::quasicircular_minus};
}

/// Spherical unit vectors of the tilde frame, e_0 and e_{+-1}.
std::array<Eigen::Vector3cd, 3> spherical_basis(const QuantizationAxis& axis) {
    const Eigen::Vector3cd ex = axis.e_x_tilde().cast<cd>();
    const Eigen::Vector3cd ey = axis.e_y_tilde().cast<cd>();
    const Eigen::Vector3cd ez = axis.e_z_tilde().cast<cd>();
    const double rt2 = std::sqrt(2.0);
    // index 0,1,2 -> q = -1, 0, +1
    return {(ex - iu * ey) / rt2, ez, -(ex + iu * ey) / rt2};
}

}  // namespace

Eigen::Matrix3cd guided_greens(const GuidedModeSolution& sol,
                               const Eigen::Vector3d& r,
                               const Eigen::Vector3d& r_prime) {
    const double dz = r.z() - r_prime.z();
    if (dz == 0.0)
        throw DegenerateGeometry("guided Green's function needs z != z'; use "
                                 "im_greens_local at the source point");
    const int b = dz > 0 ? +1 : -1;
    const auto rt = transverse_of(r);
    const auto rpt = transverse_of(r_prime);
    Eigen::Matrix3cd sum = Eigen::Matrix3cd::Zero();
    for (ModeBasis p :
         {ModeBasis::quasilinear_H, ModeBasis::quasilinear_V}) {
        const Eigen::Vector3cd u = sol.field(p, b, rt.r, rt.phi).cartesian();
        const Eigen::Vector3cd up =
            sol.field(p, b, rpt.r, rpt.phi).cartesian();
        sum += u * up.adjoint();
    }
    const cd phase = std::exp(iu * (b * sol.beta0 * dz));
    return two_pi * iu * (sol.k0 * sol.n_g) * phase * sum;
}

Eigen::Matrix3d im_greens_local(const GuidedModeSolution& sol,
                                const Eigen::Vector3d& r_prime) {
    const auto rpt = transverse_of(r_prime);
    Eigen::Matrix3cd sum = Eigen::Matrix3cd::Zero();
    for (int b : {+1, -1}) {
        for (ModeBasis p :
             {ModeBasis::quasilinear_H, ModeBasis::quasilinear_V}) {
            const Eigen::Vector3cd u =
                sol.field(p, b, rpt.r, rpt.phi).cartesian();
            sum += u * u.adjoint();
        }
    }
    return pi * sol.k0 * sol.n_g * sum.real();
}

double gamma_1d_greens(const GuidedModeSolution& sol,
                       std::span<const Eigen::Vector3cd> dipoles_ge,
                       const Eigen::Vector3d& r_prime) {
    const Eigen::Matrix3d img = im_greens_local(sol, r_prime);
    double total = 0;
    for (const auto& d : dipoles_ge) {
        const cd val = d.transpose() * img.cast<cd>() * d.conjugate();
        total += val.real();
    }
    // d in units of the reduced element: 2/(hbar Gamma) absorbs to
    // 3/(2 k0^3) via Gamma = 4 k0^3 |<j'||d||j>|^2 / (3 hbar).
    return 1.5 / std::pow(sol.k0, 3) * total;
}

double gamma_1d_modesum(const GuidedModeSolution& sol,
                        std::span<const Eigen::Vector3cd> dipoles_ge,
                        const Eigen::Vector3d& r_prime) {
    const auto rpt = transverse_of(r_prime);
    double total = 0;
    for (int b : {+1, -1}) {
        for (ModeBasis p :
             {ModeBasis::quasilinear_H, ModeBasis::quasilinear_V}) {
            const Eigen::Vector3cd u =
                sol.field(p, b, rpt.r, rpt.phi).cartesian();
            for (const auto& d : dipoles_ge)
                total += std::norm(d.dot(u));  // <e|d|g>.u = conj(d_ge).u
        }
    }
    return 1.5 * pi * sol.n_g / (sol.k0 * sol.k0) * total;
}

void ScatteringMatrices::validate() const {
    for (int p = 0; p < 2; ++p) {
        if (std::abs(t(p, p)) > 1 + 1e-9)
            throw Error("scattering exceeds the weak-coupling bound |t| <= 1");
        if (attenuation[p] < 0 || attenuation[p] >= 1)
            throw Error("attenuation R_p outside [0, 1)");
    }
}

ScatteringMatrices scattering_matrices(const GuidedModeSolution& sol,
                                       const Eigen::Matrix3cd& alpha,
                                       const Eigen::Vector3d& r_prime,
                                       PolarizationBasis basis) {
    const auto rpt = transverse_of(r_prime);
    const auto pair = basis_pair(basis);
    std::array<Eigen::Vector3cd, 2> fwd, bwd;
    for (int p = 0; p < 2; ++p) {
        fwd[p] = sol.field(pair[p], +1, rpt.r, rpt.phi).cartesian();
        bwd[p] = sol.field(pair[p], -1, rpt.r, rpt.phi).cartesian();
    }
    const cd pref = two_pi * iu * sol.k0 * sol.n_g;
    const cd refl_phase = std::exp(2.0 * iu * sol.beta0 * r_prime.z());
    ScatteringMatrices out;
    out.basis = basis;
    for (int p = 0; p < 2; ++p) {
        for (int pp = 0; pp < 2; ++pp) {
            const cd fwd_el = fwd[p].adjoint() * alpha * fwd[pp];
            const cd bwd_el = bwd[p].adjoint() * alpha * fwd[pp];
            out.t(p, pp) = (p == pp ? 1.0 : 0.0) + pref * fwd_el;
            out.r(p, pp) = pref * bwd_el * refl_phase;
        }
        const cd diag = fwd[p].adjoint() * alpha * fwd[p];
        out.delta_phi[p] = two_pi * sol.k0 * sol.n_g * diag.real();
        out.attenuation[p] = 2.0 * two_pi * sol.k0 * sol.n_g * diag.imag();
    }
    return out;
}

double phase_shift_multilevel(const GuidedModeSolution& sol,
                              const AtomicSystem& sys, int f, double m,
                              const QuantizationAxis& axis, ModeBasis p,
                              const TrapSite& site, double omega0,
                              double resonance_guard) {
    const Eigen::Vector3cd u =
        sol.field(p, +1, site.r_perp, site.phi).cartesian();
    const auto eq = spherical_basis(axis);
    double sum = 0;
    for (int fp : sys.excited_f) {
        if (std::abs(fp - f) > 1) continue;
        const double det = sys.detuning(omega0, f, fp);
        if (std::abs(det) < resonance_guard * sys.gamma)
            throw ResonanceError("phase shift requested inside the "
                                 "dispersive guard band");
        double strength = 0;
        for (int q = -1; q <= 1; ++q) {
            const double me = dipole_matrix_element(sys, f, m, q, fp, m + q);
            if (me == 0) continue;
            const cd overlap = eq[q + 1].dot(u);  // e_q^* . u
            strength += me * me * std::norm(overlap);
        }
        sum += strength / det;
    }
    return -1.5 * pi * sys.gamma * sol.n_g / (sol.k0 * sol.k0) * sum;
}

}  // namespace nanofiber
