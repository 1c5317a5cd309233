#include "nanofiber/atom.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "nanofiber/angular.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"

namespace nanofiber {

Eigen::Vector3d QuantizationAxis::e_z_tilde() const {
    return {std::sin(theta) * std::cos(varphi),
            std::sin(theta) * std::sin(varphi), std::cos(theta)};
}

Eigen::Vector3d QuantizationAxis::e_x_tilde() const {
    // Any unit vector orthogonal to e_z~; physics is gauge-invariant under
    // rotation about the quantization axis (clock states are azimuthally
    // symmetric). For the default in-plane axis this is (-sin, cos, 0).
    const Eigen::Vector3d ez = e_z_tilde();
    Eigen::Vector3d seed = std::abs(ez.z()) < 0.9
                               ? Eigen::Vector3d(0, 0, 1)
                               : Eigen::Vector3d(1, 0, 0);
    Eigen::Vector3d ex = seed.cross(ez);
    return ex.normalized();
}

Eigen::Vector3d QuantizationAxis::e_y_tilde() const {
    return e_z_tilde().cross(e_x_tilde());
}

AtomicSystem AtomicSystem::load(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open atomic data file: " + json_path);
    nlohmann::json j;
    in >> j;

    AtomicSystem sys;
    sys.line = j.at("line").get<std::string>();
    sys.wavelength_nm = j.at("wavelength_nm").get<double>();
    sys.gamma = two_pi * j.at("gamma_hz").get<double>();
    sys.ground_splitting = two_pi * j.at("hyperfine_ground_hz").get<double>();
    for (double hz : j.at("hyperfine_excited_hz").get<std::vector<double>>())
        sys.excited_shift.push_back(two_pi * hz);
    sys.reduced_dipole = j.at("reduced_dipole").get<double>();

    if (sys.line == "D1") {
        sys.j_excited = 0.5;
        sys.excited_f = {3, 4};
    } else if (sys.line == "D2") {
        sys.j_excited = 1.5;
        sys.excited_f = {2, 3, 4, 5};
    } else {
        throw std::runtime_error("line must be D1 or D2");
    }
    if (sys.excited_shift.size() != sys.excited_f.size())
        throw std::runtime_error("hyperfine_excited_hz length does not match "
                                 "the line's f' multiplicity");

    if (j.contains("oscillator_strength_factor")) {
        const auto fac = j["oscillator_strength_factor"].get<std::string>();
        if (fac == "2f+1")
            sys.osc_factor_extra = 0.0;
        else if (fac == "2f+2")
            sys.osc_factor_extra = 1.0;
        else
            throw std::runtime_error("oscillator_strength_factor must be "
                                     "\"2f+1\" or \"2f+2\"");
    }
    sys.validate();
    return sys;
}

void AtomicSystem::validate() const {
    if (!(wavelength_nm > 0) || !(gamma > 0) || !(ground_splitting > 0))
        throw std::runtime_error("atomic data: nonpositive wavelength, gamma "
                                 "or ground splitting");
    // Detuning consistency: Delta_3f' - Delta_4f' must equal the ground
    // splitting for every f'.
    const double om0 = omega_center();
    for (int fp : excited_f) {
        // The f=3 -> f' transition sits one ground splitting above f=4 -> f'.
        const double d = detuning(om0, 4, fp) - detuning(om0, 3, fp);
        if (std::abs(d - ground_splitting) > 1e-6 * ground_splitting)
            throw std::runtime_error("atomic data: inconsistent detunings");
    }
}

double AtomicSystem::sigma0() const {
    return 3.0 * wavelength_nm * wavelength_nm / two_pi;
}

double AtomicSystem::omega_center() const {
    return two_pi * c_nm_per_s / wavelength_nm;
}

double AtomicSystem::ground_shift(int f) const {
    // Center-of-gravity weighting over the 16 ground states.
    if (f == 4) return ground_splitting * 7.0 / 16.0;
    if (f == 3) return -ground_splitting * 9.0 / 16.0;
    throw std::invalid_argument("ground f must be 3 or 4");
}

double AtomicSystem::excited_shift_of(int f_prime) const {
    for (std::size_t i = 0; i < excited_f.size(); ++i)
        if (excited_f[i] == f_prime) return excited_shift[i];
    throw std::invalid_argument("f' not on this line");
}

double AtomicSystem::transition_omega(int f, int f_prime) const {
    return omega_center() + transition_offset(f, f_prime);
}

double AtomicSystem::transition_offset(int f, int f_prime) const {
    return excited_shift_of(f_prime) - ground_shift(f);
}

double AtomicSystem::detuning(double omega0, int f, int f_prime) const {
    return detuning_offset(omega0 - omega_center(), f, f_prime);
}

double AtomicSystem::detuning_offset(double delta_center, int f,
                                     int f_prime) const {
    return delta_center - transition_offset(f, f_prime);
}

std::complex<double> AtomicSystem::alpha0(double det, double k0) const {
    return -(sigma0() / (8 * pi * k0)) * gamma /
           std::complex<double>(det, gamma / 2);
}

double AtomicSystem::alpha0_dispersive(double det, double k0) const {
    return -(sigma0() / (8 * pi * k0)) * gamma / det;
}

namespace {

// The 6-j evaluations run in exact rational arithmetic; the coefficients are
// constants of the line, so memoize them (the magic-detuning root scans call
// these thousands of times).
using CoeffKey = std::tuple<double, double, int, int>;

struct CoeffEntry {
    double o2;
    IrreducibleCoefficients ck;
};

CoeffEntry coefficients_for(const AtomicSystem& sys, int f, int f_prime) {
    thread_local std::map<CoeffKey, CoeffEntry> cache;
    const CoeffKey key{sys.j_excited, sys.osc_factor_extra, f, f_prime};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    CoeffEntry e;
    const double w6 = wigner_6j(AtomicSystem::j_ground, sys.j_excited, 1,
                                f_prime, f, AtomicSystem::nuclear_spin);
    e.o2 = (2 * sys.j_excited + 1) * (2 * f + 1 + sys.osc_factor_extra) * w6 *
           w6;
    const double fd = f;
    const double sign = ((f + f_prime) % 2 == 0) ? 1.0 : -1.0;
    const double pref = e.o2 * (2 * f_prime + 1) * sign;
    const double g0 = -1.0 / std::sqrt(3.0 * (2 * fd + 1));
    const double g1 = std::sqrt(3.0 / (2 * fd * (fd + 1) * (2 * fd + 1)));
    const double g2 = std::sqrt(30.0 / (fd * (fd + 1) * (2 * fd - 1) *
                                        (2 * fd + 1) * (2 * fd + 3)));
    e.ck.c0 = pref * wigner_6j(1, 1, 0, f, f, f_prime) * g0;
    e.ck.c1 = pref * wigner_6j(1, 1, 1, f, f, f_prime) * g1;
    e.ck.c2 = pref * wigner_6j(1, 1, 2, f, f, f_prime) * g2;
    return cache.emplace(key, e).first->second;
}

}  // namespace

double oscillator_strength_sq(const AtomicSystem& sys, int f, int f_prime) {
    return coefficients_for(sys, f, f_prime).o2;
}

IrreducibleCoefficients irreducible_coefficients(const AtomicSystem& sys,
                                                 int f, int f_prime) {
    return coefficients_for(sys, f, f_prime).ck;
}

double dipole_matrix_element(const AtomicSystem& sys, int f, double m, int q,
                             int f_prime, double m_prime) {
    if (std::abs(m_prime - (m + q)) > 1e-9) return 0.0;
    const double o2 = oscillator_strength_sq(sys, f, f_prime);
    return std::sqrt(o2) * clebsch_gordan(f, m, 1, q, f_prime, m_prime);
}

namespace {

// <f,0| alpha |f,0> = sum_f' kernel(f') [C0 I + C2 f(f+1)/6 (I - 3 e@e)].
template <typename Scalar, typename Kernel>
Eigen::Matrix<Scalar, 3, 3> clock_tensor(const AtomicSystem& sys, int f,
                                         const QuantizationAxis& axis,
                                         Kernel kernel) {
    using Mat = Eigen::Matrix<Scalar, 3, 3>;
    const Eigen::Vector3d ez = axis.e_z_tilde();
    const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d rank2_shape = eye - 3.0 * (ez * ez.transpose());
    Mat out = Mat::Zero();
    for (int fp : sys.excited_f) {
        if (std::abs(fp - f) > 1) continue;
        const auto c = irreducible_coefficients(sys, f, fp);
        const Scalar k = kernel(fp);
        out += k * (c.c0 * eye + c.c2 * (f * (f + 1) / 6.0) * rank2_shape);
    }
    return out;
}

}  // namespace

Eigen::Matrix3cd clock_polarizability(const AtomicSystem& sys, int f,
                                      const QuantizationAxis& axis,
                                      double omega0) {
    const double k0 = omega0 / c_nm_per_s;
    return clock_tensor<std::complex<double>>(sys, f, axis, [&](int fp) {
        return sys.alpha0(sys.detuning(omega0, f, fp), k0);
    });
}

Eigen::Matrix3d clock_polarizability_dispersive(const AtomicSystem& sys,
                                                int f,
                                                const QuantizationAxis& axis,
                                                double omega0) {
    const double k0 = omega0 / c_nm_per_s;
    return clock_tensor<double>(sys, f, axis, [&](int fp) {
        return sys.alpha0_dispersive(sys.detuning(omega0, f, fp), k0);
    });
}

ChiCoefficients chi_coefficients_offset(const AtomicSystem& sys, int f,
                                        double delta_center,
                                        double resonance_guard) {
    ChiCoefficients out{0, 0};
    for (int fp : sys.excited_f) {
        if (std::abs(fp - f) > 1) continue;
        const double det = sys.detuning_offset(delta_center, f, fp);
        if (std::abs(det) < resonance_guard * sys.gamma)
            throw ResonanceError("detuning inside the dispersive guard band");
        const auto c = irreducible_coefficients(sys, f, fp);
        const double w = sys.gamma / (4 * det);
        out.a += (c.c0 + f * (f + 1) / 6.0 * c.c2) * w;
        out.b += f * (f + 1) / 2.0 * c.c2 * w;
    }
    return out;
}

ChiCoefficients chi_coefficients(const AtomicSystem& sys, int f,
                                 double omega0, double resonance_guard) {
    return chi_coefficients_offset(sys, f, omega0 - sys.omega_center(),
                                   resonance_guard);
}

double coupling_chi_offset(const AtomicSystem& sys,
                           const GuidedModeSolution& sol, int f, ModeBasis p,
                           const QuantizationAxis& axis, const TrapSite& site,
                           double delta_center, double resonance_guard) {
    const auto coeff =
        chi_coefficients_offset(sys, f, delta_center, resonance_guard);
    const Eigen::Vector3cd u =
        sol.field(p, +1, site.r_perp, site.phi).cartesian();
    const Eigen::Vector3d ez = axis.e_z_tilde();
    const double u_sq = u.squaredNorm();
    const double ez_u_sq = std::norm(ez.cast<std::complex<double>>().dot(u));
    return sol.n_g * sys.sigma0() * (coeff.a * u_sq - coeff.b * ez_u_sq);
}

double coupling_chi(const AtomicSystem& sys, const GuidedModeSolution& sol,
                    int f, ModeBasis p, const QuantizationAxis& axis,
                    const TrapSite& site, double omega0,
                    double resonance_guard) {
    return coupling_chi_offset(sys, sol, f, p, axis, site,
                               omega0 - sys.omega_center(), resonance_guard);
}

}  // namespace nanofiber
