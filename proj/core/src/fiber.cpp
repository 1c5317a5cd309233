#include "nanofiber/fiber.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <stdexcept>

#include "nanofiber/bessel.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"

namespace nanofiber {
namespace {

// TE01/TM01 cutoff: first zero of J0. Above this V the fiber is multimode.
constexpr double v_cutoff_next_mode = 2.404825557695773;

struct DispersionTerms {
    double value;
    double scale;  // magnitude sum, for a relative residual
};

DispersionTerms dispersion_terms(const FiberSpec& fiber, double k0,
                                 double beta) {
    const double a = fiber.radius_nm, n1 = fiber.n1, n2 = fiber.n2;
    const double h = std::sqrt(n1 * n1 * k0 * k0 - beta * beta);
    const double q = std::sqrt(beta * beta - n2 * n2 * k0 * k0);
    const double ha = h * a, qa = q * a;
    const double kk = bessel::K1_prime(qa) / (qa * bessel::K(1, qa));
    const double t1 = bessel::J(0, ha) / (ha * bessel::J(1, ha));
    const double t2 = (n1 * n1 + n2 * n2) / (2 * n1 * n1) * kk;
    const double t3 = 1.0 / (ha * ha);
    const double rad =
        std::pow((n1 * n1 - n2 * n2) / (2 * n1 * n1) * kk, 2) +
        std::pow(beta / (n1 * k0), 2) *
            std::pow(1.0 / (qa * qa) + 1.0 / (ha * ha), 2);
    const double t4 = std::sqrt(rad);
    return {t1 + t2 - t3 + t4,
            std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4)};
}

// Bracket the fundamental (largest-beta) eigenvalue by a sign scan, then
// bisection and a few secant polish steps. The raw dispersion function has
// poles at interior Bessel zeros; bisection converging onto a point with a
// large residual identifies those brackets, which are skipped.
double solve_beta(const FiberSpec& fiber, double k0) {
    const int n_scan = 2048;
    const double eps = 1e-9;
    const double lo = fiber.n2 * k0 * (1 + eps);
    const double hi = fiber.n1 * k0 * (1 - eps);
    auto f = [&](double b) { return dispersion_terms(fiber, k0, b).value; };

    double prev_b = 0, prev_v = 0;
    bool have_prev = false;
    std::vector<std::pair<double, double>> brackets;
    for (int i = 0; i <= n_scan; ++i) {
        const double b = lo + (hi - lo) * i / n_scan;
        const double v = f(b);
        if (!std::isfinite(v)) {
            have_prev = false;
            continue;
        }
        if (have_prev && v * prev_v < 0) brackets.emplace_back(prev_b, b);
        prev_b = b;
        prev_v = v;
        have_prev = true;
    }
    if (brackets.empty())
        throw NoGuidedMode("no sign change of the dispersion relation in "
                           "(n2 k0, n1 k0)");

    for (auto it = brackets.rbegin(); it != brackets.rend(); ++it) {
        auto [b1, b2] = *it;
        double v1 = f(b1);
        for (int i = 0; i < 200 && b2 - b1 > 1e-17 * k0; ++i) {
            const double mid = 0.5 * (b1 + b2);
            const double vm = f(mid);
            if (vm == 0) {
                b1 = b2 = mid;
                break;
            }
            if (v1 * vm < 0) {
                b2 = mid;
            } else {
                b1 = mid;
                v1 = vm;
            }
        }
        double root = 0.5 * (b1 + b2);
        // secant polish
        double x0 = b1, x1 = b2;
        double f0 = f(x0), f1 = f(x1);
        for (int i = 0; i < 8 && f1 != f0; ++i) {
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(x2 > lo && x2 < hi)) break;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = f(x1);
            if (f1 == 0) break;
        }
        const auto at_secant = dispersion_terms(fiber, k0, x1);
        const auto at_bisect = dispersion_terms(fiber, k0, root);
        if (std::abs(at_secant.value) < std::abs(at_bisect.value)) root = x1;
        const auto final_terms = dispersion_terms(fiber, k0, root);
        if (std::abs(final_terms.value) / final_terms.scale < 1e-12)
            return root;  // genuine eigenvalue, not a pole crossing
    }
    throw NoGuidedMode("all dispersion brackets converged onto poles");
}

double s_parameter(const FiberSpec& fiber, double beta, double h, double q) {
    const double a = fiber.radius_nm;
    const double ha = h * a, qa = q * a;
    (void)beta;
    return (1.0 / (ha * ha) + 1.0 / (qa * qa)) /
           (bessel::J1_prime(ha) / (ha * bessel::J(1, ha)) +
            bessel::K1_prime(qa) / (qa * bessel::K(1, qa)));
}

GuidedModeSolution dispersion_state(const FiberSpec& fiber,
                                    double wavelength_nm) {
    GuidedModeSolution sol;
    sol.fiber = fiber;
    sol.k0 = two_pi / wavelength_nm;
    sol.omega0 = sol.k0 * c_nm_per_s;
    sol.beta0 = solve_beta(fiber, sol.k0);
    sol.h_in = std::sqrt(fiber.n1 * fiber.n1 * sol.k0 * sol.k0 -
                         sol.beta0 * sol.beta0);
    sol.q_out = std::sqrt(sol.beta0 * sol.beta0 -
                          fiber.n2 * fiber.n2 * sol.k0 * sol.k0);
    sol.s_param = s_parameter(fiber, sol.beta0, sol.h_in, sol.q_out);
    sol.v_number = sol.k0 * fiber.radius_nm *
                   std::sqrt(fiber.n1 * fiber.n1 - fiber.n2 * fiber.n2);
    sol.multimode_warning = sol.v_number >= v_cutoff_next_mode;
    sol.u0 = 1.0;  // set by the normalization quadrature
    sol.n_g = 0.0;
    return sol;
}

}  // namespace

void FiberSpec::validate() const {
    if (!(radius_nm > 0))
        throw std::invalid_argument("fiber radius must be positive");
    if (!(n1 > n2 && n2 >= 1))
        throw std::invalid_argument("refractive indices must satisfy n1 > n2 >= 1");
}

RadialProfile GuidedModeSolution::profile(double r_perp) const {
    if (!(r_perp > 0))
        throw std::invalid_argument("r_perp must be positive");
    const double a = fiber.radius_nm, s = s_param;
    const double h = h_in, q = q_out;
    RadialProfile p;
    if (r_perp <= a) {
        // Interior forms in Bessel J, coefficients fixed by continuity of
        // the tangential field at r = a.
        const double c = (q / h) * bessel::K(1, q * a) / bessel::J(1, h * a);
        p.u_r = u0 * c *
                ((1 - s) * bessel::J(0, h * r_perp) -
                 (1 + s) * bessel::J(2, h * r_perp));
        p.u_phi = u0 * c *
                  ((1 - s) * bessel::J(0, h * r_perp) +
                   (1 + s) * bessel::J(2, h * r_perp));
        p.u_z = u0 * (2 * q / beta0) *
                (bessel::K(1, q * a) / bessel::J(1, h * a)) *
                bessel::J(1, h * r_perp);
    } else {
        p.u_r = u0 * ((1 - s) * bessel::K(0, q * r_perp) +
                      (1 + s) * bessel::K(2, q * r_perp));
        p.u_phi = u0 * ((1 - s) * bessel::K(0, q * r_perp) -
                        (1 + s) * bessel::K(2, q * r_perp));
        p.u_z = u0 * (2 * q / beta0) * bessel::K(1, q * r_perp);
    }
    return p;
}

ModeField GuidedModeSolution::field(ModeBasis basis, int direction,
                                    double r_perp, double phi) const {
    if (direction != 1 && direction != -1)
        throw std::invalid_argument("direction must be +1 or -1");
    const RadialProfile p = profile(r_perp);
    const std::complex<double> i_unit(0, 1);
    const std::complex<double> ibz = i_unit * static_cast<double>(direction) *
                                     p.u_z;
    ModeField out;
    out.basis = basis;
    out.direction = direction;
    out.r_perp = r_perp;
    out.phi = phi;
    const double rt2 = std::sqrt(2.0);
    switch (basis) {
        case ModeBasis::quasilinear_H:
            out.cylindrical = {rt2 * p.u_r * std::cos(phi),
                               std::complex<double>(-rt2 * p.u_phi *
                                                    std::sin(phi)),
                               rt2 * ibz * std::cos(phi)};
            break;
        case ModeBasis::quasilinear_V:
            out.cylindrical = {rt2 * p.u_r * std::sin(phi),
                               std::complex<double>(rt2 * p.u_phi *
                                                    std::cos(phi)),
                               rt2 * ibz * std::sin(phi)};
            break;
        case ModeBasis::quasicircular_plus: {
            const auto ph = std::exp(i_unit * phi);
            out.cylindrical = {p.u_r * ph, i_unit * p.u_phi * ph, ibz * ph};
            break;
        }
        case ModeBasis::quasicircular_minus: {
            const auto ph = std::exp(-i_unit * phi);
            out.cylindrical = {p.u_r * ph, -i_unit * p.u_phi * ph, ibz * ph};
            break;
        }
    }
    return out;
}

Eigen::Vector3cd ModeField::cartesian() const {
    const double c = std::cos(phi), s = std::sin(phi);
    return {c * cylindrical(0) - s * cylindrical(1),
            s * cylindrical(0) + c * cylindrical(1), cylindrical(2)};
}

double GuidedModeSolution::effective_area(
    const Eigen::Vector3cd& u_local) const {
    return 1.0 / (n_g * u_local.squaredNorm());
}

double dispersion_residual(const FiberSpec& fiber, double k0, double beta) {
    const auto t = dispersion_terms(fiber, k0, beta);
    return std::abs(t.value) / t.scale;
}

double dispersion_value(const FiberSpec& fiber, double k0, double beta) {
    return dispersion_terms(fiber, k0, beta).value;
}

double mode_norm_integral(const GuidedModeSolution& sol, double u0) {
    const double a = sol.fiber.radius_nm;
    const double scale = u0 / sol.u0;
    auto density = [&](double r) {
        const RadialProfile p = sol.profile(r);
        return (p.u_r * p.u_r + p.u_phi * p.u_phi + p.u_z * p.u_z) * scale *
               scale * r;
    };
    boost::math::quadrature::tanh_sinh<double> integ;
    double err1 = 0, err2 = 0, l1 = 0;
    const double n1sq = sol.fiber.n1 * sol.fiber.n1;
    const double n2sq = sol.fiber.n2 * sol.fiber.n2;
    // Exterior truncated where the integrand has fallen below 1e-16 of its
    // peak: K^2 ~ e^{-2 q r}, so 40/q covers e^{-80}.
    const double r_max = a + 40.0 / sol.q_out;
    const double inner =
        n1sq * integ.integrate(density, 0.0, a, 1e-13, &err1, &l1);
    const double outer =
        n2sq * integ.integrate(density, a, r_max, 1e-13, &err2, &l1);
    const double total = two_pi * (inner + outer);
    if (!(err1 < 1e-10 && err2 < 1e-10))
        throw QuadratureFailure("mode normalization quadrature did not reach "
                                "tolerance");
    return total;
}

GuidedModeSolution solve_he11(const FiberSpec& fiber, double wavelength_nm) {
    fiber.validate();
    if (!(wavelength_nm > 0))
        throw std::invalid_argument("wavelength must be positive");

    GuidedModeSolution sol = dispersion_state(fiber, wavelength_nm);

    // Group index from a centered finite difference of beta(omega),
    // relative step 1e-6.
    const double d_om = sol.omega0 * 1e-6;
    const double beta_plus = solve_beta(fiber, (sol.omega0 + d_om) / c_nm_per_s);
    const double beta_minus =
        solve_beta(fiber, (sol.omega0 - d_om) / c_nm_per_s);
    sol.n_g = c_nm_per_s * (beta_plus - beta_minus) / (2 * d_om);

    const double norm = mode_norm_integral(sol, 1.0);
    sol.u0 = 1.0 / std::sqrt(norm);
    const double check = mode_norm_integral(sol, sol.u0);
    if (std::abs(check - 1.0) > 1e-10)
        throw QuadratureFailure("normalized mode norm deviates from 1");
    return sol;
}

Eigen::Vector3cd input_field(const GuidedModeSolution& sol,
                             InputPolarization pol, double r_perp,
                             double phi) {
    const auto uH =
        sol.field(ModeBasis::quasilinear_H, +1, r_perp, phi).cartesian();
    const auto uV =
        sol.field(ModeBasis::quasilinear_V, +1, r_perp, phi).cartesian();
    switch (pol) {
        case InputPolarization::H:
            return uH;
        case InputPolarization::V:
            return uV;
        case InputPolarization::plus45:
            return (uH + uV) / std::sqrt(2.0);
    }
    throw std::invalid_argument("unknown input polarization");
}

}  // namespace nanofiber
