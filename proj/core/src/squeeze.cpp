#include "nanofiber/squeeze.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <thread>

#include "nanofiber/angular.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"

namespace nanofiber {
namespace {

using cd = std::complex<double>;
constexpr cd iu(0, 1);

/// Field intensities and axis projections at the trap site, for b = +1.
struct SiteFields {
    Eigen::Vector3cd uH, uV;
    double IH, IV;        // |u_H|^2, |u_V|^2
    double ezH2, ezV2;    // |e_z~ . u_p|^2
};

SiteFields site_fields(const GuidedModeSolution& sol,
                       const QuantizationAxis& axis, const TrapSite& site) {
    SiteFields f;
    f.uH = sol.field(ModeBasis::quasilinear_H, +1, site.r_perp, site.phi)
               .cartesian();
    f.uV = sol.field(ModeBasis::quasilinear_V, +1, site.r_perp, site.phi)
               .cartesian();
    f.IH = f.uH.squaredNorm();
    f.IV = f.uV.squaredNorm();
    const Eigen::Vector3cd ez = axis.e_z_tilde().cast<cd>();
    f.ezH2 = std::norm(ez.dot(f.uH));
    f.ezV2 = std::norm(ez.dot(f.uV));
    return f;
}

/// Differential-shift function whose zeros are the magic frequencies:
/// (a4 - a3) - rho (b4 - b3), rho the axis-projected intensity ratio.
/// The probe is an offset from the line center (sub-Hz residuals need the
/// offset arithmetic).
double magic_condition(const AtomicSystem& sys, double delta, double rho) {
    const auto c4 = chi_coefficients_offset(sys, 4, delta, 1.0);
    const auto c3 = chi_coefficients_offset(sys, 3, delta, 1.0);
    return (c4.a - c3.a) - rho * (c4.b - c3.b);
}

double bracketed_magic_root(const AtomicSystem& sys, double rho, double lo,
                            double hi, const char* branch_name) {
    auto g = [&](double om) { return magic_condition(sys, om, rho); };
    const int n = 2000;
    double prev_x = lo, prev_v = g(lo);
    double b1 = 0, b2 = 0;
    bool found = false;
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = g(x);
        if (prev_v * v < 0) {
            b1 = prev_x;
            b2 = x;
            found = true;
            break;
        }
        prev_x = x;
        prev_v = v;
    }
    if (!found)
        throw RootNotFound(std::string("no magic-frequency root in the ") +
                           branch_name + " window");
    double v1 = g(b1);
    // Bisect to the floating-point limit of the center offset (micro-hertz).
    while (true) {
        const double mid = 0.5 * (b1 + b2);
        if (mid <= b1 || mid >= b2) return mid;
        const double vm = g(mid);
        if (vm == 0) return mid;
        if (v1 * vm < 0) {
            b2 = mid;
        } else {
            b1 = mid;
            v1 = vm;
        }
    }
}

std::array<Eigen::Vector3cd, 3> spherical_basis(const QuantizationAxis& axis) {
    const Eigen::Vector3cd ex = axis.e_x_tilde().cast<cd>();
    const Eigen::Vector3cd ey = axis.e_y_tilde().cast<cd>();
    const Eigen::Vector3cd ez = axis.e_z_tilde().cast<cd>();
    const double rt2 = std::sqrt(2.0);
    return {(ex - iu * ey) / rt2, ez, -(ex + iu * ey) / rt2};  // q = -1, 0, +1
}

// Below this floor the mean spin is fully depolarized and xi^2 diverges.
double mean_spin_floor(double j1, double n_atoms) {
    return j1 > 1e-12 * n_atoms ? j1 : 0.0;
}

}  // namespace

MagicPair magic_detunings(const AtomicSystem& sys,
                          const GuidedModeSolution& sol,
                          const QuantizationAxis& axis, const TrapSite& site) {
    const SiteFields f = site_fields(sol, axis, site);
    const double rho = (f.ezH2 + f.ezV2) / (f.IH + f.IV);
    // Each branch lives between its ground manifold's two D1 transitions;
    // keep clear of the resonances by a guard wider than 10 Gamma.
    const double guard = std::max(10.0 * sys.gamma, two_pi * 60e6);
    MagicPair out{};
    const double to33 = sys.transition_offset(3, 3);
    const double to34 = sys.transition_offset(3, 4);
    const double to43 = sys.transition_offset(4, 3);
    const double to44 = sys.transition_offset(4, 4);
    out.offset3 =
        bracketed_magic_root(sys, rho, to33 + guard, to34 - guard, "w3");
    out.offset4 =
        bracketed_magic_root(sys, rho, to43 + guard, to44 - guard, "w4");
    out.w3 = sys.omega_center() + out.offset3;
    out.w4 = sys.omega_center() + out.offset4;
    out.detuning3 = out.offset3 - to33;
    out.detuning4 = out.offset4 - to44;
    return out;
}

CouplingSet coupling_set(const AtomicSystem& sys,
                         const GuidedModeSolution& sol,
                         const QuantizationAxis& axis, const TrapSite& site,
                         MagicBranch branch, double photon_flux,
                         InputPolarization pol) {
    if (sys.line != "D1")
        throw std::invalid_argument("clock-state couplings are defined on the "
                                    "D1 line");
    const MagicPair magic = magic_detunings(sys, sol, axis, site);
    const double delta =
        branch == MagicBranch::w4 ? magic.offset4 : magic.offset3;
    const SiteFields f = site_fields(sol, axis, site);

    CouplingSet cs{};
    cs.branch = branch;
    cs.delta_center = delta;
    cs.omega_magic = sys.omega_center() + delta;
    cs.photon_flux = photon_flux;
    for (int fi = 0; fi < 2; ++fi) {
        cs.chi[0][fi] = coupling_chi_offset(
            sys, sol, 3 + fi, ModeBasis::quasilinear_H, axis, site, delta);
        cs.chi[1][fi] = coupling_chi_offset(
            sys, sol, 3 + fi, ModeBasis::quasilinear_V, axis, site, delta);
    }
    cs.chi_J3 = 2.0 * (cs.chi[0][1] - cs.chi[0][0]);

    const auto c4 = chi_coefficients_offset(sys, 4, delta);
    const auto c3 = chi_coefficients_offset(sys, 3, delta);
    cs.delta_J3 = sys.gamma / (4.0 * (c4.b - c3.b));

    const double aj3_inv =
        sol.n_g * (f.ezV2 * f.IH - f.ezH2 * f.IV) / (f.IH + f.IV);
    cs.area_J3 = 1.0 / aj3_inv;

    const Eigen::Vector3cd u_in = input_field(sol, pol, site.r_perp, site.phi);
    cs.area_in = sol.effective_area(u_in);
    cs.area_N = 2.0 / (sol.n_g * (f.IH - f.IV));

    const double sigma0 = sys.sigma0();
    cs.kappa = cs.chi_J3 * cs.chi_J3 * photon_flux;
    cs.gamma_s = (sigma0 / cs.area_in) * sys.gamma * sys.gamma /
                 (4.0 * cs.delta_J3 * cs.delta_J3) * photon_flux;
    // OD/N_A is defined as kappa/gamma_s; its closed form
    // sigma0 A_in / A_J3^2 is an identity checked in the tests.
    cs.od_per_atom = cs.kappa / cs.gamma_s;

    // Unpolarized-ensemble rotation angle, population-weighted over the 16
    // ground sublevels.
    double chi_n = 0;
    for (int fg : AtomicSystem::ground_f) {
        const double w = (2.0 * fg + 1.0) / 16.0;
        for (int fp : sys.excited_f) {
            if (std::abs(fp - fg) > 1) continue;
            chi_n += w * irreducible_coefficients(sys, fg, fp).c0 *
                     sys.gamma / (2.0 * sys.detuning_offset(delta, fg, fp));
        }
    }
    cs.chi_N = sigma0 / cs.area_N * chi_n;
    return cs;
}

RateSet RateSet::zero(double gamma_s) {
    RateSet r{};
    r.gamma_s = gamma_s;
    return r;
}

void RateSet::validate() const {
    const double tol = 1e-12 * std::max({gamma_up, gamma_down, gamma_s, 1.0});
    if (std::abs(g11 - 0.5 * (gamma_up + gamma_down)) > tol)
        throw Error("rate identity g11 = (up+down)/2 violated");
    if (g00 < -tol) throw Error("net clock-subspace loss rate is negative");
    for (int fi = 0; fi < 2; ++fi) {
        const double total = fi == 0 ? gamma_down : gamma_up;
        double branch_sum = 0;
        for (int ft = 0; ft < 2; ++ft) {
            if (pump[fi][ft] < -tol) throw Error("negative pumping rate");
            branch_sum += pump[fi][ft];
        }
        if (branch_sum > total * (1 + 1e-9) + tol)
            throw Error("pumping branches exceed the total scattering rate");
    }
}

RateSet scattering_rates(const AtomicSystem& sys,
                         const GuidedModeSolution& sol,
                         const QuantizationAxis& axis, const TrapSite& site,
                         InputPolarization pol, const CouplingSet& coupling) {
    const double delta = coupling.delta_center;
    const double dj3 = coupling.delta_J3;
    Eigen::Vector3cd e_in = input_field(sol, pol, site.r_perp, site.phi);
    e_in.normalize();
    const auto eq = spherical_basis(axis);
    std::array<double, 3> w{};
    for (int qi = 0; qi < 3; ++qi) w[qi] = std::norm(eq[qi].dot(e_in));

    auto cg0 = [&](int f, int q, int fp) {
        return clebsch_gordan(f, 0, 1, q, fp, q);
    };
    auto one_rate = [&](int f, int ft) {
        // ft < 0 requests the total scattering rate gamma_f.
        double total = 0;
        for (int fp : sys.excited_f) {
            if (std::abs(fp - f) > 1) continue;
            if (ft >= 0 && std::abs(fp - ft) > 1) continue;
            const double det = sys.detuning_offset(delta, f, fp);
            const double o2f = oscillator_strength_sq(sys, f, fp);
            double qsum = 0;
            for (int q = -1; q <= 1; ++q) {
                const double cf = cg0(f, q, fp);
                if (ft < 0) {
                    qsum += o2f * cf * cf * w[q + 1];
                } else {
                    const double o2t = oscillator_strength_sq(sys, ft, fp);
                    const double ct = cg0(ft, q, fp);
                    qsum += o2f * o2t * cf * cf * ct * ct * w[q + 1];
                }
            }
            total += (dj3 * dj3) / (det * det) * qsum;
        }
        return coupling.gamma_s * total;
    };

    RateSet r{};
    r.gamma_s = coupling.gamma_s;
    r.gamma_down = one_rate(3, -1);
    r.gamma_up = one_rate(4, -1);
    for (int fi = 0; fi < 2; ++fi)
        for (int ft = 0; ft < 2; ++ft) r.pump[fi][ft] = one_rate(3 + fi, 3 + ft);

    const double gu = r.gamma_up, gd = r.gamma_down;
    const double guu = r.pump[1][1], gud = r.pump[1][0];
    const double gdd = r.pump[0][0], gdu = r.pump[0][1];
    r.g00 = 0.5 * (gu + gd - guu - gud - gdd - gdu);
    r.g03 = 0.5 * (-gu + gd + guu + gud - gdd - gdu);
    r.g33 = 0.5 * (gu + gd - guu + gud - gdd + gdu);
    r.g30 = 0.5 * (-gu + gd + guu - gud - gdd + gdu);
    r.g11 = 0.5 * (gu + gd);
    r.validate();
    return r;
}

MomentState scs_initial(double n_atoms) {
    return {0.0, n_atoms, 0.5 * n_atoms, 0.0, 0.25 * n_atoms};
}

namespace {

/// Deterministic standard-normal generator (Box-Muller over mt19937_64);
/// identical streams across platforms for a given seed.
class NormalDraw {
  public:
    explicit NormalDraw(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

  private:
    double uniform() {
        // (0,1), never exactly 0 or 1
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1p-53;
    }
    std::mt19937_64 rng_;
    double spare_ = 0;
    bool have_spare_ = false;
};

struct ScaledRates {
    double g00, g03, g33, g30, g11;
};

bool run_fixed_step(const MomentState& init, double od, double sign_chi,
                    const ScaledRates& g, const IntegrationOptions& opts,
                    double dt, SqueezeTrajectory& out) {
    const double n_atoms = init.N_C;
    NormalDraw noise(opts.seed);
    const bool stochastic = opts.noise == NoiseMode::seeded;

    MomentState s = init;
    out.samples.clear();
    out.xi2.clear();
    out.samples.push_back(s);
    out.xi2.push_back(1.0);
    out.peak_db = 0;
    out.t_peak = 0;
    out.n_atoms = n_atoms;

    const auto n_steps = static_cast<long>(std::ceil(opts.t_max / dt));
    const double sqrt_dt = std::sqrt(dt);
    for (long i = 1; i <= n_steps; ++i) {
        const double dW = stochastic ? noise() * sqrt_dt : 0.0;
        // Measurement term integrated exactly; mean-spin decay by its exact
        // factor; remaining couplings explicit Euler-Maruyama on the old
        // state.
        double var_new = s.varJ3 / (1.0 + od * s.varJ3 * dt);
        var_new += (-2.0 * g.g33 * s.varJ3 +
                    0.25 * (2.0 * g.g33 - g.g00) * s.N_C +
                    0.5 * (g.g03 - 2.0 * g.g30) * s.J3) *
                   dt;
        const double j3_new = s.J3 + sign_chi * std::sqrt(od) * s.varJ3 * dW -
                              g.g33 * s.J3 * dt + 0.5 * g.g30 * s.N_C * dt;
        const double nc_source = std::max(0.0, 2.0 * g.g03 * s.J3);
        const double nc_new = s.N_C + (-g.g00 * s.N_C + 2.0 * g.g03 * s.J3) * dt;
        const double j1_new = s.J1 * std::exp(-g.g11 * dt);

        if (!std::isfinite(var_new) || var_new < 0 ||
            nc_new > s.N_C + nc_source * dt * (1 + 1e-9) + 1e-9)
            return false;  // step too large; caller halves dt

        s.t = i * dt;
        s.varJ3 = var_new;
        s.J3 = j3_new;
        s.N_C = nc_new;
        s.J1 = j1_new;

        const double j1_safe = mean_spin_floor(s.J1, n_atoms);
        const double xi2 = j1_safe > 0
                               ? n_atoms * s.varJ3 / (j1_safe * j1_safe)
                               : std::numeric_limits<double>::infinity();
        const double db = -10.0 * std::log10(xi2);
        if (db > out.peak_db) {
            out.peak_db = db;
            out.t_peak = s.t;
        }
        if (i % opts.stride == 0 || i == n_steps) {
            out.samples.push_back(s);
            out.xi2.push_back(xi2);
        }
        if (opts.auto_stop && out.peak_db > 0.01 && db < out.peak_db - 1.0)
            break;
        if (j1_safe == 0) break;
    }
    if (out.samples.back().t != s.t) {
        out.samples.push_back(s);
        out.xi2.push_back(n_atoms * s.varJ3 / (s.J1 * s.J1));
    }
    return true;
}

}  // namespace

SqueezeTrajectory integrate_moments(const MomentState& init,
                                    const CouplingSet& coupling,
                                    const RateSet& rates,
                                    const IntegrationOptions& opts) {
    if (!(init.N_C > 0) || !(opts.dt > 0) || !(opts.t_max > 0))
        throw std::invalid_argument("integration needs N_A > 0, dt > 0, T > 0");
    const double gs = coupling.gamma_s;
    const ScaledRates g{rates.g00 / gs, rates.g03 / gs, rates.g33 / gs,
                        rates.g30 / gs, rates.g11 / gs};
    const double sign_chi = coupling.chi_J3 >= 0 ? 1.0 : -1.0;

    SqueezeTrajectory out;
    double dt = opts.dt;
    for (int attempt = 0; attempt <= 8; ++attempt) {
        if (run_fixed_step(init, coupling.od_per_atom, sign_chi, g, opts, dt,
                           out))
            return out;
        dt *= 0.5;
    }
    throw StepTooLarge("moment integration failed after 8 dt halvings");
}

std::vector<std::pair<double, double>> variance_decomposition(
    const SqueezeTrajectory& traj) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.samples.size());
    const double na = traj.n_atoms;
    for (const auto& s : traj.samples) {
        const double single = 0.25 * s.N_C - s.J3 * s.J3 / na;
        const double j3sq = s.varJ3 + s.J3 * s.J3;
        const double two = j3sq - 0.25 * s.N_C - (na - 1.0) / na * s.J3 * s.J3;
        out.emplace_back(single, two);
    }
    return out;
}

namespace {

struct AxisObjective {
    const AtomicSystem& sys;
    const GuidedModeSolution& sol;
    const TrapSite& site;
    double n_atoms;
    MagicBranch branch;
    double photon_flux;
    IntegrationOptions opts;
    bool decoherence;
    double gamma_s_ref = 0;  // no-decoherence comparisons at fixed absolute T

    struct Result {
        double peak_db;
        double t_peak;
        CouplingSet coupling;
    };

    Result eval(double varphi) const {
        QuantizationAxis axis;
        axis.varphi = varphi;
        const CouplingSet cs = coupling_set(sys, sol, axis, site, branch,
                                            photon_flux);
        RateSet rates = RateSet::zero(cs.gamma_s);
        IntegrationOptions local = opts;
        if (decoherence) {
            rates = scattering_rates(sys, sol, axis, site,
                                     InputPolarization::plus45, cs);
        } else {
            // Pure-QND squeezing grows monotonically; compare axes at equal
            // absolute time by rescaling the gamma_s-scaled horizon.
            local.t_max = opts.t_max * cs.gamma_s / gamma_s_ref;
            local.auto_stop = false;
        }
        const auto traj =
            integrate_moments(scs_initial(n_atoms), cs, rates, local);
        return {traj.peak_db, traj.t_peak, cs};
    }

    double peak(double varphi) const {
        try {
            return eval(varphi).peak_db;
        } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
        }
    }
};

}  // namespace

AxisOptimum optimize_axis(const AtomicSystem& sys,
                          const GuidedModeSolution& sol, const TrapSite& site,
                          double n_atoms, MagicBranch branch,
                          double photon_flux, const IntegrationOptions& opts,
                          bool decoherence, double grid_deg,
                          double refine_deg) {
    AxisObjective obj{sys, sol, site, n_atoms, branch, photon_flux,
                      opts,  decoherence};
    if (!decoherence) {
        QuantizationAxis x_axis;
        obj.gamma_s_ref =
            coupling_set(sys, sol, x_axis, site, branch, photon_flux).gamma_s;
    }

    const double grid = grid_deg * pi / 180.0;
    double best_phi = 0, best_val = -std::numeric_limits<double>::infinity();
    for (double phi = 0; phi < pi - 1e-12; phi += grid) {
        const double v = obj.peak(phi);
        if (v > best_val) {  // strict: ties keep the smaller angle
            best_val = v;
            best_phi = phi;
        }
    }
    if (!std::isfinite(best_val))
        throw RootNotFound("axis optimization failed at every grid angle");

    // Golden-section refinement in the winning cell.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = best_phi - grid, b = best_phi + grid;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = obj.peak(x1), f2 = obj.peak(x2);
    while (b - a > refine_deg * pi / 180.0) {
        if (f1 >= f2) {  // ties move toward smaller varphi
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = obj.peak(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = obj.peak(x2);
        }
    }
    double phi_opt = f1 >= f2 ? x1 : x2;
    double val = std::max(f1, f2);
    if (best_val > val) {  // keep the grid point if refinement lost it
        phi_opt = best_phi;
        val = best_val;
    }
    phi_opt = std::fmod(phi_opt + pi, pi);
    return {phi_opt, val};
}

std::vector<SweepRow> sweep(const AtomicSystem& sys,
                            const GuidedModeSolution& sol,
                            const SweepRange& range,
                            const std::vector<double>& atom_numbers,
                            MagicBranch branch, double photon_flux,
                            const IntegrationOptions& opts, bool decoherence,
                            int max_threads, bool allow_close_trap) {
    if (!(range.r_over_a_step > 0) ||
        !(range.r_over_a_max >= range.r_over_a_min))
        throw std::invalid_argument("invalid sweep range");
    if (range.r_over_a_min < 1.0)
        throw std::invalid_argument("trap radius below the fiber surface");
    if (range.r_over_a_min < 1.5 && !allow_close_trap)
        throw std::invalid_argument(
            "trap radius below 1.5a is outside the model's validity range "
            "(set the override to proceed)");

    std::vector<double> radii;
    for (double r = range.r_over_a_min; r <= range.r_over_a_max + 1e-9;
         r += range.r_over_a_step)
        radii.push_back(r);

    struct Task {
        double r_over_a;
        double n_atoms;
    };
    std::vector<Task> tasks;
    for (double r : radii)
        for (double na : atom_numbers) tasks.push_back({r, na});

    std::vector<SweepRow> rows(tasks.size());
    auto run_task = [&](std::size_t idx) {
        const Task& task = tasks[idx];
        SweepRow row{};
        row.r_over_a = task.r_over_a;
        row.n_atoms = task.n_atoms;
        const TrapSite site{task.r_over_a * sol.fiber.radius_nm, 0.0};
        try {
            const AxisOptimum opt =
                optimize_axis(sys, sol, site, task.n_atoms, branch,
                              photon_flux, opts, decoherence);
            QuantizationAxis axis;
            axis.varphi = opt.varphi;
            const CouplingSet cs =
                coupling_set(sys, sol, axis, site, branch, photon_flux);
            RateSet rates = RateSet::zero(cs.gamma_s);
            if (decoherence)
                rates = scattering_rates(sys, sol, axis, site,
                                         InputPolarization::plus45, cs);
            const auto traj = integrate_moments(scs_initial(task.n_atoms), cs,
                                                rates, opts);
            row.phi_opt_deg = opt.varphi * 180.0 / pi;
            row.od_per_atom = cs.od_per_atom;
            const MagicPair magic = magic_detunings(sys, sol, axis, site);
            row.delta_magic_mhz =
                (branch == MagicBranch::w4 ? magic.detuning4
                                           : magic.detuning3) /
                (two_pi * 1e6);
            row.peak_db = traj.peak_db;
            row.t_peak = traj.t_peak;
            row.status =
                traj.peak_db < observable_db_threshold ? "unobservable" : "ok";
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
        }
        rows[idx] = row;
    };

    unsigned n_workers = std::thread::hardware_concurrency();
    if (max_threads > 0)
        n_workers = std::min<unsigned>(n_workers, max_threads);
    n_workers = std::max(1u, std::min<unsigned>(n_workers, tasks.size()));

    if (n_workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size();
                     i = next.fetch_add(1))
                    run_task(i);
            });
        }
        for (auto& t : pool) t.join();
    }
    return rows;
}

AtomNumberResult atom_number_resolution(const AtomicSystem& sys,
                                        const GuidedModeSolution& sol,
                                        const TrapSite& site,
                                        double probe_detuning) {
    QuantizationAxis axis;  // x-quantized; any of x/y/z leaves chi_N diagonal
    const SiteFields f = site_fields(sol, axis, site);
    const double area_n = 2.0 / (sol.n_g * (f.IH - f.IV));
    const Eigen::Vector3cd u_in =
        input_field(sol, InputPolarization::plus45, site.r_perp, site.phi);
    const double area_in = sol.effective_area(u_in);
    const double om0 = sys.omega_center() + probe_detuning;

    double chi_n = 0, c0_far = 0;
    for (int fg : AtomicSystem::ground_f) {
        const double w = (2.0 * fg + 1.0) / 16.0;
        for (int fp : sys.excited_f) {
            if (std::abs(fp - fg) > 1) continue;
            const double c0 = irreducible_coefficients(sys, fg, fp).c0;
            chi_n += w * c0 * sys.gamma / (2.0 * sys.detuning(om0, fg, fp));
            c0_far += w * c0;
        }
    }
    AtomNumberResult out;
    out.area_N = area_n;
    out.chi_N = sys.sigma0() / area_n * chi_n;
    out.delta_N_A =
        std::sqrt(area_n * area_n / (area_in * sys.sigma0())) / c0_far;
    return out;
}

}  // namespace nanofiber
