#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nanofiber/atom.hpp"
#include "nanofiber/fiber.hpp"

namespace nanofiber {

enum class MagicBranch { w3, w4 };

/// The two magic frequencies at which the scalar light shifts of the clock
/// states cancel: w3 lies between the f=3 -> f' transitions, w4 between the
/// f=4 -> f' ones (absolute frequencies, rad/s).
struct MagicPair {
    double w3;
    double w4;
    /// Root positions relative to the line center (exact small-number
    /// arithmetic; the absolute frequencies above are ulp-rounded).
    double offset3;
    double offset4;
    /// Offset of each root from its nearby transition (3->3' and 4->4').
    double detuning3;
    double detuning4;
};

MagicPair magic_detunings(const AtomicSystem& sys,
                          const GuidedModeSolution& sol,
                          const QuantizationAxis& axis, const TrapSite& site);

/// Everything derived from one (geometry, axis, magic branch, flux) choice.
struct CouplingSet {
    double chi[2][2];     // [p: H,V][f: 3,4], rad/photon
    double chi_J3;        // 2(chi_H4 - chi_H3) at magic
    double delta_J3;      // effective detuning, rad/s
    double area_J3;       // nm^2
    double area_in;       // nm^2, probe polarization
    double area_N;        // nm^2, birefringence area
    double kappa;         // |chi_J3|^2 * flux, 1/s
    double gamma_s;       // characteristic scattering rate, 1/s
    double od_per_atom;   // kappa/gamma_s = sigma0 A_in / A_J3^2
    double chi_N;         // atom-number rotation angle per atom
    double omega_magic;   // probe frequency used, rad/s
    double delta_center;  // probe frequency relative to the line center
    MagicBranch branch;
    double photon_flux;   // 1/s
};

CouplingSet coupling_set(const AtomicSystem& sys,
                         const GuidedModeSolution& sol,
                         const QuantizationAxis& axis, const TrapSite& site,
                         MagicBranch branch, double photon_flux,
                         InputPolarization pol = InputPolarization::plus45);

/// Photon scattering and optical pumping rates (1/s at the stored gamma_s;
/// all ratios to gamma_s are flux-independent).
struct RateSet {
    double gamma_up;      // total scattering from |4,0>
    double gamma_down;    // total scattering from |3,0>
    double pump[2][2];    // [from f][to f~], indices f-3
    double g00, g03, g33, g30, g11;
    double gamma_s;

    static RateSet zero(double gamma_s);
    void validate() const;  // branching bounds, g00 >= 0, g11 identity
};

RateSet scattering_rates(const AtomicSystem& sys,
                         const GuidedModeSolution& sol,
                         const QuantizationAxis& axis, const TrapSite& site,
                         InputPolarization pol, const CouplingSet& coupling);

/// One sample of the collective moment system. Time in units of 1/gamma_s.
struct MomentState {
    double t = 0;
    double N_C = 0;
    double J1 = 0;
    double J3 = 0;
    double varJ3 = 0;
};

/// Spin-coherent-state initial condition for N_A atoms.
MomentState scs_initial(double n_atoms);

enum class NoiseMode { off, seeded };

struct IntegrationOptions {
    double t_max = 6.0;        // units of 1/gamma_s
    double dt = 5e-4;          // units of 1/gamma_s
    NoiseMode noise = NoiseMode::off;
    std::uint64_t seed = 0;
    int stride = 20;           // sample every n-th step
    bool auto_stop = true;     // stop once 1 dB past the squeezing peak
};

struct SqueezeTrajectory {
    std::vector<MomentState> samples;
    std::vector<double> xi2;   // metrological squeezing parameter per sample
    double peak_db = 0;        // max of -10 log10 xi^2 (>= 0)
    double t_peak = 0;         // units of 1/gamma_s
    double n_atoms = 0;
};

/// Fixed-step Euler-Maruyama integration of the moment equations in
/// gamma_s-scaled time. The mean-spin decay and the quadratic measurement
/// term use their exact one-step factors; a step producing varJ3 < 0 or
/// non-monotonic N_C is retried with dt halved (up to 8 times), then
/// StepTooLarge is thrown.
SqueezeTrajectory integrate_moments(const MomentState& init,
                                    const CouplingSet& coupling,
                                    const RateSet& rates,
                                    const IntegrationOptions& opts);

/// Single-body / two-body split of the conditional variance, pointwise in
/// the trajectory. Returns {N_A (dj3)^2, N_A(N_A-1) <dj3 dj3>} per sample.
std::vector<std::pair<double, double>> variance_decomposition(
    const SqueezeTrajectory& traj);

struct AxisOptimum {
    double varphi;   // rad
    double peak_db;
};

/// Scan the quantization axis over [0, pi): coarse grid then golden-section
/// refinement (ties toward smaller varphi). With decoherence disabled the
/// comparison is made at a fixed absolute time so the optimum reduces to the
/// coherent argmax of |chi_J3|.
AxisOptimum optimize_axis(const AtomicSystem& sys,
                          const GuidedModeSolution& sol, const TrapSite& site,
                          double n_atoms, MagicBranch branch,
                          double photon_flux, const IntegrationOptions& opts,
                          bool decoherence = true,
                          double grid_deg = 2.0, double refine_deg = 0.1);

struct SweepRow {
    double r_over_a;
    double n_atoms;
    double phi_opt_deg;
    double od_per_atom;
    double delta_magic_mhz;  // selected-branch offset from its transition
    double peak_db;
    double t_peak;
    std::string status;      // "ok", "unobservable", or "error: ..."
};

struct SweepRange {
    double r_over_a_min = 1.5;
    double r_over_a_max = 2.5;
    double r_over_a_step = 0.1;
};

/// Peak squeezing below this threshold marks a row unobservable.
inline constexpr double observable_db_threshold = 0.1;

/// Rows are evaluated concurrently (worker count capped by max_threads) and
/// returned in deterministic (r, N_A) order. r/a below 1.5 requires
/// allow_close_trap (model validity limit).
std::vector<SweepRow> sweep(const AtomicSystem& sys,
                            const GuidedModeSolution& sol,
                            const SweepRange& range,
                            const std::vector<double>& atom_numbers,
                            MagicBranch branch, double photon_flux,
                            const IntegrationOptions& opts,
                            bool decoherence = true, int max_threads = 0,
                            bool allow_close_trap = false);

struct AtomNumberResult {
    double chi_N;       // Stokes rotation angle per atom
    double area_N;      // nm^2
    double delta_N_A;   // shot-noise-limited resolution at T = 1/gamma_s
};

/// Dispersive atom-number measurement figures for unpolarized atoms trapped
/// on the quasi-H axis. probe_detuning (rad/s from the line center) sets
/// chi_N; delta_N_A itself is flux- and detuning-free in the far-detuned
/// limit.
AtomNumberResult atom_number_resolution(const AtomicSystem& sys,
                                        const GuidedModeSolution& sol,
                                        const TrapSite& site,
                                        double probe_detuning);

}  // namespace nanofiber
