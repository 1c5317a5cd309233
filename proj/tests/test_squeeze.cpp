#include <doctest.h>

#include <cmath>
#include <random>

#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"
#include "nanofiber/squeeze.hpp"
#include "test_support.hpp"

using namespace nanofiber;
using testsup::gold;
using testsup::rel;

namespace {

TrapSite ref_site(double factor = 1.8) {
    return {factor * testsup::reference_fiber().radius_nm, 0.0};
}

QuantizationAxis axis_deg(double deg) {
    QuantizationAxis a;
    a.varphi = deg * pi / 180.0;
    return a;
}

CouplingSet ref_coupling(double phi_deg = 90.0) {
    return coupling_set(testsup::d1(), testsup::d1_solution(),
                        axis_deg(phi_deg), ref_site(), MagicBranch::w4, 1e6);
}

RateSet ref_rates(double phi_deg = 90.0) {
    return scattering_rates(testsup::d1(), testsup::d1_solution(),
                            axis_deg(phi_deg), ref_site(),
                            InputPolarization::plus45,
                            ref_coupling(phi_deg));
}

double chi_sum(const CouplingSet& cs, int f_idx) {
    return cs.chi[0][f_idx] + cs.chi[1][f_idx];
}

}  // namespace

TEST_CASE("two magic roots exist for every axis angle") {
    const auto& sys = testsup::d1();
    const auto& sol = testsup::d1_solution();
    for (double deg = 0; deg < 180; deg += 10) {
        const MagicPair m =
            magic_detunings(sys, sol, axis_deg(deg), ref_site());
        // both detunings in the hundreds-of-MHz range
        for (double det : {m.detuning3, m.detuning4}) {
            CHECK(std::abs(det) / (two_pi * 1e6) > 100.0);
            CHECK(std::abs(det) / (two_pi * 1e6) < 1000.0);
        }
        // scalar-shift cancellation residual at the root
        for (MagicBranch b : {MagicBranch::w3, MagicBranch::w4}) {
            const CouplingSet cs =
                coupling_set(sys, sol, axis_deg(deg), ref_site(), b, 1e6);
            const double res = std::abs(chi_sum(cs, 1) - chi_sum(cs, 0)) /
                               std::abs(chi_sum(cs, 1));
            CHECK(res < 1e-10);
        }
    }
}

TEST_CASE("magic detunings match the high-precision reference") {
    const MagicPair m = magic_detunings(testsup::d1(), testsup::d1_solution(),
                                        axis_deg(90.0), ref_site());
    CHECK(rel(m.detuning3 / (two_pi * 1e6),
              gold("d1", "magic_detuning_w3_MHz")) < 1e-9);
    CHECK(rel(m.detuning4 / (two_pi * 1e6),
              gold("d1", "magic_detuning_w4_MHz")) < 1e-9);
}

TEST_CASE("coupling set identities and reference values") {
    const CouplingSet cs = ref_coupling(90.0);
    CHECK(rel(cs.chi_J3, gold("d1", "chi_J3")) < 1e-8);
    CHECK(rel(cs.delta_J3, gold("d1", "Delta_J3_rad_s")) < 1e-8);
    CHECK(rel(cs.area_J3, gold("d1", "A_J3_nm2")) < 1e-8);
    CHECK(rel(cs.area_in, gold("d1", "A_in_nm2")) < 1e-9);
    CHECK(rel(cs.area_N, gold("d1", "A_N_nm2")) < 1e-9);
    CHECK(rel(cs.od_per_atom, gold("d1", "od_per_atom")) < 1e-8);

    // kappa / gamma_s == sigma0 A_in / A_J3^2: the coupling-route and
    // area-route expressions agree at the magic root
    const double sigma0 = testsup::d1().sigma0();
    CHECK(rel(cs.kappa / cs.gamma_s,
              sigma0 * cs.area_in / (cs.area_J3 * cs.area_J3)) < 1e-12);
    CHECK(cs.od_per_atom == cs.kappa / cs.gamma_s);
    CHECK(rel(cs.kappa, cs.chi_J3 * cs.chi_J3 * cs.photon_flux) < 1e-12);

    // chi_J3 from the composition and from the area/detuning form
    CHECK(rel(cs.chi_J3, (cs.chi[0][1] - cs.chi[1][1]) -
                             (cs.chi[0][0] - cs.chi[1][0])) < 1e-9);
    CHECK(rel(cs.chi_J3, sigma0 / cs.area_J3 * testsup::d1().gamma /
                             (2.0 * cs.delta_J3)) < 1e-9);
}

TEST_CASE("cooperativity anisotropy between the y and x axes") {
    const double od_x = ref_coupling(0.0).od_per_atom;
    const double od_y = ref_coupling(90.0).od_per_atom;
    CHECK(od_y / od_x > 1.40);
    CHECK(od_y / od_x < 1.60);
}

TEST_CASE("vanishing coupling detected inside the scan range") {
    // The A_J3 numerator changes sign near 40 deg; chi_J3 crosses zero and
    // the reported area diverges there.
    double prev = ref_coupling(30.0).chi_J3;
    bool crossed = false;
    for (double deg = 32; deg <= 50; deg += 2) {
        const double cur = ref_coupling(deg).chi_J3;
        if (prev * cur < 0) crossed = true;
        prev = cur;
    }
    CHECK(crossed);
}

TEST_CASE("rate set identities and reference values") {
    const RateSet r = ref_rates(90.0);
    const double gs = r.gamma_s;
    CHECK(rel(r.gamma_up / gs, gold("d1", "gamma_up_over_gamma_s")) < 1e-8);
    CHECK(rel(r.gamma_down / gs, gold("d1", "gamma_dn_over_gamma_s")) < 1e-8);
    CHECK(rel(r.pump[1][1] / gs, gold("d1", "gamma_44_over_gamma_s")) < 1e-8);
    CHECK(rel(r.pump[1][0] / gs, gold("d1", "gamma_43_over_gamma_s")) < 1e-8);
    CHECK(rel(r.pump[0][0] / gs, gold("d1", "gamma_33_over_gamma_s")) < 1e-8);
    CHECK(rel(r.pump[0][1] / gs, gold("d1", "gamma_34_over_gamma_s")) < 1e-8);

    // gamma_11 composition is exact, branching is bounded
    CHECK(r.g11 == 0.5 * (r.gamma_up + r.gamma_down));
    CHECK(r.pump[1][1] + r.pump[1][0] <= r.gamma_up * (1 + 1e-12));
    CHECK(r.pump[0][0] + r.pump[0][1] <= r.gamma_down * (1 + 1e-12));
    CHECK(r.g00 >= 0);
    r.validate();

    // rate ratios are flux-independent
    const CouplingSet cs2 = coupling_set(testsup::d1(), testsup::d1_solution(),
                                         axis_deg(90.0), ref_site(),
                                         MagicBranch::w4, 7.3e8);
    const RateSet r2 = scattering_rates(testsup::d1(), testsup::d1_solution(),
                                        axis_deg(90.0), ref_site(),
                                        InputPolarization::plus45, cs2);
    CHECK(rel(r2.gamma_up / r2.gamma_s, r.gamma_up / gs) < 1e-12);
}

TEST_CASE("pure QND integration matches the analytic squeezing law") {
    const double n_atoms = 2500;
    CouplingSet cs = ref_coupling(90.0);
    const RateSet none = RateSet::zero(cs.gamma_s);

    IntegrationOptions opts;
    opts.dt = 1e-4 / (cs.od_per_atom * n_atoms);
    opts.t_max = 50.0 * 4.0 / (cs.od_per_atom * n_atoms) * 1.002;
    opts.noise = NoiseMode::off;
    opts.stride = 1000;
    opts.auto_stop = false;

    const auto traj = integrate_moments(scs_initial(n_atoms), cs, none, opts);
    CHECK(traj.xi2.front() == 1.0);
    double max_err = 0, max_r = 0;
    for (const auto& s : traj.samples) {
        const double r = cs.od_per_atom * s.t * n_atoms / 4.0;
        const double expected = n_atoms / 4.0 / (1.0 + r);
        max_err = std::max(max_err, rel(s.varJ3, expected));
        max_r = std::max(max_r, r);
    }
    CHECK(max_r > 49.0);
    CHECK(max_err < 1e-6);
    // J1 untouched without pumping
    CHECK(traj.samples.back().J1 == n_atoms / 2.0);
}

TEST_CASE("mean spin decays by its exact exponential factor") {
    const double n_atoms = 1000;
    CouplingSet cs{};
    cs.od_per_atom = 0.0;
    cs.gamma_s = 1.0;
    cs.chi_J3 = 1.0;
    RateSet r = RateSet::zero(1.0);
    r.g11 = 0.37;  // only depolarization active
    IntegrationOptions opts;
    opts.dt = 1e-3;
    opts.t_max = 2.0;
    opts.stride = 100;
    opts.auto_stop = false;
    const auto traj = integrate_moments(scs_initial(n_atoms), cs, r, opts);
    for (const auto& s : traj.samples)
        CHECK(rel(s.J1, n_atoms / 2.0 * std::exp(-0.37 * s.t)) < 1e-12);
}

TEST_CASE("squeezing parameter starts at unity") {
    const auto traj = integrate_moments(scs_initial(321), ref_coupling(),
                                        ref_rates(), IntegrationOptions{});
    CHECK(traj.xi2.front() == 1.0);
}

TEST_CASE("peak squeezing stable under halving dt") {
    IntegrationOptions opts;
    opts.dt = 5e-4;
    opts.auto_stop = true;
    const auto t1 =
        integrate_moments(scs_initial(2500), ref_coupling(), ref_rates(), opts);
    opts.dt = 2.5e-4;
    const auto t2 =
        integrate_moments(scs_initial(2500), ref_coupling(), ref_rates(), opts);
    CHECK(std::abs(t1.peak_db - t2.peak_db) < 0.01);
}

TEST_CASE("runaway step triggers the halving retries, then throws") {
    CouplingSet cs{};
    cs.od_per_atom = 0.0;
    cs.gamma_s = 1.0;
    cs.chi_J3 = 1.0;
    RateSet r = RateSet::zero(1.0);
    r.g00 = 1e12;  // drives varJ3 negative at any retried dt
    IntegrationOptions opts;
    opts.dt = 1.0;
    opts.t_max = 2.0;
    CHECK_THROWS_AS(integrate_moments(scs_initial(100), cs, r, opts),
                    StepTooLarge);
}

TEST_CASE("seeded trajectories average onto the deterministic variance") {
    const CouplingSet cs = ref_coupling(90.0);
    const RateSet rates = ref_rates(90.0);
    IntegrationOptions opts;
    opts.dt = 2e-4;
    opts.t_max = 0.3;
    opts.auto_stop = false;
    opts.stride = 100;
    const auto det = integrate_moments(scs_initial(2500), cs, rates, opts);

    std::vector<double> mean(det.samples.size(), 0.0);
    const int n_seeds = 200;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        IntegrationOptions sopts = opts;
        sopts.noise = NoiseMode::seeded;
        sopts.seed = seed;
        const auto traj = integrate_moments(scs_initial(2500), cs, rates,
                                            sopts);
        REQUIRE(traj.samples.size() == det.samples.size());
        for (std::size_t i = 0; i < mean.size(); ++i)
            mean[i] += traj.samples[i].varJ3 / n_seeds;
    }
    for (std::size_t i = 0; i < mean.size(); ++i)
        CHECK(rel(mean[i], det.samples[i].varJ3) < 0.02);
}

TEST_CASE("variance equation consistent with the second-moment form") {
    // Integrate (J3, <J3^2>) with the Ito recombination
    // d var = d<J3^2> - 2 <J3> d<J3> - (d<J3>)^2 and compare with the
    // directly integrated variance equation, same noise realizations.
    const CouplingSet cs = ref_coupling(90.0);
    const RateSet rr = ref_rates(90.0);
    const double gs = cs.gamma_s;
    const double k = cs.od_per_atom;
    const double g33 = rr.g33 / gs, g00 = rr.g00 / gs, g03 = rr.g03 / gs,
                 g30 = rr.g30 / gs, s = cs.chi_J3 >= 0 ? 1.0 : -1.0;
    const double n_atoms = 400, dt = 2e-5, t_max = 0.2;
    const int steps = static_cast<int>(t_max / dt);

    double diff_sum = 0, scale_sum = 0;
    for (int seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed);
        auto normal = [&rng] {
            const double u1 =
                (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
            const double u2 =
                (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
            return std::sqrt(-2 * std::log(u1)) * std::cos(two_pi * u2);
        };
        double nc = n_atoms, j3a = 0, vara = n_atoms / 4.0;
        double j3b = 0, m2 = n_atoms / 4.0;
        for (int i = 0; i < steps; ++i) {
            const double dw = normal() * std::sqrt(dt);
            // route A: variance equation as printed
            const double varb = m2 - j3b * j3b;
            const double da =
                -k * vara * vara - 2 * g33 * vara +
                0.25 * (2 * g33 - g00) * nc + 0.5 * (g03 - 2 * g30) * j3a;
            const double dj3a = s * std::sqrt(k) * vara * dw - g33 * j3a * dt +
                                0.5 * g30 * nc * dt;
            // route B: second moment with Gaussian closure (the Ito
            // -kappa var^2 term enters through the discrete (dJ3)^2)
            const double dm2 = 2 * s * std::sqrt(k) * j3b * varb * dw -
                               2 * g33 * m2 * dt +
                               0.25 * (2 * g33 - g00) * nc * dt +
                               g30 * j3b * nc * dt +
                               0.5 * (g03 - 2 * g30) * j3b * dt;
            const double dj3b = s * std::sqrt(k) * varb * dw - g33 * j3b * dt +
                                0.5 * g30 * nc * dt;
            nc += -g00 * nc * dt;
            vara += da * dt;
            j3a += dj3a;
            m2 += dm2;
            j3b += dj3b;
        }
        diff_sum += (m2 - j3b * j3b) - vara;  // signed; noise averages out
        scale_sum += vara;
    }
    CHECK(std::abs(diff_sum) / scale_sum < 0.015);
}

TEST_CASE("variance decomposition identities") {
    const auto traj = integrate_moments(scs_initial(2500), ref_coupling(86.0),
                                        ref_rates(86.0), IntegrationOptions{});
    const auto parts = variance_decomposition(traj);
    REQUIRE(parts.size() == traj.samples.size());

    // initial spin coherent state: all projection noise is single-body
    CHECK(rel(parts.front().first, 2500.0 / 4.0) < 1e-12);
    CHECK(std::abs(parts.front().second) < 1e-9);

    bool negative_two_body = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        CHECK(rel(parts[i].first + parts[i].second, traj.samples[i].varJ3) <
              1e-9);
        if (parts[i].second < -1.0) negative_two_body = true;
    }
    CHECK(negative_two_body);  // squeezing = negative pairwise correlations
}

TEST_CASE("clock-subspace population falls whenever loss exceeds the feed") {
    // The only growth channel for N_C is the 2 gamma_03 J3 feed term;
    // whenever it stays below the gamma_00 loss the population must be
    // non-increasing. For this configuration that covers the whole run.
    IntegrationOptions opts;
    opts.t_max = 3.0;
    opts.auto_stop = false;
    const RateSet r = ref_rates(86.0);
    const auto traj = integrate_moments(scs_initial(2500), ref_coupling(86.0),
                                        r, opts);
    double prev = traj.samples.front().N_C;
    int in_regime = 0;
    for (const auto& s : traj.samples) {
        if (2.0 * r.g03 * s.J3 <= r.g00 * s.N_C) {
            CHECK(s.N_C <= prev * (1 + 1e-12));
            ++in_regime;
        }
        prev = s.N_C;
    }
    CHECK(in_regime == static_cast<int>(traj.samples.size()));
}

TEST_CASE("out-of-plane quantization axes are handled") {
    QuantizationAxis tilted;
    tilted.varphi = pi / 2;
    tilted.theta = pi / 3;  // 60 degrees from the fiber axis
    const CouplingSet cs =
        coupling_set(testsup::d1(), testsup::d1_solution(), tilted, ref_site(),
                     MagicBranch::w4, 1e6);
    const CouplingSet in_plane = ref_coupling(90.0);
    CHECK(cs.od_per_atom > 0);
    CHECK(cs.od_per_atom != in_plane.od_per_atom);
    // the tilted axis picks up the longitudinal (i u_z) field component
    const double res =
        std::abs(chi_sum(cs, 1) - chi_sum(cs, 0)) / std::abs(chi_sum(cs, 1));
    CHECK(res < 1e-10);
}

TEST_CASE("axis objective is periodic under 180-degree rotation") {
    for (double deg : {20.0, 90.0}) {
        const CouplingSet a = ref_coupling(deg);
        const CouplingSet b = ref_coupling(deg + 180.0);
        CHECK(rel(a.chi_J3, b.chi_J3) < 1e-9);
        CHECK(rel(a.od_per_atom, b.od_per_atom) < 1e-9);
    }
}

TEST_CASE("optimal axis without decoherence is the coherent maximum") {
    IntegrationOptions opts;
    opts.dt = 1e-3;
    opts.t_max = 0.5;
    const AxisOptimum opt =
        optimize_axis(testsup::d1(), testsup::d1_solution(), ref_site(), 2500,
                      MagicBranch::w4, 1e6, opts, /*decoherence=*/false);
    double best_chi = 0, best_deg = 0;
    for (double deg = 0; deg < 180; deg += 1.0) {
        const double chi = std::abs(ref_coupling(deg).chi_J3);
        if (chi > best_chi) {
            best_chi = chi;
            best_deg = deg;
        }
    }
    double d = std::abs(opt.varphi * 180 / pi - best_deg);
    d = std::min(d, 180.0 - d);
    CHECK(d < 2.5);
}

TEST_CASE("sweep rows: monotone cooperativity and the termination mark") {
    IntegrationOptions opts;
    opts.dt = 1e-3;
    SweepRange range{1.8, 2.4, 0.3};
    const auto rows = sweep(testsup::d1(), testsup::d1_solution(), range,
                            {500, 2500}, MagicBranch::w4, 1e6, opts, true, 2);
    REQUIRE(rows.size() == 6);

    for (const auto& row : rows) CHECK(row.status != "");
    // od strictly decreasing with radius at fixed atom number
    for (std::size_t i = 0; i + 2 < rows.size(); i += 2)
        CHECK(rows[i + 2].od_per_atom < rows[i].od_per_atom);
    // peak squeezing increases with atom number at fixed radius
    for (std::size_t i = 0; i < rows.size(); i += 2)
        CHECK(rows[i + 1].peak_db > rows[i].peak_db);
    // far row with few atoms is marked, not dropped
    const auto& faint = rows[4];
    CHECK(faint.r_over_a == 2.4);
    CHECK(faint.n_atoms == 500);
    CHECK(faint.status == "unobservable");
    CHECK(rows[5].status == "ok");

    CHECK_THROWS_AS(sweep(testsup::d1(), testsup::d1_solution(),
                          SweepRange{1.2, 1.4, 0.1}, {500}, MagicBranch::w4,
                          1e6, opts, true, 1),
                    std::invalid_argument);
}

TEST_CASE("atom number resolution on the D2 line") {
    const auto& sys = testsup::d2();
    const auto& sol = testsup::d2_solution();
    const double det = two_pi * 3e9;

    const AtomNumberResult r18 = atom_number_resolution(sys, sol, ref_site(1.8),
                                                        det);
    CHECK(rel(r18.delta_N_A, gold("d2", "delta_N_A")) < 1e-9);
    CHECK(rel(r18.area_N, gold("d2", "A_N_nm2")) < 1e-9);
    const AtomNumberResult r20 = atom_number_resolution(sys, sol, ref_site(2.0),
                                                        det);
    for (double v : {r18.delta_N_A, r20.delta_N_A}) {
        CHECK(v > 5.0);
        CHECK(v < 20.0);
    }

    // resolution is detuning-free (and has no flux dependence at all);
    // chi_N itself moves with the detuning
    const AtomNumberResult other =
        atom_number_resolution(sys, sol, ref_site(1.8), 2.0 * det);
    CHECK(other.delta_N_A == r18.delta_N_A);
    CHECK(other.chi_N != r18.chi_N);

    // chi_N flips sign where the V mode dominates (trap rotated to the
    // y axis swaps the quasilinear intensity roles)
    const TrapSite y_site{1.8 * sol.fiber.radius_nm, pi / 2};
    const AtomNumberResult flipped =
        atom_number_resolution(sys, sol, y_site, det);
    CHECK(flipped.chi_N * r18.chi_N < 0);
    CHECK(flipped.area_N < 0);
}

TEST_CASE("both magic branches feed a full coupling set") {
    const CouplingSet w3 =
        coupling_set(testsup::d1(), testsup::d1_solution(), axis_deg(90.0),
                     ref_site(), MagicBranch::w3, 1e6);
    const CouplingSet w4 = ref_coupling(90.0);
    CHECK(w3.omega_magic != w4.omega_magic);
    CHECK(w3.od_per_atom > 0);
    // the geometry factor kappa/gamma_s is branch-independent
    CHECK(rel(w3.od_per_atom, w4.od_per_atom) < 1e-9);
}
