#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <variant>

#include "nanofiber/atom.hpp"
#include "nanofiber/constants.hpp"
#include "nanofiber/errors.hpp"
#include "nanofiber/greens.hpp"

namespace nanofiber::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// 12 significant digits keeps golden-file diffs meaningful without
// float-noise churn.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

using Cell = std::variant<double, std::string>;

/// Small table emitter: CSV (with an embedded schema header) or a JSON
/// array of row objects, per output.format.
class Table {
  public:
    Table(std::string schema, std::vector<std::string> columns)
        : schema_(std::move(schema)), columns_(std::move(columns)) {}

    void row(std::vector<Cell> cells) { rows_.push_back(std::move(cells)); }

    void write(const fs::path& dir, const std::string& stem,
               const std::string& format) const {
        const fs::path path = dir / (stem + (format == "json" ? ".json" : ".csv"));
        std::ofstream out(path);
        if (!out) throw std::ios_base::failure("cannot write " + path.string());
        if (format == "json") {
            json arr = json::array();
            for (const auto& r : rows_) {
                json obj;
                for (std::size_t c = 0; c < columns_.size(); ++c) {
                    if (std::holds_alternative<double>(r[c]))
                        obj[columns_[c]] = std::get<double>(r[c]);
                    else
                        obj[columns_[c]] = std::get<std::string>(r[c]);
                }
                arr.push_back(obj);
            }
            out << json{{"schema", schema_}, {"rows", arr}}.dump(1) << "\n";
        } else {
            out << "# schema: " << schema_ << "\n";
            for (std::size_t c = 0; c < columns_.size(); ++c)
                out << columns_[c] << (c + 1 < columns_.size() ? "," : "\n");
            for (const auto& r : rows_) {
                for (std::size_t c = 0; c < r.size(); ++c) {
                    if (std::holds_alternative<double>(r[c]))
                        out << num(std::get<double>(r[c]));
                    else
                        out << std::get<std::string>(r[c]);
                    out << (c + 1 < r.size() ? "," : "\n");
                }
            }
        }
        if (!out) throw std::ios_base::failure("write failed: " + path.string());
    }

  private:
    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

void write_json(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path path = dir / name;
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << j.dump(1) << "\n";
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create output dir: " +
                                         dir.string());
    return dir;
}

GuidedModeSolution solve_for_line(const RunConfig& cfg,
                                  const std::string& line,
                                  AtomicSystem* sys_out = nullptr) {
    const AtomicSystem sys = AtomicSystem::load(cfg.resolve_atomic_data(line));
    if (sys_out) *sys_out = sys;
    GuidedModeSolution sol = solve_he11(cfg.fiber, sys.wavelength_nm);
    if (sol.multimode_warning)
        std::cerr << "warning: V = " << sol.v_number
                  << " supports higher-order modes; results describe the "
                     "fundamental mode only\n";
    return sol;
}

TrapSite trap_site(const RunConfig& cfg) {
    return {cfg.trap.r_over_a * cfg.fiber.radius_nm, 0.0};
}

IntegrationOptions integration_options(const RunConfig& cfg) {
    IntegrationOptions o;
    o.t_max = cfg.integration.t_max_gamma_s;
    o.dt = cfg.integration.dt_gamma_s;
    o.noise = cfg.integration.noise == "seeded" ? NoiseMode::seeded
                                                : NoiseMode::off;
    o.seed = cfg.integration.seed;
    o.stride = cfg.integration.stride;
    return o;
}

json coupling_json(const CouplingSet& cs) {
    return json{{"chi_H3", cs.chi[0][0]},
                {"chi_H4", cs.chi[0][1]},
                {"chi_V3", cs.chi[1][0]},
                {"chi_V4", cs.chi[1][1]},
                {"chi_J3", cs.chi_J3},
                {"delta_J3_rad_s", cs.delta_J3},
                {"A_J3_nm2", cs.area_J3},
                {"A_in_nm2", cs.area_in},
                {"A_N_nm2", cs.area_N},
                {"kappa_per_s", cs.kappa},
                {"gamma_s_per_s", cs.gamma_s},
                {"od_per_atom", cs.od_per_atom},
                {"chi_N", cs.chi_N},
                {"omega_magic_rad_s", cs.omega_magic},
                {"branch", cs.branch == MagicBranch::w4 ? "w4" : "w3"},
                {"photon_flux_per_s", cs.photon_flux}};
}

json rates_json(const RateSet& r) {
    return json{{"gamma_up_per_s", r.gamma_up},
                {"gamma_down_per_s", r.gamma_down},
                {"gamma_44_per_s", r.pump[1][1]},
                {"gamma_43_per_s", r.pump[1][0]},
                {"gamma_33_per_s", r.pump[0][0]},
                {"gamma_34_per_s", r.pump[0][1]},
                {"gamma_00_per_s", r.g00},
                {"gamma_03_per_s", r.g03},
                {"gamma_33_comp_per_s", r.g33},
                {"gamma_30_per_s", r.g30},
                {"gamma_11_per_s", r.g11},
                {"gamma_s_per_s", r.gamma_s}};
}

}  // namespace

int cmd_modes(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    AtomicSystem sys;
    const GuidedModeSolution sol = solve_for_line(cfg, cfg.probe.line, &sys);
    const double a = cfg.fiber.radius_nm;

    Table radial("modes_radial.v1", {"r_nm", "I_H", "I_V"});
    const int n_r = 400;
    for (int i = 0; i <= n_r; ++i) {
        const double r = (0.02 + (3.0 - 0.02) * i / n_r) * a;
        const double ih =
            sol.field(ModeBasis::quasilinear_H, 1, r, 0.0).cartesian()
                .squaredNorm();
        const double iv =
            sol.field(ModeBasis::quasilinear_V, 1, r, 0.0).cartesian()
                .squaredNorm();
        radial.row({r, ih, iv});
    }
    radial.write(dir, "modes_radial", cfg.output.format);

    Table grid("modes_grid.v1", {"x_nm", "y_nm", "I_H", "I_V"});
    const int n_g = 100;
    for (int iy = 0; iy <= n_g; ++iy) {
        for (int ix = 0; ix <= n_g; ++ix) {
            const double x = (-2.5 + 5.0 * ix / n_g) * a;
            const double y = (-2.5 + 5.0 * iy / n_g) * a;
            const double r = std::max(std::hypot(x, y), 1e-6 * a);
            const double phi = std::atan2(y, x);
            const double ih =
                sol.field(ModeBasis::quasilinear_H, 1, r, phi).cartesian()
                    .squaredNorm();
            const double iv =
                sol.field(ModeBasis::quasilinear_V, 1, r, phi).cartesian()
                    .squaredNorm();
            grid.row({x, y, ih, iv});
        }
    }
    grid.write(dir, "modes_grid", cfg.output.format);

    write_json(dir, "modes_summary.json",
               json{{"schema", "modes_summary.v1"},
                    {"wavelength_nm", sys.wavelength_nm},
                    {"beta0_per_nm", sol.beta0},
                    {"n_g", sol.n_g},
                    {"h_per_nm", sol.h_in},
                    {"q_per_nm", sol.q_out},
                    {"s", sol.s_param},
                    {"u0_per_nm", sol.u0},
                    {"v_number", sol.v_number},
                    {"multimode", sol.multimode_warning}});
    return 0;
}

int cmd_magic(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    AtomicSystem sys;
    const GuidedModeSolution sol = solve_for_line(cfg, "D1", &sys);
    const TrapSite site = trap_site(cfg);

    Table table("magic_scan.v1",
                {"phi_deg", "delta3_MHz", "delta4_MHz", "chi_J3", "error"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double deg = 0; deg < 180.0 - 1e-9; deg += cfg.scan.phi_step_deg) {
        QuantizationAxis axis;
        axis.varphi = deg * pi / 180.0;
        axis.theta = cfg.axis.theta_deg * pi / 180.0;
        try {
            const CouplingSet cs =
                coupling_set(sys, sol, axis, site, cfg.probe.branch,
                             cfg.probe.photon_flux_per_s,
                             cfg.probe.input_polarization);
            const MagicPair magic = magic_detunings(sys, sol, axis, site);
            table.row({deg, magic.detuning3 / (two_pi * 1e6),
                       magic.detuning4 / (two_pi * 1e6), cs.chi_J3,
                       std::string()});
        } catch (const Error& e) {
            table.row({deg, nan, nan, nan, std::string(e.what())});
        }
    }
    table.write(dir, "magic_scan", cfg.output.format);
    return 0;
}

int cmd_squeeze(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    AtomicSystem sys;
    const GuidedModeSolution sol = solve_for_line(cfg, "D1", &sys);
    const TrapSite site = trap_site(cfg);
    const IntegrationOptions opts = integration_options(cfg);
    const double n_atoms = cfg.trap.n_atoms();

    QuantizationAxis axis;
    axis.theta = cfg.axis.theta_deg * pi / 180.0;
    if (cfg.axis.mode == "optimize") {
        const AxisOptimum opt = optimize_axis(
            sys, sol, site, n_atoms, cfg.probe.branch,
            cfg.probe.photon_flux_per_s, opts, cfg.decoherence);
        axis.varphi = opt.varphi;
    } else {
        axis.varphi = cfg.axis.phi_deg * pi / 180.0;
    }

    const CouplingSet cs =
        coupling_set(sys, sol, axis, site, cfg.probe.branch,
                     cfg.probe.photon_flux_per_s, cfg.probe.input_polarization);
    RateSet rates = RateSet::zero(cs.gamma_s);
    if (cfg.decoherence)
        rates = scattering_rates(sys, sol, axis, site,
                                 cfg.probe.input_polarization, cs);
    const SqueezeTrajectory traj =
        integrate_moments(scs_initial(n_atoms), cs, rates, opts);
    const auto decomp = variance_decomposition(traj);

    Table table("squeeze_traj.v1",
                {"t_gamma_s", "N_C", "J1", "J3", "varJ3", "xi2_db",
                 "single_body", "two_body"});
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        table.row({s.t, s.N_C, s.J1, s.J3, s.varJ3,
                   -10.0 * std::log10(traj.xi2[i]), decomp[i].first,
                   decomp[i].second});
    }
    table.write(dir, "squeeze_traj", cfg.output.format);

    write_json(dir, "squeeze_summary.json",
               json{{"schema", "squeeze_summary.v1"},
                    {"peak_db", traj.peak_db},
                    {"t_peak_gamma_s", traj.t_peak},
                    {"phi_used_deg", axis.varphi * 180.0 / pi},
                    {"n_atoms", n_atoms},
                    {"decoherence", cfg.decoherence},
                    {"noise", cfg.integration.noise},
                    {"seed", cfg.integration.seed},
                    {"coupling_set", coupling_json(cs)},
                    {"rate_set", rates_json(rates)}});
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    AtomicSystem sys;
    const GuidedModeSolution sol = solve_for_line(cfg, "D1", &sys);
    const IntegrationOptions opts = integration_options(cfg);

    int max_threads = 0;
    if (const char* env = std::getenv("NANOFIBER_QSIM_THREADS"))
        max_threads = std::atoi(env);
    if (cfg.sweep.range.r_over_a_min < 1.5 && cfg.trap.allow_close)
        std::cerr << "warning: sweep includes radii below the 1.5a validity "
                     "limit\n";

    const auto rows =
        sweep(sys, sol, cfg.sweep.range, cfg.sweep.atom_numbers,
              cfg.probe.branch, cfg.probe.photon_flux_per_s, opts,
              cfg.decoherence, max_threads, cfg.trap.allow_close);

    Table table("sweep.v1",
                {"r_over_a", "N_A", "phi_opt_deg", "od_per_atom",
                 "delta_magic_MHz", "peak_db", "t_peak", "status"});
    for (const auto& r : rows)
        table.row({r.r_over_a, r.n_atoms, r.phi_opt_deg, r.od_per_atom,
                   r.delta_magic_mhz, r.peak_db, r.t_peak, r.status});
    table.write(dir, "sweep", cfg.output.format);
    return 0;
}

int cmd_atom_number(const RunConfig& cfg) {
    const fs::path dir = ensure_out_dir(cfg);
    AtomicSystem sys;
    const GuidedModeSolution sol =
        solve_for_line(cfg, cfg.atom_number.line, &sys);
    const TrapSite site = trap_site(cfg);
    const AtomNumberResult res = atom_number_resolution(
        sys, sol, site, two_pi * cfg.atom_number.detuning_hz);
    write_json(dir, "atom_number.json",
               json{{"schema", "atom_number.v1"},
                    {"line", cfg.atom_number.line},
                    {"probe_detuning_hz", cfg.atom_number.detuning_hz},
                    {"chi_N", res.chi_N},
                    {"A_N_nm2", res.area_N},
                    {"delta_N_A", res.delta_N_A}});
    return 0;
}

}  // namespace nanofiber::cli
