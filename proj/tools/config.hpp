#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nanofiber/fiber.hpp"
#include "nanofiber/squeeze.hpp"

namespace nanofiber::cli {

/// Consolidated validation failure: one message per offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> issues);
    std::vector<std::string> issues;
};

struct RunConfig {
    FiberSpec fiber;

    // Paths to the atomic data files, keyed by line name.
    std::map<std::string, std::string> atomic_data;

    struct Trap {
        double r_over_a = 1.8;
        double n_site_0 = 1250;
        double n_site_pi = 1250;
        bool allow_close = false;
        double n_atoms() const { return n_site_0 + n_site_pi; }
    } trap;

    struct Probe {
        std::string line = "D1";
        MagicBranch branch = MagicBranch::w4;
        double photon_flux_per_s = 1e6;
        InputPolarization input_polarization = InputPolarization::plus45;
    } probe;

    struct Axis {
        std::string mode = "optimize";  // "optimize" | "fixed"
        double phi_deg = 90.0;
        double theta_deg = 90.0;  // full-sphere scans only
    } axis;

    struct Integration {
        double t_max_gamma_s = 6.0;
        double dt_gamma_s = 5e-4;
        std::string noise = "off";  // "off" | "seeded"
        std::uint64_t seed = 1234;
        int stride = 20;
    } integration;

    struct Scan {
        double phi_step_deg = 2.0;
    } scan;

    struct Sweep {
        SweepRange range;
        std::vector<double> atom_numbers = {500, 1000, 2500};
    } sweep;

    struct AtomNumber {
        std::string line = "D2";
        double detuning_hz = 3.0e9;
    } atom_number;

    struct Output {
        std::string dir = "out";
        std::string format = "csv";  // "csv" | "json"
    } output;

    bool decoherence = true;

    /// Directory of the config file, used to resolve relative data paths.
    std::string base_dir = ".";

    /// Resolve the atomic data file for a line, trying the path as given and
    /// then relative to the config file location.
    std::string resolve_atomic_data(const std::string& line) const;
};

/// Defaults -> optional config file -> --set overrides, then validation.
/// Throws ConfigError with the full list of problems.
RunConfig load_config(const std::optional<std::string>& config_path,
                      const std::vector<std::string>& overrides);

}  // namespace nanofiber::cli
