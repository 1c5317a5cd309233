#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "config.hpp"
#include "nanofiber/errors.hpp"

int main(int argc, char** argv) {
    using namespace nanofiber;

    CLI::App app{"Dispersive atom-light interface of a cold-atom optical "
                 "nanofiber: guided modes, QND measurement strength and "
                 "spin-squeezing dynamics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, format;
    bool no_decoherence = false;

    app.add_option("--config", config_path, "Configuration file (JSON)");
    app.add_option("--set", overrides,
                   "Override a config entry, e.g. --set trap.r_over_a=2.0");
    app.add_option("--seed", seed, "Noise seed (implies seeded noise)");
    app.add_flag("--no-decoherence", no_decoherence,
                 "Disable the optical pumping rates");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Output table format: csv or json");

    auto* modes = app.add_subcommand("modes", "Mode intensities and dispersion");
    auto* magic = app.add_subcommand(
        "magic", "Magic detunings and coupling strength vs axis angle");
    auto* squeeze =
        app.add_subcommand("squeeze", "Squeezing dynamics for one setup");
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Peak squeezing vs trap distance and atom number");
    auto* atom_number = app.add_subcommand(
        "atom-number", "Dispersive atom-number measurement resolution");

    CLI11_PARSE(app, argc, argv);

    try {
        cli::RunConfig cfg = cli::load_config(config_path, overrides);
        if (seed) {
            cfg.integration.seed = *seed;
            cfg.integration.noise = "seeded";
        }
        if (no_decoherence) cfg.decoherence = false;
        if (out_dir) cfg.output.dir = *out_dir;
        if (format) {
            if (*format != "csv" && *format != "json")
                throw cli::ConfigError({"--format: must be csv or json"});
            cfg.output.format = *format;
        }

        if (modes->parsed()) return cli::cmd_modes(cfg);
        if (magic->parsed()) return cli::cmd_magic(cfg);
        if (squeeze->parsed()) return cli::cmd_squeeze(cfg);
        if (sweep_cmd->parsed()) return cli::cmd_sweep(cfg);
        if (atom_number->parsed()) return cli::cmd_atom_number(cfg);
        return 2;
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& issue : e.issues) std::cerr << "  - " << issue << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
