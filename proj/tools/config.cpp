#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace nanofiber::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> issues_in)
    : std::runtime_error("configuration invalid (" +
                         std::to_string(issues_in.size()) + " issue(s))"),
      issues(std::move(issues_in)) {}

namespace {

json default_config() {
    return json{
        {"fiber", {{"radius_nm", 225.0}, {"n1", 1.4469}, {"n2", 1.0}}},
        {"atomic_data",
         {{"D1", "core/data/cesium_d1.json"},
          {"D2", "core/data/cesium_d2.json"}}},
        {"trap",
         {{"r_over_a", 1.8},
          {"n_site_0", 1250.0},
          {"n_site_pi", 1250.0},
          {"allow_close", false}}},
        {"probe",
         {{"line", "D1"},
          {"branch", "w4"},
          {"photon_flux_per_s", 1e6},
          {"input_polarization", "plus45"}}},
        {"axis",
         {{"mode", "optimize"}, {"phi_deg", 90.0}, {"theta_deg", 90.0}}},
        {"integration",
         {{"t_max_gamma_s", 6.0},
          {"dt_gamma_s", 5e-4},
          {"noise", "off"},
          {"seed", 1234},
          {"stride", 20}}},
        {"scan", {{"phi_step_deg", 2.0}}},
        {"sweep",
         {{"r_over_a_min", 1.5},
          {"r_over_a_max", 2.5},
          {"r_over_a_step", 0.1},
          {"atom_numbers", {500.0, 1000.0, 2500.0}}}},
        {"atom_number", {{"line", "D2"}, {"detuning_hz", 3.0e9}}},
        {"output", {{"dir", "out"}, {"format", "csv"}}},
    };
}

void deep_merge(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()))
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

// --set a.b.c=value ; value parsed as JSON when possible, else as string.
void apply_override(json& cfg, const std::string& spec,
                    std::vector<std::string>& issues) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        issues.push_back("--set '" + spec + "': expected key=value");
        return;
    }
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &cfg;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    if (path.empty()) {
        issues.push_back("--set '" + spec + "': empty key");
        return;
    }
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        node = &((*node)[path[i]]);
    (*node)[path.back()] = value;
}

template <typename T>
T get_checked(const json& j, const std::string& path, T fallback,
              std::vector<std::string>& issues) {
    const json* node = &j;
    std::stringstream parts(path);
    std::string part;
    while (std::getline(parts, part, '.')) {
        if (!node->is_object() || !node->contains(part)) return fallback;
        node = &(*node)[part];
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        issues.push_back(path + ": wrong type");
        return fallback;
    }
}

}  // namespace

std::string RunConfig::resolve_atomic_data(const std::string& line) const {
    auto it = atomic_data.find(line);
    if (it == atomic_data.end())
        throw ConfigError({"atomic_data." + line + ": no data file configured"});
    const fs::path given(it->second);
    if (fs::exists(given)) return given.string();
    const fs::path relative = fs::path(base_dir) / given;
    if (fs::exists(relative)) return relative.string();
    throw ConfigError({"atomic_data." + line + ": file not found: " +
                       it->second});
}

RunConfig load_config(const std::optional<std::string>& config_path,
                      const std::vector<std::string>& overrides) {
    std::vector<std::string> issues;
    json cfg = default_config();
    std::string base_dir = ".";
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) throw ConfigError({"config file not found: " + *config_path});
        json file_cfg;
        try {
            in >> file_cfg;
        } catch (const json::parse_error& e) {
            throw ConfigError({std::string("config parse error: ") + e.what()});
        }
        deep_merge(cfg, file_cfg);
        base_dir = fs::path(*config_path).parent_path().string();
        if (base_dir.empty()) base_dir = ".";
    }
    for (const auto& o : overrides) apply_override(cfg, o, issues);

    RunConfig rc;
    rc.base_dir = base_dir;
    rc.fiber.radius_nm = get_checked(cfg, "fiber.radius_nm", 225.0, issues);
    rc.fiber.n1 = get_checked(cfg, "fiber.n1", 1.4469, issues);
    rc.fiber.n2 = get_checked(cfg, "fiber.n2", 1.0, issues);
    if (cfg.contains("atomic_data") && cfg["atomic_data"].is_object()) {
        for (auto it = cfg["atomic_data"].begin();
             it != cfg["atomic_data"].end(); ++it)
            rc.atomic_data[it.key()] = it.value().get<std::string>();
    }
    rc.trap.r_over_a = get_checked(cfg, "trap.r_over_a", 1.8, issues);
    rc.trap.n_site_0 = get_checked(cfg, "trap.n_site_0", 1250.0, issues);
    rc.trap.n_site_pi = get_checked(cfg, "trap.n_site_pi", 1250.0, issues);
    rc.trap.allow_close = get_checked(cfg, "trap.allow_close", false, issues);
    rc.probe.line = get_checked<std::string>(cfg, "probe.line", "D1", issues);
    const auto branch =
        get_checked<std::string>(cfg, "probe.branch", "w4", issues);
    if (branch == "w4")
        rc.probe.branch = MagicBranch::w4;
    else if (branch == "w3")
        rc.probe.branch = MagicBranch::w3;
    else
        issues.push_back("probe.branch: must be \"w3\" or \"w4\"");
    rc.probe.photon_flux_per_s =
        get_checked(cfg, "probe.photon_flux_per_s", 1e6, issues);
    const auto pol = get_checked<std::string>(cfg, "probe.input_polarization",
                                              "plus45", issues);
    if (pol == "H")
        rc.probe.input_polarization = InputPolarization::H;
    else if (pol == "V")
        rc.probe.input_polarization = InputPolarization::V;
    else if (pol == "plus45")
        rc.probe.input_polarization = InputPolarization::plus45;
    else
        issues.push_back("probe.input_polarization: must be H, V or plus45");
    rc.axis.mode = get_checked<std::string>(cfg, "axis.mode", "optimize", issues);
    rc.axis.phi_deg = get_checked(cfg, "axis.phi_deg", 90.0, issues);
    rc.axis.theta_deg = get_checked(cfg, "axis.theta_deg", 90.0, issues);
    rc.integration.t_max_gamma_s =
        get_checked(cfg, "integration.t_max_gamma_s", 6.0, issues);
    rc.integration.dt_gamma_s =
        get_checked(cfg, "integration.dt_gamma_s", 5e-4, issues);
    rc.integration.noise =
        get_checked<std::string>(cfg, "integration.noise", "off", issues);
    rc.integration.seed =
        get_checked<std::uint64_t>(cfg, "integration.seed", 1234, issues);
    rc.integration.stride = get_checked(cfg, "integration.stride", 20, issues);
    rc.scan.phi_step_deg = get_checked(cfg, "scan.phi_step_deg", 2.0, issues);
    rc.sweep.range.r_over_a_min =
        get_checked(cfg, "sweep.r_over_a_min", 1.5, issues);
    rc.sweep.range.r_over_a_max =
        get_checked(cfg, "sweep.r_over_a_max", 2.5, issues);
    rc.sweep.range.r_over_a_step =
        get_checked(cfg, "sweep.r_over_a_step", 0.1, issues);
    rc.sweep.atom_numbers = get_checked<std::vector<double>>(
        cfg, "sweep.atom_numbers", {500, 1000, 2500}, issues);
    rc.atom_number.line =
        get_checked<std::string>(cfg, "atom_number.line", "D2", issues);
    rc.atom_number.detuning_hz =
        get_checked(cfg, "atom_number.detuning_hz", 3.0e9, issues);
    rc.output.dir = get_checked<std::string>(cfg, "output.dir", "out", issues);
    rc.output.format =
        get_checked<std::string>(cfg, "output.format", "csv", issues);

    // Fail-fast validation: collect everything before reporting.
    if (!(rc.fiber.radius_nm > 0)) issues.push_back("fiber.radius_nm: must be > 0");
    if (!(rc.fiber.n1 > rc.fiber.n2 && rc.fiber.n2 >= 1))
        issues.push_back("fiber.n1/n2: need n1 > n2 >= 1");
    if (rc.trap.r_over_a < 1.0)
        issues.push_back("trap.r_over_a: atom inside the fiber (< 1)");
    else if (rc.trap.r_over_a < 1.5 && !rc.trap.allow_close)
        issues.push_back(
            "trap.r_over_a: below 1.5 the optical pumping model is outside "
            "its validity range; set trap.allow_close=true to override");
    if (rc.trap.n_site_0 < 0 || rc.trap.n_site_pi < 0)
        issues.push_back("trap.n_site_0/pi: negative atom number");
    if (rc.trap.n_atoms() < 1) issues.push_back("trap: no atoms");
    if (!(rc.probe.photon_flux_per_s > 0))
        issues.push_back("probe.photon_flux_per_s: must be > 0");
    if (rc.probe.line != "D1" && rc.probe.line != "D2")
        issues.push_back("probe.line: must be D1 or D2");
    if (rc.axis.mode != "optimize" && rc.axis.mode != "fixed")
        issues.push_back("axis.mode: must be \"optimize\" or \"fixed\"");
    if (!(rc.integration.t_max_gamma_s > 0))
        issues.push_back("integration.t_max_gamma_s: must be > 0");
    if (!(rc.integration.dt_gamma_s > 0))
        issues.push_back("integration.dt_gamma_s: must be > 0");
    if (rc.integration.noise != "off" && rc.integration.noise != "seeded")
        issues.push_back("integration.noise: must be \"off\" or \"seeded\"");
    if (rc.integration.stride < 1)
        issues.push_back("integration.stride: must be >= 1");
    if (!(rc.scan.phi_step_deg > 0))
        issues.push_back("scan.phi_step_deg: must be > 0");
    if (!(rc.sweep.range.r_over_a_step > 0))
        issues.push_back("sweep.r_over_a_step: must be > 0");
    if (rc.sweep.range.r_over_a_max < rc.sweep.range.r_over_a_min)
        issues.push_back("sweep.r_over_a_max: below r_over_a_min");
    if (rc.sweep.range.r_over_a_min < 1.0)
        issues.push_back("sweep.r_over_a_min: atom inside the fiber (< 1)");
    else if (rc.sweep.range.r_over_a_min < 1.5 && !rc.trap.allow_close)
        issues.push_back(
            "sweep.r_over_a_min: below 1.5 requires trap.allow_close=true");
    for (double na : rc.sweep.atom_numbers)
        if (!(na >= 1)) issues.push_back("sweep.atom_numbers: entries must be >= 1");
    if (rc.atom_number.line != "D1" && rc.atom_number.line != "D2")
        issues.push_back("atom_number.line: must be D1 or D2");
    if (rc.output.format != "csv" && rc.output.format != "json")
        issues.push_back("output.format: must be \"csv\" or \"json\"");

    if (!issues.empty()) throw ConfigError(std::move(issues));
    return rc;
}

}  // namespace nanofiber::cli
