#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nanofiber/atom.hpp"
#include "nanofiber/fiber.hpp"

namespace testsup {

inline double rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline const nlohmann::json& golden() {
    static const nlohmann::json j = [] {
        std::ifstream in(std::string(NANOFIBER_GOLDEN_DIR) +
                         "/reference.json");
        nlohmann::json out;
        in >> out;
        return out;
    }();
    return j;
}

inline double gold(const char* section, const char* key) {
    return std::stod(golden().at(section).at(key).get<std::string>());
}

inline const nanofiber::FiberSpec& reference_fiber() {
    static const nanofiber::FiberSpec spec{225.0, 1.4469, 1.0};
    return spec;
}

inline const nanofiber::AtomicSystem& d1() {
    static const auto sys = nanofiber::AtomicSystem::load(
        std::string(NANOFIBER_DATA_DIR) + "/cesium_d1.json");
    return sys;
}

inline const nanofiber::AtomicSystem& d2() {
    static const auto sys = nanofiber::AtomicSystem::load(
        std::string(NANOFIBER_DATA_DIR) + "/cesium_d2.json");
    return sys;
}

inline const nanofiber::GuidedModeSolution& d1_solution() {
    static const auto sol =
        nanofiber::solve_he11(reference_fiber(), d1().wavelength_nm);
    return sol;
}

inline const nanofiber::GuidedModeSolution& d2_solution() {
    static const auto sol =
        nanofiber::solve_he11(reference_fiber(), d2().wavelength_nm);
    return sol;
}

}  // namespace testsup
