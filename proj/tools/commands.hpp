#pragma once

#include "config.hpp"

namespace nanofiber::cli {

int cmd_modes(const RunConfig& cfg);
int cmd_magic(const RunConfig& cfg);
int cmd_squeeze(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_atom_number(const RunConfig& cfg);

}  // namespace nanofiber::cli
