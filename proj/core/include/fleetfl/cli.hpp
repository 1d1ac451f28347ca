#pragma once

#include <cstdint>
#include <optional>
#include <ostream>

#include "fleetfl/config.hpp"

namespace fleetfl::cli {

/// Seed precedence: --seed, then FLEETFL_SEED, then the config file.
/// Throws Error when FLEETFL_SEED is set but not an unsigned integer.
std::uint64_t resolve_seed(const ScenarioConfig& cfg, std::optional<std::uint64_t> flag);

/// Subcommands: simulate, gen-traces, report, validate. Returns the process
/// exit status; usage errors and invalid configs are nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fleetfl::cli
