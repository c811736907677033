#pragma once

#include "gflsim/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gflsim {

/// Renders the requested signals versus time as a stacked-panel SVG, one
/// panel per signal. Output bytes are deterministic for identical inputs.
/// Throws UnknownSignalError for names outside the CSV schema.
void emit_plot(const std::vector<TimeSeriesRecord>& records,
               const std::vector<std::string>& signals,
               const std::filesystem::path& destination);

}  // namespace gflsim
