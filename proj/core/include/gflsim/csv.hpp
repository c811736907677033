#pragma once

#include "gflsim/simulator.hpp"

#include <cstddef>
#include <filesystem>
#include <ostream>

namespace gflsim {

/// Writes the fixed-schema CSV: one header row, then one row per record,
/// every value in scientific notation with 17 significant digits (bit-exact
/// round trip), LF line endings, '.' decimal point regardless of locale.
/// Returns the number of bytes written.
std::size_t write_csv(const std::vector<TimeSeriesRecord>& records, std::ostream& os);
std::size_t write_csv(const std::vector<TimeSeriesRecord>& records,
                      const std::filesystem::path& destination);

}  // namespace gflsim
