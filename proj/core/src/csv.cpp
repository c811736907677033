#include "gflsim/csv.hpp"

#include "gflsim/errors.hpp"

#include <charconv>
#include <fstream>
#include <string>

namespace gflsim {

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    out.append(buf, res.ptr);
}

}  // namespace

std::size_t write_csv(const std::vector<TimeSeriesRecord>& records, std::ostream& os) {
    if (records.empty()) {
        throw ValidationError("write_csv: record sequence must be non-empty");
    }
    std::string out;
    out.reserve(records.size() * column::count * 25 + 512);

    const auto& names = TimeSeriesRecord::column_names();
    for (int k = 0; k < column::count; ++k) {
        if (k) out.push_back(',');
        out.append(names[static_cast<std::size_t>(k)]);
    }
    out.push_back('\n');

    for (const TimeSeriesRecord& rec : records) {
        for (int k = 0; k < column::count; ++k) {
            if (k) out.push_back(',');
            append_number(out, rec.values[static_cast<std::size_t>(k)]);
        }
        out.push_back('\n');
    }

    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) {
        throw IoError("write_csv: stream write failed");
    }
    return out.size();
}

std::size_t write_csv(const std::vector<TimeSeriesRecord>& records,
                      const std::filesystem::path& destination) {
    std::ofstream os(destination, std::ios::binary);
    if (!os) {
        throw IoError("write_csv: cannot open '" + destination.string() + "'");
    }
    return write_csv(records, os);
}

}  // namespace gflsim
