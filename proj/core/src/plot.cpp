#include "gflsim/plot.hpp"

#include "gflsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace gflsim {

namespace {

constexpr int kPanelWidth = 820;
constexpr int kPanelHeight = 150;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kPanelGap = 46;
constexpr int kMarginTop = 24;
constexpr int kMarginBottom = 30;
constexpr std::size_t kMaxPoints = 4000;

void fmt_fixed(std::string& out, double v, int precision) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    out.append(buf, res.ptr);
}

void fmt_short(std::string& out, double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    out.append(buf, res.ptr);
}

}  // namespace

void emit_plot(const std::vector<TimeSeriesRecord>& records,
               const std::vector<std::string>& signals,
               const std::filesystem::path& destination) {
    if (records.empty()) {
        throw ValidationError("emit_plot: record sequence must be non-empty");
    }
    if (signals.empty()) {
        throw ValidationError("emit_plot: at least one signal is required");
    }
    std::vector<int> cols;
    cols.reserve(signals.size());
    for (const std::string& name : signals) {
        cols.push_back(TimeSeriesRecord::column_of(name));  // throws UnknownSignalError
    }

    const std::size_t stride = std::max<std::size_t>(1, (records.size() + kMaxPoints - 1) / kMaxPoints);
    const double t0 = records.front()[column::time_s];
    const double t1 = records.back()[column::time_s];
    const double t_span = (t1 > t0) ? (t1 - t0) : 1.0;

    const int total_width = kMarginLeft + kPanelWidth + kMarginRight;
    const int total_height =
        kMarginTop + static_cast<int>(cols.size()) * (kPanelHeight + kPanelGap) + kMarginBottom;

    std::string svg;
    svg.reserve(records.size() / stride * 16 * cols.size() + 4096);
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
    svg += std::to_string(total_width);
    svg += "\" height=\"";
    svg += std::to_string(total_height);
    svg += "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t p = 0; p < cols.size(); ++p) {
        const int c = cols[p];
        const int top = kMarginTop + static_cast<int>(p) * (kPanelHeight + kPanelGap);

        double lo = records.front()[c];
        double hi = lo;
        for (const auto& rec : records) {
            lo = std::min(lo, rec[c]);
            hi = std::max(hi, rec[c]);
        }
        if (!(hi > lo)) {
            const double pad = std::max(0.5, std::abs(hi) * 0.1);
            lo -= pad;
            hi += pad;
        }

        svg += "<text x=\"";
        svg += std::to_string(kMarginLeft);
        svg += "\" y=\"";
        svg += std::to_string(top - 6);
        svg += "\">";
        svg += signals[p];
        svg += "</text>\n";

        svg += "<rect x=\"";
        svg += std::to_string(kMarginLeft);
        svg += "\" y=\"";
        svg += std::to_string(top);
        svg += "\" width=\"";
        svg += std::to_string(kPanelWidth);
        svg += "\" height=\"";
        svg += std::to_string(kPanelHeight);
        svg += "\" fill=\"none\" stroke=\"#888\"/>\n";

        // y-axis extremes
        svg += "<text x=\"4\" y=\"";
        svg += std::to_string(top + 12);
        svg += "\">";
        fmt_short(svg, hi);
        svg += "</text>\n<text x=\"4\" y=\"";
        svg += std::to_string(top + kPanelHeight);
        svg += "\">";
        fmt_short(svg, lo);
        svg += "</text>\n";

        svg += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < records.size(); i += stride) {
            const auto& rec = records[i];
            const double xf = kMarginLeft +
                              kPanelWidth * ((rec[column::time_s] - t0) / t_span);
            const double yf = top + kPanelHeight * (1.0 - (rec[c] - lo) / (hi - lo));
            fmt_fixed(svg, xf, 2);
            svg.push_back(',');
            fmt_fixed(svg, yf, 2);
            svg.push_back(' ');
        }
        svg += "\"/>\n";
    }

    // shared time axis labels under the last panel
    const int axis_y = total_height - 10;
    svg += "<text x=\"";
    svg += std::to_string(kMarginLeft);
    svg += "\" y=\"";
    svg += std::to_string(axis_y);
    svg += "\">t = ";
    fmt_short(svg, t0);
    svg += " s</text>\n<text x=\"";
    svg += std::to_string(kMarginLeft + kPanelWidth - 120);
    svg += "\" y=\"";
    svg += std::to_string(axis_y);
    svg += "\">t = ";
    fmt_short(svg, t1);
    svg += " s</text>\n</svg>\n";

    std::ofstream os(destination, std::ios::binary);
    if (!os) {
        throw IoError("emit_plot: cannot open '" + destination.string() + "'");
    }
    os.write(svg.data(), static_cast<std::streamsize>(svg.size()));
    if (!os) {
        throw IoError("emit_plot: write failed");
    }
}

}  // namespace gflsim
