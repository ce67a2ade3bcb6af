#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "dpbound/catalog.hpp"

namespace dpbound {

namespace {

std::string num(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

// Pixel geometry of the SVG plot.
struct Frame {
    double width = 720, height = 540;
    double left = 80, right = 30, top = 48, bottom = 64;
    double x_lo, x_hi; // log10 of data range
    double y_lo, y_hi;

    double x(double v) const {
        double f = (std::log10(v) - x_lo) / (x_hi - x_lo);
        return left + f * (width - left - right);
    }
    double y(double v) const {
        double f = (std::log10(v) - y_lo) / (y_hi - y_lo);
        return height - bottom - f * (height - top - bottom);
    }
};

std::string exp_label(int e) { return "1e" + std::to_string(e); }

void svg_line(std::ostream& out, double x1, double y1, double x2, double y2,
              const std::string& style) {
    out << "  <line x1=\"" << num(x1, "%.2f") << "\" y1=\"" << num(y1, "%.2f")
        << "\" x2=\"" << num(x2, "%.2f") << "\" y2=\"" << num(y2, "%.2f")
        << "\" " << style << "/>\n";
}

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void svg_text(std::ostream& out, double x, double y, const std::string& text,
              const std::string& attrs = "", int font_size = 12) {
    out << "  <text x=\"" << num(x, "%.2f") << "\" y=\"" << num(y, "%.2f")
        << "\" font-family=\"sans-serif\" font-size=\"" << font_size << "\" "
        << attrs << ">" << xml_escape(text) << "</text>\n";
}

} // namespace

void write_dataset_csv(const ExclusionDataset& dataset, std::ostream& out) {
    out << "# exclusion dataset, model = " << to_string(dataset.model)
        << "\n";
    out << "# length_range_m = " << num(dataset.length_range.first) << ","
        << num(dataset.length_range.second) << "\n";
    out << "# section: model-curve\n";
    out << "# columns: length_m,specific_power_w_per_kg\n";
    for (const auto& [length, power] : dataset.model_curve)
        out << num(length) << "," << num(power) << "\n";
    for (const auto& limit : dataset.limit_lines) {
        out << "# section: limit " << limit.label << "\n";
        out << "# columns: specific_power_w_per_kg\n";
        out << num(limit.power) << "\n";
    }
    for (const auto& marker : dataset.marker_lines) {
        out << "# section: marker " << marker.label << "\n";
        out << "# columns: length_m\n";
        out << num(marker.length) << "\n";
    }
}

void write_dataset_svg(const ExclusionDataset& dataset, std::ostream& out) {
    Frame fr;
    fr.x_lo = std::log10(dataset.length_range.first);
    fr.x_hi = std::log10(dataset.length_range.second);

    double pmin = dataset.model_curve.empty()
                      ? 1e-12
                      : dataset.model_curve.back().second;
    double pmax = dataset.model_curve.empty()
                      ? 1.0
                      : dataset.model_curve.front().second;
    for (const auto& limit : dataset.limit_lines) {
        pmin = std::min(pmin, limit.power);
        pmax = std::max(pmax, limit.power);
    }
    fr.y_lo = std::floor(std::log10(pmin));
    fr.y_hi = std::ceil(std::log10(pmax));
    if (fr.y_hi <= fr.y_lo) fr.y_hi = fr.y_lo + 1;

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width
        << "\" height=\"" << fr.height << "\" viewBox=\"0 0 " << fr.width
        << " " << fr.height << "\">\n";
    out << "  <rect width=\"" << fr.width << "\" height=\"" << fr.height
        << "\" fill=\"white\"/>\n";

    svg_text(out, fr.left, fr.top - 18,
             std::string(to_string(dataset.model)) +
                 " model: specific heating power vs length parameter",
             "", 14);

    // frame
    out << "  <rect x=\"" << fr.left << "\" y=\"" << fr.top << "\" width=\""
        << fr.width - fr.left - fr.right << "\" height=\""
        << fr.height - fr.top - fr.bottom
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const std::string grid = "stroke=\"#cccccc\" stroke-width=\"0.5\"";
    double y0 = fr.height - fr.bottom, y1 = fr.top;
    for (int e = static_cast<int>(std::ceil(fr.x_lo));
         e <= static_cast<int>(std::floor(fr.x_hi)); ++e) {
        double px = fr.x(std::pow(10.0, e));
        svg_line(out, px, y0, px, y1, grid);
        svg_text(out, px - 14, y0 + 16, exp_label(e));
    }
    for (int e = static_cast<int>(std::ceil(fr.y_lo));
         e <= static_cast<int>(std::floor(fr.y_hi)); ++e) {
        double py = fr.y(std::pow(10.0, e));
        svg_line(out, fr.left, py, fr.width - fr.right, py, grid);
        svg_text(out, 8, py + 4, exp_label(e));
    }
    svg_text(out, fr.width / 2 - 60, fr.height - 16, "length parameter [m]");
    out << "  <text x=\"16\" y=\"" << (fr.height / 2 + 60)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 "
        << (fr.height / 2 + 60) << ")\">specific power [W/kg]</text>\n";

    if (!dataset.model_curve.empty()) {
        out << "  <polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\""
               " points=\"";
        for (const auto& [length, power] : dataset.model_curve)
            out << num(fr.x(length), "%.2f") << ","
                << num(fr.y(power), "%.2f") << " ";
        out << "\"/>\n";
    }

    for (const auto& limit : dataset.limit_lines) {
        double py = fr.y(limit.power);
        svg_line(out, fr.left, py, fr.width - fr.right, py,
                 "stroke=\"blue\" stroke-width=\"1.5\"");
        svg_text(out, fr.left + 6, py - 4, limit.label,
                 "fill=\"blue\"");
    }
    for (const auto& marker : dataset.marker_lines) {
        double px = fr.x(marker.length);
        svg_line(out, px, y0, px, y1,
                 "stroke=\"black\" stroke-width=\"1.5\" "
                 "stroke-dasharray=\"6 4\"");
        svg_text(out, px + 4, fr.top + 14, marker.label);
    }
    out << "</svg>\n";
}

} // namespace dpbound
