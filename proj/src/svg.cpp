#include "modal/svg.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace modal {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

constexpr double kCanvas = 640.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_scatter_svg(const std::string& path, const std::vector<Vec>& points,
                       const std::vector<int>& labels, const ScatterOptions& opt) {
    require(points.size() == labels.size(), "write_scatter_svg: size mismatch");
    require(opt.limit > 0.0, "write_scatter_svg: limit must be positive");
    require(opt.highlight.empty() || opt.highlight.size() == points.size(),
            "write_scatter_svg: highlight size mismatch");

    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);

    const double scale = kCanvas / (2.0 * opt.limit);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kCanvas
        << " " << kCanvas << "\">\n";
    out << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas
        << "\" fill=\"#ffffff\"/>\n";
    // axes through the origin
    out << "<line x1=\"0\" y1=\"" << kCanvas / 2.0 << "\" x2=\"" << kCanvas
        << "\" y2=\"" << kCanvas / 2.0 << "\" stroke=\"#dddddd\"/>\n";
    out << "<line x1=\"" << kCanvas / 2.0 << "\" y1=\"0\" x2=\"" << kCanvas / 2.0
        << "\" y2=\"" << kCanvas << "\" stroke=\"#dddddd\"/>\n";
    if (!opt.title.empty()) {
        out << "<text x=\"12\" y=\"24\" font-family=\"sans-serif\" font-size=\"18\" "
               "fill=\"#333333\">"
            << opt.title << "</text>\n";
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].size() >= 2, "write_scatter_svg: need >= 2 coordinates");
        const double x = points[i][0];
        const double y = points[i][1];
        if (x < -opt.limit || x > opt.limit || y < -opt.limit || y > opt.limit) {
            continue;  // fixed window; out-of-range points are dropped
        }
        const double px = (x + opt.limit) * scale;
        const double py = kCanvas - (y + opt.limit) * scale;
        const char* color = "#7f7f7f";
        if (!opt.highlight.empty() && opt.highlight[i]) {
            color = "#e41a1c";
        } else if (labels[i] >= 0) {
            color = kPalette[static_cast<std::size_t>(labels[i]) % kPalette.size()];
        }
        out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\""
            << fmt(opt.point_radius) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.6\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace modal
