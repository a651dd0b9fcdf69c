#include "spermmorph/overlay.hpp"

#include <cmath>
#include <cstdio>

#include "spermmorph/png_io.hpp"

namespace spermmorph {

std::string base64_encode(std::span<const std::uint8_t> data) {
    static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < data.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{data[i]} << 16) | (std::uint32_t{data[i + 1]} << 8) | data[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < data.size()) {
        std::uint32_t v = std::uint32_t{data[i]} << 16;
        if (i + 1 < data.size()) v |= std::uint32_t{data[i + 1]} << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < data.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string point_list(const std::vector<CenterPoint>& pts) {
    std::string s;
    for (const auto& p : pts) {
        if (!s.empty()) s += ' ';
        s += num(p.position.x) + "," + num(p.position.y);
    }
    return s;
}

void draw_line(std::string& svg, const Centerline& line, const char* stroke, const OverlayOptions& opt) {
    svg += "  <polyline class=\"centerline\" fill=\"none\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"0.6\" points=\"" + point_list(line.points) + "\"/>\n";
    for (std::size_t i = 0; i < line.points.size(); ++i) {
        const CenterPoint& p = line.points[i];
        if (opt.normal_every > 0 && i % static_cast<std::size_t>(opt.normal_every) == 0) {
            const Vec2 a = p.position - p.normal * (0.5 * opt.normal_length);
            const Vec2 b = p.position + p.normal * (0.5 * opt.normal_length);
            svg += "  <line class=\"normal\" x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" + num(b.x) +
                   "\" y2=\"" + num(b.y) + "\" stroke=\"#ffd700\" stroke-width=\"0.3\"/>\n";
        }
        if (p.source == PointSource::Detected) {
            svg += "  <circle class=\"detected\" cx=\"" + num(p.position.x) + "\" cy=\"" + num(p.position.y) +
                   "\" r=\"0.35\" fill=\"#00c853\"/>\n";
        } else {
            svg += "  <rect class=\"reconstructed\" x=\"" + num(p.position.x - 0.4) + "\" y=\"" +
                   num(p.position.y - 0.4) + "\" width=\"0.8\" height=\"0.8\" fill=\"#ff00ff\"/>\n";
        }
    }
}

void draw_trimmed(std::string& svg, const std::vector<EndpointVerdict>& verdicts) {
    for (const auto& v : verdicts) {
        if (v.kept) continue;
        const Vec2 p = v.point.position;
        svg += "  <path class=\"trimmed\" d=\"M" + num(p.x - 0.5) + "," + num(p.y - 0.5) + " L" + num(p.x + 0.5) +
               "," + num(p.y + 0.5) + " M" + num(p.x - 0.5) + "," + num(p.y + 0.5) + " L" + num(p.x + 0.5) + "," +
               num(p.y - 0.5) + "\" stroke=\"#ff1744\" stroke-width=\"0.3\"/>\n";
    }
}

}  // namespace

std::string render_overlay_svg(const ScalarImage& img, const std::vector<OverlayItem>& items,
                               const OverlayOptions& opt) {
    const int w = img.width();
    const int h = img.height();
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
                      std::to_string(h) + "\" viewBox=\"-0.5 -0.5 " + std::to_string(w) + " " +
                      std::to_string(h) + "\">\n";
    if (opt.embed_image) {
        GrayPng png{w, h, 8, {}};
        png.samples.reserve(img.values().size());
        for (double v : img.values()) png.samples.push_back(static_cast<std::uint16_t>(std::lround(v * 255.0)));
        svg += "  <image x=\"-0.5\" y=\"-0.5\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
               "\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64," +
               base64_encode(encode_gray_png(png)) + "\"/>\n";
    }
    for (const auto& item : items) {
        const MeasurementDetail& d = item.detail;
        svg += " <g class=\"instance\" data-instance=\"" + std::to_string(item.report.instance) + "\">\n";
        if (d.head_fit) {
            const auto& e = d.head_fit->ellipse;
            svg += "  <ellipse class=\"head-fit\" cx=\"" + num(e.center.x) + "\" cy=\"" + num(e.center.y) +
                   "\" rx=\"" + num(e.semi_major) + "\" ry=\"" + num(e.semi_minor) + "\" transform=\"rotate(" +
                   num(e.angle_deg) + " " + num(e.center.x) + " " + num(e.center.y) +
                   ")\" fill=\"none\" stroke=\"#ff9100\" stroke-width=\"0.5\"/>\n";
        }
        if (d.midpiece_fit) {
            const auto& r = d.midpiece_fit->rect;
            const Vec2 u{std::cos(deg2rad(r.angle_deg)), std::sin(deg2rad(r.angle_deg))};
            const Vec2 v = u.perp();
            std::string pts;
            for (auto [a, b] : {std::pair{1, 1}, std::pair{-1, 1}, std::pair{-1, -1}, std::pair{1, -1}}) {
                const Vec2 c = r.center + u * (0.5 * r.length * a) + v * (0.5 * r.width * b);
                if (!pts.empty()) pts += ' ';
                pts += num(c.x) + "," + num(c.y);
            }
            svg += "  <polygon class=\"midpiece-fit\" points=\"" + pts +
                   "\" fill=\"none\" stroke=\"#2979ff\" stroke-width=\"0.5\"/>\n";
        }
        if (d.midpiece_line) draw_line(svg, *d.midpiece_line, "#80d8ff", opt);
        if (d.tail_line) draw_line(svg, *d.tail_line, "#00e5ff", opt);
        if (d.filter) {
            draw_trimmed(svg, d.filter->head_verdicts);
            draw_trimmed(svg, d.filter->tip_verdicts);
        }
        svg += " </g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace spermmorph
