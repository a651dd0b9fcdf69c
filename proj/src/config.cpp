#include "spermmorph/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "spermmorph/error.hpp"

namespace spermmorph {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw InvalidArgument("config key " + std::string(key) + ": not a number: '" +
                              std::string(v) + "'");
    }
    return out;
}

int parse_int(std::string_view key, std::string_view v) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw InvalidArgument("config key " + std::string(key) + ": not an integer: '" +
                              std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidArgument("config key " + std::string(key) + ": not a boolean: '" + std::string(v) +
                          "'");
}

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

WidthProfile parse_profile(std::string_view key, std::string_view v) {
    if (v == "none") return WidthProfile::None;
    if (v == "bar") return WidthProfile::Bar;
    if (v == "gaussian") return WidthProfile::Gaussian;
    throw InvalidArgument("config key " + std::string(key) + ": expected none|bar|gaussian");
}

struct KeySpec {
    const char* key;
    const char* description;
    std::function<void(MeasurementConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const MeasurementConfig&)> get;
};

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"steger.sigma", "Gaussian smoothing scale, px",
         [](auto& c, auto k, auto v) { c.gaussian = GaussianSpec(parse_double(k, v)); },
         [](const auto& c) { return fmt(c.gaussian.sigma()); }},
        {"steger.strength_threshold", "minimum |Hessian eigenvalue| of a centre point",
         [](auto& c, auto k, auto v) { c.steger.strength_threshold = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.strength_threshold); }},
        {"steger.link_radius", "maximum distance between linked points, px",
         [](auto& c, auto k, auto v) { c.steger.link_radius = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.link_radius); }},
        {"steger.link_max_angle_deg", "maximum normal change between linked points, degrees",
         [](auto& c, auto k, auto v) { c.steger.link_max_angle_deg = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.link_max_angle_deg); }},
        {"steger.link_gamma", "link cost weight of the normal change, px/rad",
         [](auto& c, auto k, auto v) { c.steger.link_gamma = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.link_gamma); }},
        {"steger.min_points", "shortest centerline kept, points",
         [](auto& c, auto k, auto v) { c.steger.min_points = parse_int(k, v); },
         [](const auto& c) { return std::to_string(c.steger.min_points); }},
        {"steger.max_halfwidth", "edge search distance on each side, px",
         [](auto& c, auto k, auto v) { c.steger.max_halfwidth = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.max_halfwidth); }},
        {"steger.edge_threshold", "minimum gradient magnitude of an edge point",
         [](auto& c, auto k, auto v) { c.steger.edge_threshold = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.edge_threshold); }},
        {"steger.mask_margin", "tail mask dilation for candidate gating, px",
         [](auto& c, auto k, auto v) { c.steger.mask_margin = parse_int(k, v); },
         [](const auto& c) { return std::to_string(c.steger.mask_margin); }},
        {"steger.dedup_radius", "duplicate centre responses closer than this are merged, px",
         [](auto& c, auto k, auto v) { c.steger.dedup_radius = parse_double(k, v); },
         [](const auto& c) { return fmt(c.steger.dedup_radius); }},
        {"steger.width_profile", "width bias model: none | bar | gaussian",
         [](auto& c, auto k, auto v) { c.steger.width_profile = parse_profile(k, v); },
         [](const auto& c) { return std::string(to_string(c.steger.width_profile)); }},
        {"steger.dark_lines", "tails darker than background",
         [](auto& c, auto k, auto v) { c.steger.dark_lines = parse_bool(k, v); },
         [](const auto& c) { return fmt(c.steger.dark_lines); }},
        {"steger.baseline", "plain Steger arm without gating, filtering or reconstruction",
         [](auto& c, auto k, auto v) { c.steger_baseline = parse_bool(k, v); },
         [](const auto& c) { return fmt(c.steger_baseline); }},
        {"endpoint.w1", "walk cost weight of the ray distance, 1/px",
         [](auto& c, auto k, auto v) { c.endpoint.w1 = parse_double(k, v); },
         [](const auto& c) { return fmt(c.endpoint.w1); }},
        {"endpoint.w2", "walk cost weight of the gradient angle, 1/rad",
         [](auto& c, auto k, auto v) { c.endpoint.w2 = parse_double(k, v); },
         [](const auto& c) { return fmt(c.endpoint.w2); }},
        {"endpoint.momentum_alpha", "momentum of the walk gradient, [0,1)",
         [](auto& c, auto k, auto v) { c.endpoint.momentum_alpha = parse_double(k, v); },
         [](const auto& c) { return fmt(c.endpoint.momentum_alpha); }},
        {"endpoint.cos_threshold", "minimum |cos| between opposite edge gradients",
         [](auto& c, auto k, auto v) { c.endpoint.cos_threshold = parse_double(k, v); },
         [](const auto& c) { return fmt(c.endpoint.cos_threshold); }},
        {"endpoint.max_steps", "walk step limit",
         [](auto& c, auto k, auto v) { c.endpoint.max_steps = parse_int(k, v); },
         [](const auto& c) { return std::to_string(c.endpoint.max_steps); }},
        {"morph.curvature_window", "arc-length window for curvature, px",
         [](auto& c, auto k, auto v) { c.curvature_window = parse_double(k, v); },
         [](const auto& c) { return fmt(c.curvature_window); }},
        {"morph.scale_um_per_px", "pixel size, micrometres",
         [](auto& c, auto k, auto v) { c.scale = PixelScale(parse_double(k, v)); },
         [](const auto& c) { return fmt(c.scale.microns_per_pixel()); }},
        {"metrics.pcp_unmatched_zero", "unmatched ground-truth instances score 0 in PCP",
         [](auto& c, auto k, auto v) { c.pcp_unmatched_zero = parse_bool(k, v); },
         [](const auto& c) { return fmt(c.pcp_unmatched_zero); }},
    };
    return specs;
}

}  // namespace

std::string_view to_string(WidthProfile p) {
    switch (p) {
        case WidthProfile::None: return "none";
        case WidthProfile::Bar: return "bar";
        case WidthProfile::Gaussian: return "gaussian";
    }
    return "none";
}

void MeasurementConfig::validate() const {
    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw InvalidArgument(std::string("config key ") + key + " " + what);
    };
    require(steger.strength_threshold >= 0.0, "steger.strength_threshold", "must be >= 0");
    require(steger.link_radius > 0.0, "steger.link_radius", "must be > 0");
    require(steger.link_max_angle_deg > 0.0 && steger.link_max_angle_deg <= 90.0,
            "steger.link_max_angle_deg", "must be in (0, 90]");
    require(steger.link_gamma >= 0.0, "steger.link_gamma", "must be >= 0");
    require(steger.min_points >= 2, "steger.min_points", "must be >= 2");
    require(steger.max_halfwidth > 0.5, "steger.max_halfwidth", "must be > 0.5");
    require(steger.edge_threshold >= 0.0, "steger.edge_threshold", "must be >= 0");
    require(steger.mask_margin >= 0, "steger.mask_margin", "must be >= 0");
    require(steger.dedup_radius >= 0.0 && steger.dedup_radius < 1.0, "steger.dedup_radius",
            "must be in [0, 1)");
    require(endpoint.w1 >= 0.0, "endpoint.w1", "must be >= 0");
    require(endpoint.w2 >= 0.0, "endpoint.w2", "must be >= 0");
    require(endpoint.momentum_alpha >= 0.0 && endpoint.momentum_alpha < 1.0,
            "endpoint.momentum_alpha", "must be in [0, 1)");
    require(endpoint.cos_threshold > 0.0 && endpoint.cos_threshold <= 1.0, "endpoint.cos_threshold",
            "must be in (0, 1]");
    require(endpoint.max_steps >= 1, "endpoint.max_steps", "must be >= 1");
    require(curvature_window > 0.0, "morph.curvature_window", "must be > 0");
}

void apply_config_value(MeasurementConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    for (const auto& spec : key_specs()) {
        if (key == spec.key) {
            spec.set(cfg, key, value);
            return;
        }
    }
    throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(MeasurementConfig& cfg, std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
}

MeasurementConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    MeasurementConfig cfg;
    apply_config_text(cfg, ss.str());
    return cfg;
}

std::vector<ConfigEntry> config_entries(const MeasurementConfig& cfg) {
    std::vector<ConfigEntry> out;
    for (const auto& spec : key_specs()) out.push_back({spec.key, spec.get(cfg), spec.description});
    return out;
}

std::string to_config_text(const MeasurementConfig& cfg) {
    std::string out;
    for (const auto& e : config_entries(cfg)) out += e.key + " = " + e.value + "\n";
    return out;
}

}  // namespace spermmorph
