#include "spermmorph/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "spermmorph/config.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/morphometry.hpp"
#include "spermmorph/overlay.hpp"
#include "spermmorph/parallel.hpp"
#include "spermmorph/parsing_metrics.hpp"
#include "spermmorph/png_io.hpp"
#include "spermmorph/report.hpp"
#include "spermmorph/synth.hpp"

namespace fs = std::filesystem;

namespace spermmorph {

namespace {

constexpr const char* kPartSuffix = "_part";
constexpr const char* kInstanceSuffix = "_instance";

struct CommonOptions {
    std::string config;
    std::optional<double> scale;
    std::vector<std::string> sets;
    bool baseline = false;
    bool dark_lines = false;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--scale-um-per-px", o.scale, "pixel size in micrometres");
    cmd.add_option("--set", o.sets, "override one configuration key, key=value");
    cmd.add_flag("--steger-baseline", o.baseline, "plain Steger arm: no gating, filtering or reconstruction");
    cmd.add_flag("--dark-lines", o.dark_lines, "lines are darker than the background");
}

// Defaults, then the file, then explicit flags.
MeasurementConfig build_config(const CommonOptions& o) {
    MeasurementConfig cfg = o.config.empty() ? MeasurementConfig{} : load_config(o.config);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
        apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.scale) cfg.scale = PixelScale(*o.scale);
    if (o.baseline) cfg.steger_baseline = true;
    if (o.dark_lines) cfg.steger.dark_lines = true;
    cfg.validate();
    return cfg;
}

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_mask_file(const fs::path& p) {
    const std::string stem = p.stem().string();
    return ends_with(stem, kPartSuffix) || ends_with(stem, kInstanceSuffix);
}

// Directories expand to their PNG files that are not mask files. Missing paths
// are kept so that they surface as hard errors.
std::vector<fs::path> collect_images(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".png" && !is_mask_file(e.path())) {
                    out.push_back(e.path());
                }
            }
        } else {
            out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct MaskPaths {
    fs::path part, instance;
};

MaskPaths mask_paths(const fs::path& image, const std::string& mask_dir) {
    const fs::path dir = mask_dir.empty() ? image.parent_path() : fs::path(mask_dir);
    const std::string stem = image.stem().string();
    return {dir / (stem + kPartSuffix + ".png"), dir / (stem + kInstanceSuffix + ".png")};
}

InstancePartMask load_mask_for(const fs::path& image, const std::string& mask_dir) {
    const MaskPaths m = mask_paths(image, mask_dir);
    for (const auto& p : {m.part, m.instance}) {
        if (!fs::exists(p)) throw IoError("missing mask file: " + p.generic_string());
    }
    return load_mask(m.part, m.instance);
}

ScalarImage load_input(const fs::path& image) {
    if (!fs::exists(image)) throw IoError("missing image file: " + image.generic_string());
    return load_image(image);
}

void check_dims(const ScalarImage& img, const InstancePartMask& mask, const fs::path& image) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw InvalidArgument("mask size " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                              " does not match image " + image.generic_string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.generic_string());
    f << text;
    if (!f) throw IoError("cannot write " + path.generic_string());
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.generic_string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// measure ------------------------------------------------------------------

struct MeasureOptions {
    CommonOptions common;
    std::vector<std::string> inputs;
    std::string mask_dir;
    std::string out = ".";
    bool overlay = false;
};

struct ImageResult {
    std::vector<MorphReport> reports;
    std::vector<OverlayItem> items;
    std::string error;
    std::string warning;
};

ImageResult measure_image(const fs::path& image, const MeasureOptions& o, const MeasurementConfig& cfg) {
    ImageResult res;
    try {
        const ScalarImage img = load_input(image);
        const InstancePartMask mask = load_mask_for(image, o.mask_dir);
        check_dims(img, mask, image);
        const auto ids = mask.instance_ids();
        if (ids.empty()) {
            res.warning = "warning: " + image.generic_string() + ": empty mask, no instances measured";
            return res;
        }
        const ImageContext ctx = prepare_image(img, cfg);
        for (InstanceId id : ids) {
            MeasurementDetail detail;
            res.reports.push_back(measure_sperm(ctx, mask, id, cfg, o.overlay ? &detail : nullptr));
            if (o.overlay) res.items.push_back({res.reports.back(), std::move(detail)});
        }
        if (o.overlay) {
            write_text(fs::path(o.out) / (image.stem().string() + "_overlay.svg"),
                       render_overlay_svg(img, res.items));
            res.items.clear();
        }
    } catch (const std::exception& e) {
        res.reports.clear();
        res.error = "error: " + image.generic_string() + ": " + e.what();
    }
    return res;
}

int cmd_measure(const MeasureOptions& o, std::ostream& out, std::ostream& err) {
    const MeasurementConfig cfg = build_config(o.common);
    const auto images = collect_images(o.inputs);
    std::vector<ImageResult> results(images.size());
    parallel_for(images.size(), [&](std::size_t i) { results[i] = measure_image(images[i], o, cfg); });

    std::vector<ReportRow> rows;
    bool failed = false;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!results[i].warning.empty()) err << results[i].warning << "\n";
        if (!results[i].error.empty()) {
            err << results[i].error << "\n";
            failed = true;
        }
        for (auto& r : results[i].reports) rows.push_back({images[i].generic_string(), std::move(r)});
    }
    const fs::path dir(o.out);
    write_text(dir / "report.csv", to_csv(rows));
    write_text(dir / "report.json", to_json(rows));
    out << "measured " << rows.size() << " instance(s) in " << images.size() << " image(s); reports in "
        << dir.generic_string() << "\n";
    return failed ? kExitHardError : kExitOk;
}

// centerline ---------------------------------------------------------------

struct CenterlineOptions {
    CommonOptions common;
    std::string image;
    std::string mask_dir;
    int instance = 0;
    std::string out;
    std::string overlay;
    std::string trace_walk;
    std::string dump_fields;
};

const char* source_name(PointSource s) { return s == PointSource::Detected ? "detected" : "reconstructed"; }

void append_points(std::string& csv, int instance, std::size_t chain, const Centerline& line) {
    for (std::size_t i = 0; i < line.points.size(); ++i) {
        const CenterPoint& p = line.points[i];
        csv += std::to_string(instance) + "," + std::to_string(chain) + "," + std::to_string(i) + "," +
               num(p.position.x) + "," + num(p.position.y) + "," + num(p.normal.x) + "," + num(p.normal.y) + "," +
               (p.width ? num(*p.width) : std::string("NA")) + "," + source_name(p.source) + "\n";
    }
}

void append_walk(std::string& csv, int instance, const char* end, const Reconstruction& walk) {
    for (const WalkStep& s : walk.trace) {
        csv += std::to_string(instance) + "," + end + "," + std::to_string(s.step) + "," +
               std::to_string(s.current.x) + "," + std::to_string(s.current.y) + "," + num(s.momentum.x) + "," +
               num(s.momentum.y);
        for (const WalkCandidate& c : s.candidates) {
            csv += "," + std::to_string(c.pixel.x) + "," + std::to_string(c.pixel.y) + "," + num(c.score);
        }
        csv += "," + std::to_string(s.selected) + "\n";
    }
}

void dump_fields(const DerivativeFields& f, const fs::path& dir) {
    fs::create_directories(dir);
    const std::pair<const char*, const Field*> fields[] = {
        {"rx", &f.rx}, {"ry", &f.ry}, {"rxx", &f.rxx}, {"rxy", &f.rxy}, {"ryy", &f.ryy}};
    std::string header = "width " + std::to_string(f.width()) + "\nheight " + std::to_string(f.height()) +
                         "\nsigma " + num(f.spec.sigma()) + "\nradius " + std::to_string(f.spec.radius()) +
                         "\ndtype float32 little-endian row-major\nfiles";
    for (const auto& [name, field] : fields) {
        std::vector<float> data(field->data().begin(), field->data().end());
        std::string bytes(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
        write_text(dir / (std::string(name) + ".f32"), bytes);
        header += std::string(" ") + name + ".f32";
    }
    write_text(dir / "fields.txt", header + "\n");
}

int cmd_centerline(const CenterlineOptions& o, std::ostream& out, std::ostream& err) {
    const MeasurementConfig cfg = build_config(o.common);
    const fs::path image(o.image);
    const ScalarImage img = load_input(image);
    const ImageContext ctx = prepare_image(img, cfg);
    if (!o.dump_fields.empty()) dump_fields(ctx.fields, o.dump_fields);

    std::string csv = "instance,chain,index,x,y,n_x,n_y,width,source\n";
    std::string walk_csv =
        "instance,end,step,c_x,c_y,g_x,g_y,cand1_x,cand1_y,cand1_score,cand2_x,cand2_y,cand2_score,selected\n";
    std::vector<OverlayItem> items;

    const MaskPaths mp = mask_paths(image, o.mask_dir);
    const bool have_mask = !o.mask_dir.empty() || fs::exists(mp.part) || fs::exists(mp.instance);
    if (have_mask) {
        const InstancePartMask mask = load_mask_for(image, o.mask_dir);
        check_dims(img, mask, image);
        std::vector<InstanceId> ids = mask.instance_ids();
        if (o.instance > 0) {
            if (!mask.has_instance(static_cast<InstanceId>(o.instance))) {
                throw InvalidArgument("instance " + std::to_string(o.instance) + " not in mask of " +
                                      image.generic_string());
            }
            ids = {static_cast<InstanceId>(o.instance)};
        }
        if (ids.empty()) err << "warning: " << image.generic_string() << ": empty mask\n";
        for (InstanceId id : ids) {
            MeasurementDetail detail;
            MorphReport r = measure_sperm(ctx, mask, id, cfg, &detail);
            if (detail.tail_line) append_points(csv, id, 0, *detail.tail_line);
            else err << "warning: instance " << id << ": no tail centerline\n";
            if (detail.head_walk) append_walk(walk_csv, id, "head", *detail.head_walk);
            if (detail.tip_walk) append_walk(walk_csv, id, "tip", *detail.tip_walk);
            items.push_back({std::move(r), std::move(detail)});
        }
    } else {
        // Whole-image Steger without segmentation.
        const auto points = detect_center_points(ctx.fields, cfg.steger.strength_threshold, nullptr,
                                                 cfg.steger.dedup_radius);
        auto chains = link_centerlines(points, link_params(cfg.steger));
        for (std::size_t c = 0; c < chains.size(); ++c) {
            measure_widths(chains[c], ctx.fields, cfg.steger);
            append_points(csv, 0, c, chains[c]);
            MeasurementDetail detail;
            detail.tail_line = chains[c];
            items.push_back({MorphReport{}, std::move(detail)});
        }
    }

    if (o.out.empty()) out << csv;
    else write_text(o.out, csv);
    if (!o.trace_walk.empty()) write_text(o.trace_walk, walk_csv);
    if (!o.overlay.empty()) write_text(o.overlay, render_overlay_svg(img, items));
    return kExitOk;
}

// overlay ------------------------------------------------------------------

struct OverlayCmdOptions {
    CommonOptions common;
    std::string image;
    std::string mask_dir;
    std::string out;
};

int cmd_overlay(const OverlayCmdOptions& o, std::ostream& out) {
    const MeasurementConfig cfg = build_config(o.common);
    const fs::path image(o.image);
    const ScalarImage img = load_input(image);
    const InstancePartMask mask = load_mask_for(image, o.mask_dir);
    check_dims(img, mask, image);
    const ImageContext ctx = prepare_image(img, cfg);
    std::vector<OverlayItem> items;
    for (InstanceId id : mask.instance_ids()) {
        MeasurementDetail detail;
        MorphReport r = measure_sperm(ctx, mask, id, cfg, &detail);
        items.push_back({std::move(r), std::move(detail)});
    }
    const fs::path dest = o.out.empty() ? fs::path(image.stem().string() + "_overlay.svg") : fs::path(o.out);
    write_text(dest, render_overlay_svg(img, items));
    out << "wrote " << dest.generic_string() << "\n";
    return kExitOk;
}

// eval-parsing -------------------------------------------------------------

struct EvalOptions {
    std::string pred, gt, out, config;
    bool pcp_exclude_unmatched = false;
};

std::vector<std::string> mask_stems(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.generic_string());
    std::vector<std::string> stems;
    const std::string suffix = std::string(kPartSuffix) + ".png";
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && ends_with(name, suffix)) stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

InstancePartMask load_stem_mask(const fs::path& dir, const std::string& stem) {
    const fs::path part = dir / (stem + kPartSuffix + ".png");
    const fs::path inst = dir / (stem + kInstanceSuffix + ".png");
    for (const auto& p : {part, inst}) {
        if (!fs::exists(p)) throw IoError("missing mask file: " + p.generic_string());
    }
    return load_mask(part, inst);
}

std::map<InstanceId, double> load_scores(const fs::path& path) {
    std::map<InstanceId, double> scores;
    if (!fs::exists(path)) return scores;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.generic_string() + ": " + e.what());
    }
    if (!j.is_object()) throw IoError(path.generic_string() + ": expected an object of instance scores");
    for (const auto& [key, value] : j.items()) {
        int id = 0;
        const auto res = std::from_chars(key.data(), key.data() + key.size(), id);
        if (res.ec != std::errc{} || res.ptr != key.data() + key.size() || id <= 0 || id > 65535 ||
            !value.is_number()) {
            throw IoError(path.generic_string() + ": bad score entry '" + key + "'");
        }
        scores[static_cast<InstanceId>(id)] = value.get<double>();
    }
    return scores;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    MeasurementConfig cfg = o.config.empty() ? MeasurementConfig{} : load_config(o.config);
    if (o.pcp_exclude_unmatched) cfg.pcp_unmatched_zero = false;
    MetricOptions mopt;
    mopt.pcp_unmatched_zero = cfg.pcp_unmatched_zero;

    const fs::path pred_dir(o.pred), gt_dir(o.gt);
    std::vector<std::string> stems = mask_stems(gt_dir);
    for (const auto& s : mask_stems(pred_dir)) stems.push_back(s);
    std::sort(stems.begin(), stems.end());
    stems.erase(std::unique(stems.begin(), stems.end()), stems.end());

    struct Pair {
        ParsingPrediction pred;
        InstancePartMask gt;
        MetricReport metrics;
        std::string error;
    };
    std::vector<Pair> pairs(stems.size());
    parallel_for(stems.size(), [&](std::size_t i) {
        try {
            pairs[i].gt = load_stem_mask(gt_dir, stems[i]);
            pairs[i].pred.mask = load_stem_mask(pred_dir, stems[i]);
            pairs[i].pred.confidence = load_scores(pred_dir / (stems[i] + "_scores.json"));
            pairs[i].metrics = evaluate_parsing(pairs[i].pred, pairs[i].gt, mopt);
        } catch (const std::exception& e) {
            pairs[i].error = "error: " + stems[i] + ": " + e.what();
        }
    });

    ParsingAccumulator acc(mopt);
    std::vector<MetricRow> rows;
    bool failed = false;
    for (std::size_t i = 0; i < stems.size(); ++i) {
        if (!pairs[i].error.empty()) {
            err << pairs[i].error << "\n";
            failed = true;
            continue;
        }
        acc.add(pairs[i].pred, pairs[i].gt);
        rows.push_back({stems[i], pairs[i].metrics});
    }
    const MetricReport aggregate = acc.report();
    const std::string csv = metrics_csv(rows, aggregate);
    out << csv;
    if (!o.out.empty()) {
        write_text(fs::path(o.out) / "metrics.csv", csv);
        write_text(fs::path(o.out) / "metrics.json", metrics_json(rows, aggregate));
    }
    return failed ? kExitHardError : kExitOk;
}

// synth --------------------------------------------------------------------

struct SynthOptions {
    std::string spec;
    std::uint64_t seed = 42;
    std::optional<std::size_t> count;
    std::string out;
    double scale = 0.1;
};

PhantomRanges parse_ranges(const nlohmann::json& j, std::size_t& count) {
    PhantomRanges r;
    const std::map<std::string, double*> reals = {
        {"noise_sigma", &r.noise_sigma},         {"tail_length_min", &r.tail_length_min},
        {"tail_length_max", &r.tail_length_max}, {"tail_width_min", &r.tail_width_min},
        {"tail_width_max", &r.tail_width_max},   {"tail_radius_min", &r.tail_radius_min},
        {"tail_radius_max", &r.tail_radius_max}, {"head_a_min", &r.head_a_min},
        {"head_a_max", &r.head_a_max},           {"head_b_min", &r.head_b_min},
        {"head_b_max", &r.head_b_max},           {"mid_length_min", &r.mid_length_min},
        {"mid_length_max", &r.mid_length_max},   {"mid_width_min", &r.mid_width_min},
        {"mid_width_max", &r.mid_width_max},
    };
    const std::map<std::string, int*> ints = {
        {"canvas_width", &r.canvas_width}, {"canvas_height", &r.canvas_height}, {"max_vacuoles", &r.max_vacuoles}};
    if (!j.is_object()) throw InvalidArgument("synth spec must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "count") {
            if (!value.is_number_unsigned()) throw InvalidArgument("synth spec: count must be a non-negative integer");
            count = value.get<std::size_t>();
        } else if (auto it = reals.find(key); it != reals.end()) {
            if (!value.is_number()) throw InvalidArgument("synth spec: " + key + " must be a number");
            *it->second = value.get<double>();
        } else if (auto jt = ints.find(key); jt != ints.end()) {
            if (!value.is_number_integer()) throw InvalidArgument("synth spec: " + key + " must be an integer");
            *jt->second = value.get<int>();
        } else {
            throw InvalidArgument("synth spec: unknown key '" + key + "'");
        }
    }
    return r;
}

nlohmann::json truth_json(const PhantomTruth& t, const PixelScale& s) {
    const double um = s.microns_per_pixel();
    nlohmann::json table = {
        {"head_length_um", s.length(t.head_length)},
        {"head_width_um", s.length(t.head_width)},
        {"head_ellipticity", t.ellipticity},
        {"acrosome_area_um2", s.area(static_cast<double>(t.acrosome_px))},
        {"nucleus_area_um2", s.area(static_cast<double>(t.nucleus_px))},
        {"vacuole_count", t.vacuole_count},
        {"vacuole_area_um2", t.vacuole_count > 0 ? nlohmann::json(s.area(static_cast<double>(t.vacuole_px)))
                                                 : nlohmann::json(nullptr)},
        {"head_midpiece_angle_deg", t.head_midpiece_angle_deg},
        {"midpiece_length_um", s.length(t.midpiece_length)},
        {"midpiece_width_um", s.length(t.midpiece_width)},
        {"midpiece_angle_max_deg", 0.0},
        {"tail_length_um", s.length(t.tail.length)},
        {"tail_width_um", s.length(t.tail.mean_width)},
        {"tail_angle_max_deg", t.tail.angle_max_deg},
    };
    nlohmann::json px = {
        {"head_angle_deg", t.head_angle_deg},
        {"midpiece_angle_deg", t.midpiece_angle_deg},
        {"midpiece_center", {t.midpiece_center.x, t.midpiece_center.y}},
        {"midpiece_end", {t.midpiece_end.x, t.midpiece_end.y}},
        {"tail_length_px", t.tail.length},
        {"tail_mean_width_px", t.tail.mean_width},
        {"tail_mean_abs_curvature_per_px", t.tail.mean_abs_curvature},
        {"tail_start", {t.tail.start.x, t.tail.start.y}},
        {"tail_end", {t.tail.end.x, t.tail.end.y}},
    };
    return {{"microns_per_pixel", um},
            {"table2", table},
            {"tail_mean_curvature_per_um", t.tail.mean_abs_curvature / um},
            {"pixels", px}};
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    std::size_t count = 1;
    PhantomRanges ranges;
    if (!o.spec.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(o.spec));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument(o.spec + ": " + e.what());
        }
        ranges = parse_ranges(j, count);
    }
    if (o.count) count = *o.count;
    const PixelScale scale(o.scale);
    const fs::path dir(o.out);
    fs::create_directories(dir);
    parallel_for(count, [&](std::size_t i) {
        const PhantomSpec spec = random_phantom_spec(o.seed, i, ranges);
        const Phantom ph = render_sperm_phantom(spec);
        char stem[32];
        std::snprintf(stem, sizeof stem, "phantom_%03zu", i);
        save_image(dir / (std::string(stem) + ".png"), ph.image, 16);
        save_mask(dir / (std::string(stem) + kPartSuffix + ".png"),
                  dir / (std::string(stem) + kInstanceSuffix + ".png"), ph.mask);
        nlohmann::json j = {{"image", std::string(stem) + ".png"}, {"seed", o.seed}, {"index", i},
                            {"instances", {{{"instance", 1}, {"truth", truth_json(ph.truth, scale)}}}}};
        write_text(dir / (std::string(stem) + "_truth.json"), j.dump(2) + "\n");
    });
    out << "wrote " << count << " phantom(s) to " << dir.generic_string() << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sperm morphology measurement from micrographs and part masks", "spermmorph"};
    app.require_subcommand(0, 1);
    bool print_labels = false;
    bool print_config = false;
    app.add_flag("--print-labels", print_labels, "print the part-code table and exit");
    app.add_flag("--print-config", print_config, "print every configuration key with its default and exit");

    MeasureOptions mo;
    auto* measure = app.add_subcommand("measure", "measure every instance and write report.csv and report.json");
    measure->add_option("inputs", mo.inputs, "images or directories of images")->required();
    measure->add_option("--mask-dir", mo.mask_dir, "directory of <stem>_part.png and <stem>_instance.png");
    measure->add_option("--out", mo.out, "output directory");
    measure->add_flag("--overlay", mo.overlay, "also write <stem>_overlay.svg per image");
    add_common(*measure, mo.common);

    CenterlineOptions co;
    auto* centerline = app.add_subcommand("centerline", "per-point tail centerline records as CSV");
    centerline->add_option("image", co.image, "input image")->required();
    centerline->add_option("--mask-dir", co.mask_dir, "mask directory; without masks the whole image is traced");
    centerline->add_option("--instance", co.instance, "only this instance");
    centerline->add_option("--out", co.out, "CSV path, stdout when omitted");
    centerline->add_option("--overlay", co.overlay, "SVG overlay path");
    centerline->add_option("--trace-walk", co.trace_walk, "CSV of endpoint walk steps");
    centerline->add_option("--dump-fields", co.dump_fields, "directory for raw float32 derivative fields");
    add_common(*centerline, co.common);

    EvalOptions eo;
    auto* eval = app.add_subcommand("eval-parsing", "mIoU, AP^p and PCP of predicted against reference parsings");
    eval->add_option("--pred", eo.pred, "directory of predicted masks")->required();
    eval->add_option("--gt", eo.gt, "directory of reference masks")->required();
    eval->add_option("--out", eo.out, "directory for metrics.csv and metrics.json");
    eval->add_option("--config", eo.config, "configuration file")->check(CLI::ExistingFile);
    eval->add_flag("--pcp-exclude-unmatched", eo.pcp_exclude_unmatched,
                   "leave unmatched reference instances out of PCP");

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "render seeded phantoms with ground truth");
    synth->add_option("--spec", so.spec, "JSON object of phantom ranges and count")->check(CLI::ExistingFile);
    synth->add_option("--seed", so.seed, "batch seed");
    synth->add_option("--count", so.count, "number of phantoms, overrides the spec");
    synth->add_option("--out", so.out, "output directory")->required();
    synth->add_option("--scale-um-per-px", so.scale, "pixel size used for the truth in micrometres");

    OverlayCmdOptions oo;
    auto* overlay = app.add_subcommand("overlay", "SVG of centerlines and fits over the image");
    overlay->add_option("image", oo.image, "input image")->required();
    overlay->add_option("--mask-dir", oo.mask_dir, "mask directory");
    overlay->add_option("--out", oo.out, "SVG path");
    add_common(*overlay, oo.common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (print_labels) {
            out << part_code_table();
            return kExitOk;
        }
        if (print_config) {
            out << to_config_text(MeasurementConfig{});
            return kExitOk;
        }
        if (measure->parsed()) return cmd_measure(mo, out, err);
        if (centerline->parsed()) return cmd_centerline(co, out, err);
        if (eval->parsed()) return cmd_eval(eo, out, err);
        if (synth->parsed()) return cmd_synth(so, out);
        if (overlay->parsed()) return cmd_overlay(oo, out);
        err << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitHardError;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace spermmorph
