#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "spermmorph/cli.hpp"
#include "spermmorph/config.hpp"
#include "spermmorph/endpoint.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/morphometry.hpp"
#include "spermmorph/parsing_metrics.hpp"
#include "spermmorph/png_io.hpp"
#include "spermmorph/report.hpp"
#include "spermmorph/synth.hpp"

namespace py = pybind11;
using namespace spermmorph;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using U16 = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;
using Bool = py::array_t<bool, py::array::c_style | py::array::forcecast>;

void require_2d(const py::array& a, const char* what) {
    if (a.ndim() != 2) throw InvalidArgument(std::string(what) + " must be a 2-D array");
}

ScalarImage to_image(const F64& a) {
    require_2d(a, "image");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return ScalarImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> from_image(const ScalarImage& img) {
    py::array_t<double> out({img.height(), img.width()});
    std::copy(img.values().begin(), img.values().end(), out.mutable_data());
    return out;
}

py::array_t<double> from_field(const Field& f) {
    py::array_t<double> out({f.height(), f.width()});
    std::copy(f.data().begin(), f.data().end(), out.mutable_data());
    return out;
}

InstancePartMask to_mask(const U8& parts, const U16& instances) {
    require_2d(parts, "parts");
    require_2d(instances, "instances");
    if (parts.shape(0) != instances.shape(0) || parts.shape(1) != instances.shape(1))
        throw InvalidArgument("parts and instances differ in shape");
    const auto h = static_cast<int>(parts.shape(0)), w = static_cast<int>(parts.shape(1));
    std::vector<PartLabel> p(static_cast<std::size_t>(parts.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto code = part_from_code(parts.data()[i]);
        if (!code) throw InvalidArgument("part code " + std::to_string(parts.data()[i]) + " outside 0..5");
        p[i] = *code;
    }
    return InstancePartMask(w, h, std::move(p), std::vector<InstanceId>(instances.data(), instances.data() + instances.size()));
}

py::tuple from_mask(const InstancePartMask& m) {
    py::array_t<std::uint8_t> parts({m.height(), m.width()});
    py::array_t<std::uint16_t> inst({m.height(), m.width()});
    for (std::size_t i = 0; i < m.parts().size(); ++i) {
        parts.mutable_data()[i] = static_cast<std::uint8_t>(m.parts()[i]);
        inst.mutable_data()[i] = m.instances()[i];
    }
    return py::make_tuple(parts, inst);
}

BinaryMask to_binary(const Bool& a) {
    require_2d(a, "mask");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(a.size()));
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.data()[i] ? 1 : 0;
    return BinaryMask(w, h, std::move(bits));
}

py::array_t<bool> from_binary(const BinaryMask& m) {
    py::array_t<bool> out({m.height(), m.width()});
    for (std::size_t i = 0; i < m.bits().size(); ++i) out.mutable_data()[i] = m.bits()[i] != 0;
    return out;
}

std::string value_text(const py::handle& v) {
    if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
    return py::str(v).cast<std::string>();
}

MeasurementConfig make_config(const std::optional<py::dict>& overrides) {
    MeasurementConfig cfg;
    if (overrides)
        for (auto [k, v] : *overrides) apply_config_value(cfg, k.cast<std::string>(), value_text(v));
    cfg.validate();
    return cfg;
}

py::object opt(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict report_dict(const MorphReport& r) {
    py::dict d;
    d["instance"] = r.instance;
    d["head_length_um"] = r.head ? py::cast(r.head->length_um) : py::none();
    d["head_width_um"] = r.head ? py::cast(r.head->width_um) : py::none();
    d["head_ellipticity"] = r.head ? py::cast(r.head->ellipticity) : py::none();
    d["acrosome_area_um2"] = r.acrosome_area_um2;
    d["nucleus_area_um2"] = r.nucleus_area_um2;
    d["vacuole_count"] = r.vacuole.count;
    d["vacuole_area_um2"] = opt(r.vacuole.area_um2);
    d["head_midpiece_angle_deg"] = opt(r.head_midpiece_angle_deg);
    d["midpiece_length_um"] = r.midpiece ? py::cast(r.midpiece->length_um) : py::none();
    d["midpiece_width_um"] = r.midpiece ? py::cast(r.midpiece->width_um) : py::none();
    d["midpiece_angle_max_deg"] = r.midpiece ? py::cast(r.midpiece->angle_max_deg) : py::none();
    d["tail_length_um"] = r.tail ? py::cast(r.tail->length_um) : py::none();
    d["tail_width_um"] = r.tail ? py::cast(r.tail->width_um) : py::none();
    d["tail_angle_max_deg"] = r.tail ? py::cast(r.tail->angle_max_deg) : py::none();
    d["tail_mean_curvature_per_um"] = opt(r.tail_mean_curvature_per_um);
    py::list flags;
    for (QualityFlag f : r.flags) flags.append(std::string(to_string(f)));
    d["flags"] = flags;
    d["table2_row"] = table2_row(r);
    return d;
}

py::dict centerline_dict(const Centerline& line) {
    const auto n = static_cast<py::ssize_t>(line.points.size());
    py::array_t<double> pos({n, py::ssize_t{2}}), nrm({n, py::ssize_t{2}});
    py::array_t<double> width(n);
    py::array_t<bool> detected(n);
    for (py::ssize_t i = 0; i < n; ++i) {
        const CenterPoint& p = line.points[static_cast<std::size_t>(i)];
        pos.mutable_at(i, 0) = p.position.x;
        pos.mutable_at(i, 1) = p.position.y;
        nrm.mutable_at(i, 0) = p.normal.x;
        nrm.mutable_at(i, 1) = p.normal.y;
        width.mutable_at(i) = p.width ? *p.width : std::numeric_limits<double>::quiet_NaN();
        detected.mutable_at(i) = p.source == PointSource::Detected;
    }
    py::dict d;
    d["positions"] = pos;
    d["normals"] = nrm;
    d["widths"] = width;
    d["detected"] = detected;
    return d;
}

py::dict metric_dict(const MetricReport& m) {
    py::dict parts;
    for (const auto& [p, v] : m.per_part_iou) parts[py::str(std::string(part_name(p)))] = v;
    py::dict d;
    d["miou"] = m.miou;
    d["ap_p_50"] = m.ap_p_50;
    d["ap_p_vol"] = m.ap_p_vol;
    d["pcp_50"] = m.pcp_50;
    d["per_part_iou"] = parts;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sperm morphology measurement core";

    // Translators run in reverse registration order, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"),
          "Grayscale PNG as a float64 array in [0, 1].");
    m.def(
        "save_image",
        [](const std::filesystem::path& p, const F64& img, int bits) { save_image(p, to_image(img), bits); },
        py::arg("path"), py::arg("image"), py::arg("bit_depth") = 8);
    m.def("load_mask", [](const std::filesystem::path& part, const std::filesystem::path& inst) {
        return from_mask(load_mask(part, inst));
    }, py::arg("part_path"), py::arg("instance_path"), "(parts uint8, instances uint16) arrays.");
    m.def(
        "save_mask",
        [](const std::filesystem::path& part, const std::filesystem::path& inst, const U8& parts, const U16& ids) {
            save_mask(part, inst, to_mask(parts, ids));
        },
        py::arg("part_path"), py::arg("instance_path"), py::arg("parts"), py::arg("instances"));
    m.def("part_code_table", [] {
        py::list out;
        for (std::uint8_t c = 0; c <= 5; ++c) out.append(py::make_tuple(c, std::string(part_name(*part_from_code(c)))));
        return out;
    }, "(code, name) for every part label.");

    m.def(
        "config_entries",
        [](const std::optional<py::dict>& overrides) {
            py::list out;
            for (const auto& e : config_entries(make_config(overrides)))
                out.append(py::make_tuple(e.key, e.value, e.description));
            return out;
        },
        py::arg("overrides") = py::none(), "(key, value, description) for every configuration key.");

    m.def("gaussian_kernel", [](double sigma, int order) { return gaussian_kernel_1d(GaussianSpec(sigma), order); },
          py::arg("sigma"), py::arg("order"));
    m.def(
        "derivative_fields",
        [](const F64& img, double sigma) {
            const DerivativeFields f = derivative_fields(to_image(img), GaussianSpec(sigma));
            py::dict d;
            d["rx"] = from_field(f.rx);
            d["ry"] = from_field(f.ry);
            d["rxx"] = from_field(f.rxx);
            d["rxy"] = from_field(f.rxy);
            d["ryy"] = from_field(f.ryy);
            return d;
        },
        py::arg("image"), py::arg("sigma") = 1.8);

    m.def("cos_alpha", [](std::array<double, 2> a, std::array<double, 2> b) {
        return cos_alpha({a[0], a[1]}, {b[0], b[1]});
    }, py::arg("g1"), py::arg("g2"));
    m.def("momentum_update", [](double alpha, std::array<double, 2> a, std::array<double, 2> b) {
        const Vec2 g = momentum_update(alpha, {a[0], a[1]}, {b[0], b[1]});
        return std::array<double, 2>{g.x, g.y};
    }, py::arg("alpha"), py::arg("g_current"), py::arg("g_next"));
    m.def("candidate_pixels", [](std::array<int, 2> c, double angle) {
        const auto p = candidate_pixels({c[0], c[1]}, angle);
        return std::array<std::array<int, 2>, 2>{{{p[0].x, p[0].y}, {p[1].x, p[1].y}}};
    }, py::arg("current"), py::arg("gradient_angle_deg"));

    m.def(
        "fit_ellipse",
        [](const Bool& mask, double scale) -> py::object {
            const auto e = fit_ellipse(to_binary(mask), PixelScale(scale));
            if (!e) return py::none();
            py::dict d;
            d["length_um"] = e->length_um;
            d["width_um"] = e->width_um;
            d["ellipticity"] = e->ellipticity;
            d["angle_deg"] = e->major_axis_angle_deg;
            d["center"] = py::make_tuple(e->ellipse.center.x, e->ellipse.center.y);
            return d;
        },
        py::arg("mask"), py::arg("scale_um_per_px") = 1.0);
    m.def(
        "fit_rectangle",
        [](const Bool& mask, double scale) {
            const auto r = fit_rectangle(to_binary(mask), PixelScale(scale));
            py::dict d;
            d["length_um"] = r.length_um;
            d["width_um"] = r.width_um;
            d["angle_deg"] = r.angle_deg;
            d["degenerate"] = r.degenerate;
            return d;
        },
        py::arg("mask"), py::arg("scale_um_per_px") = 1.0);
    m.def("head_midpiece_angle", &head_midpiece_angle, py::arg("head_angle_deg"), py::arg("midpiece_angle_deg"));

    m.def(
        "measure",
        [](const F64& img, const U8& parts, const U16& ids, const std::optional<InstanceId>& instance,
           const std::optional<py::dict>& config) {
            const MeasurementConfig cfg = make_config(config);
            const InstancePartMask mask = to_mask(parts, ids);
            std::vector<InstanceId> which = instance ? std::vector<InstanceId>{*instance} : mask.instance_ids();
            std::vector<MorphReport> reports;
            {
                py::gil_scoped_release release;
                const ImageContext ctx = prepare_image(to_image(img), cfg);
                for (InstanceId id : which) reports.push_back(measure_sperm(ctx, mask, id, cfg));
            }
            py::list out;
            for (const auto& r : reports) out.append(report_dict(r));
            return out;
        },
        py::arg("image"), py::arg("parts"), py::arg("instances"), py::arg("instance") = py::none(),
        py::arg("config") = py::none(), "One report dict per instance. `config` maps dotted keys to values.");

    m.def(
        "trace_tail",
        [](const F64& img, const Bool& tail_mask, const std::optional<py::dict>& config) -> py::object {
            const MeasurementConfig cfg = make_config(config);
            TailTrace t;
            {
                py::gil_scoped_release release;
                const ImageContext ctx = prepare_image(to_image(img), cfg);
                t = trace_tail(ctx.fields, to_binary(tail_mask), cfg);
            }
            if (!t.line) return py::none();
            py::dict d = centerline_dict(*t.line);
            d["trimmed_head"] = t.filter ? t.filter->trimmed_head() : 0;
            d["trimmed_tip"] = t.filter ? t.filter->trimmed_tip() : 0;
            return d;
        },
        py::arg("image"), py::arg("tail_mask"), py::arg("config") = py::none(),
        "Tail centerline: positions, normals, widths (px) and a detected flag per point.");

    m.def(
        "evaluate_parsing",
        [](const U8& pred_parts, const U16& pred_ids, const U8& gt_parts, const U16& gt_ids,
           const std::map<InstanceId, double>& confidence, bool pcp_unmatched_zero) {
            MetricOptions o;
            o.pcp_unmatched_zero = pcp_unmatched_zero;
            return metric_dict(
                evaluate_parsing(ParsingPrediction{to_mask(pred_parts, pred_ids), confidence}, to_mask(gt_parts, gt_ids), o));
        },
        py::arg("pred_parts"), py::arg("pred_instances"), py::arg("gt_parts"), py::arg("gt_instances"),
        py::arg("confidence") = std::map<InstanceId, double>{}, py::arg("pcp_unmatched_zero") = true);

    m.def(
        "render_phantom",
        [](std::uint64_t seed, std::size_t index, double noise) {
            PhantomRanges rg;
            rg.noise_sigma = noise;
            const Phantom ph = render_sperm_phantom(random_phantom_spec(seed, index, rg));
            const PhantomTruth& t = ph.truth;
            py::dict truth;
            truth["head_length_px"] = t.head_length;
            truth["head_width_px"] = t.head_width;
            truth["ellipticity"] = t.ellipticity;
            truth["midpiece_length_px"] = t.midpiece_length;
            truth["midpiece_width_px"] = t.midpiece_width;
            truth["head_midpiece_angle_deg"] = t.head_midpiece_angle_deg;
            truth["vacuole_count"] = t.vacuole_count;
            truth["tail_length_px"] = t.tail.length;
            truth["tail_mean_width_px"] = t.tail.mean_width;
            truth["tail_mean_abs_curvature_per_px"] = t.tail.mean_abs_curvature;
            truth["tail_angle_max_deg"] = t.tail.angle_max_deg;
            const py::tuple mask = from_mask(ph.mask);
            return py::make_tuple(from_image(ph.image), mask[0], mask[1], truth);
        },
        py::arg("seed"), py::arg("index") = 0, py::arg("noise_sigma") = 0.02,
        "(image, parts, instances, truth) of one randomized phantom; lengths in px.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
