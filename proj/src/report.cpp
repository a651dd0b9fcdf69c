#include "spermmorph/report.hpp"

#include <json.hpp>

#include <optional>
#include <sstream>

namespace spermmorph {

namespace {

std::string value(std::optional<double> v) { return v ? format_2dp(*v) : "NA"; }

nlohmann::json jvalue(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

const std::vector<std::string>& table2_columns() {
    static const std::vector<std::string> cols = {
        "head_length_um",        "head_width_um",         "head_ellipticity",
        "acrosome_area_um2",     "nucleus_area_um2",      "vacuole_count",
        "vacuole_area_um2",      "head_midpiece_angle_deg", "midpiece_length_um",
        "midpiece_width_um",     "midpiece_angle_max_deg", "tail_length_um",
        "tail_width_um",         "tail_angle_max_deg",
    };
    return cols;
}

std::string table2_row(const MorphReport& r) {
    std::string out = std::to_string(r.instance);
    auto add = [&](const std::string& s) {
        out += ',';
        out += s;
    };
    add(value(r.head ? std::optional(r.head->length_um) : std::nullopt));
    add(value(r.head ? std::optional(r.head->width_um) : std::nullopt));
    add(value(r.head ? std::optional(r.head->ellipticity) : std::nullopt));
    add(format_2dp(r.acrosome_area_um2));
    add(format_2dp(r.nucleus_area_um2));
    add(std::to_string(r.vacuole.count));
    add(value(r.vacuole.area_um2));
    add(value(r.head_midpiece_angle_deg));
    add(value(r.midpiece ? std::optional(r.midpiece->length_um) : std::nullopt));
    add(value(r.midpiece ? std::optional(r.midpiece->width_um) : std::nullopt));
    add(value(r.midpiece ? std::optional(r.midpiece->angle_max_deg) : std::nullopt));
    add(value(r.tail ? std::optional(r.tail->length_um) : std::nullopt));
    add(value(r.tail ? std::optional(r.tail->width_um) : std::nullopt));
    add(value(r.tail ? std::optional(r.tail->angle_max_deg) : std::nullopt));
    return out;
}

std::string join_flags(const MorphReport& r) {
    std::string out;
    for (QualityFlag f : r.flags) {
        if (!out.empty()) out += ';';
        out += to_string(f);
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string csv_header() {
    std::string out = "image,instance";
    for (const auto& c : table2_columns()) out += "," + c;
    return out + ",flags";
}

std::string csv_row(const ReportRow& row) {
    return csv_field(row.image) + "," + table2_row(row.report) + "," + join_flags(row.report);
}

std::string to_csv(const std::vector<ReportRow>& rows) {
    std::string out = csv_header() + "\n";
    for (const auto& r : rows) out += csv_row(r) + "\n";
    return out;
}

std::string to_json(const std::vector<ReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        const MorphReport& r = row.report;
        nlohmann::json j;
        j["image"] = row.image;
        j["instance"] = r.instance;
        j["head"] = r.head ? nlohmann::json{{"length_um", r.head->length_um},
                                            {"width_um", r.head->width_um},
                                            {"ellipticity", r.head->ellipticity}}
                           : nlohmann::json(nullptr);
        j["acrosome_area_um2"] = r.acrosome_area_um2;
        j["nucleus_area_um2"] = r.nucleus_area_um2;
        j["vacuole"] = {{"count", r.vacuole.count}, {"area_um2", jvalue(r.vacuole.area_um2)}};
        j["head_midpiece_angle_deg"] = jvalue(r.head_midpiece_angle_deg);
        auto segment = [](const std::optional<SegmentMeasures>& s) {
            return s ? nlohmann::json{{"length_um", s->length_um},
                                      {"width_um", s->width_um},
                                      {"angle_max_deg", s->angle_max_deg}}
                     : nlohmann::json(nullptr);
        };
        j["midpiece"] = segment(r.midpiece);
        j["tail"] = segment(r.tail);
        j["tail_mean_curvature_per_um"] = jvalue(r.tail_mean_curvature_per_um);
        nlohmann::json flags = nlohmann::json::array();
        for (QualityFlag f : r.flags) flags.push_back(std::string(to_string(f)));
        j["quality_flags"] = flags;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

namespace {

nlohmann::json metrics_object(const MetricReport& m) {
    nlohmann::json parts = nlohmann::json::object();
    for (const auto& [part, iou] : m.per_part_iou) parts[std::string(part_name(part))] = iou;
    return {{"miou", m.miou},
            {"ap_p_50", m.ap_p_50},
            {"ap_p_vol", m.ap_p_vol},
            {"pcp_50", m.pcp_50},
            {"per_part_iou", parts}};
}

std::string fixed4(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.setf(std::ios::fixed);
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

std::string metrics_csv(const std::vector<MetricRow>& rows, const MetricReport& aggregate) {
    std::string out = "image,miou,ap_p_50,ap_p_vol,pcp_50\n";
    auto line = [&](const std::string& name, const MetricReport& m) {
        out += csv_field(name) + "," + fixed4(m.miou) + "," + fixed4(m.ap_p_50) + "," + fixed4(m.ap_p_vol) +
               "," + fixed4(m.pcp_50) + "\n";
    };
    for (const auto& r : rows) line(r.image, r.metrics);
    line("ALL", aggregate);
    return out;
}

std::string metrics_json(const std::vector<MetricRow>& rows, const MetricReport& aggregate) {
    nlohmann::json j;
    j["aggregate"] = metrics_object(aggregate);
    nlohmann::json images = nlohmann::json::array();
    for (const auto& r : rows) {
        auto o = metrics_object(r.metrics);
        o["image"] = r.image;
        images.push_back(std::move(o));
    }
    j["images"] = images;
    return j.dump(2) + "\n";
}

}  // namespace spermmorph
