#include <doctest.h>

#include <json.hpp>

#include "spermmorph/report.hpp"

using namespace spermmorph;

namespace {

MorphReport sperm1() {
    MorphReport r;
    r.instance = 1;
    r.head = HeadMeasures{4.67, 2.69, 4.67 / 2.69};
    r.acrosome_area_um2 = 3.54;
    r.nucleus_area_um2 = 6.79;
    r.vacuole = {1, 0.33};
    r.head_midpiece_angle_deg = 27.16;
    r.midpiece = SegmentMeasures{3.68, 0.58, 5.27};
    r.tail = SegmentMeasures{31.38, 0.65, 20.91};
    return r;
}

}  // namespace

TEST_CASE("Table 2 row formatting") {
    CHECK(table2_row(sperm1()) == "1,4.67,2.69,1.74,3.54,6.79,1,0.33,27.16,3.68,0.58,5.27,31.38,0.65,20.91");
    CHECK(table2_columns().size() == 14);
}

TEST_CASE("absent values are NA in CSV and null in JSON") {
    MorphReport r = sperm1();
    r.vacuole = {0, std::nullopt};
    r.tail.reset();
    r.flags.insert(QualityFlag::MissingPart);
    const std::string row = table2_row(r);
    CHECK(row == "1,4.67,2.69,1.74,3.54,6.79,0,NA,27.16,3.68,0.58,5.27,NA,NA,NA");
    const auto csv = to_csv({{"a,b.png", r}});
    CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
    CHECK(csv.find("\"a,b.png\",1,") != std::string::npos);
    CHECK(csv.find(",missing_part\n") != std::string::npos);

    const auto j = nlohmann::json::parse(to_json({{"x.png", r}}));
    CHECK(j[0]["tail"].is_null());
    CHECK(j[0]["vacuole"]["area_um2"].is_null());
    CHECK(j[0]["vacuole"]["count"] == 0);
    CHECK(j[0]["head"]["ellipticity"].get<double>() == 4.67 / 2.69);
}

TEST_CASE("metrics CSV") {
    MetricReport m;
    m.miou = 0.5;
    m.ap_p_50 = 1.0;
    m.ap_p_vol = 5.0 / 9.0;
    m.pcp_50 = 0.25;
    const std::string csv = metrics_csv({{"img", m}}, m);
    CHECK(csv == "image,miou,ap_p_50,ap_p_vol,pcp_50\nimg,0.5000,1.0000,0.5556,0.2500\nALL,0.5000,1.0000,0.5556,0.2500\n");
    const auto j = nlohmann::json::parse(metrics_json({{"img", m}}, m));
    CHECK(j["aggregate"]["ap_p_vol"].get<double>() == 5.0 / 9.0);
}

TEST_CASE("csv_field quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a\"b") == "\"a\"\"b\"");
}
