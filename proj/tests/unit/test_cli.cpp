#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "spermmorph/cli.hpp"
#include "spermmorph/png_io.hpp"

using namespace spermmorph;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors and info flags") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    const Run labels = cli({"--print-labels"});
    CHECK(labels.code == kExitOk);
    CHECK(labels.out.find("5,tail") != std::string::npos);
    const Run cfg = cli({"--print-config"});
    CHECK(cfg.code == kExitOk);
    CHECK(cfg.out.find("endpoint.cos_threshold") != std::string::npos);
}

TEST_CASE("measure: empty mask gives zero rows and exit 0") {
    oracle::ScratchDir dir("cli");
    save_image(dir.path / "blank.png", ScalarImage(40, 30, 0.1));
    save_mask(dir.path / "blank_part.png", dir.path / "blank_instance.png", InstancePartMask(40, 30));
    const Run r = cli({"measure", dir.path.string(), "--out", (dir.path / "out").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(lines(slurp(dir.path / "out" / "report.csv")) == 1);
}

TEST_CASE("measure: missing mask file is a hard error naming the path") {
    oracle::ScratchDir dir("cli");
    save_image(dir.path / "lonely.png", ScalarImage(40, 30, 0.1));
    const Run r = cli({"measure", (dir.path / "lonely.png").string(), "--out", (dir.path / "out").string()});
    CHECK(r.code == kExitHardError);
    CHECK(r.err.find("lonely_part.png") != std::string::npos);
}

TEST_CASE("measure: bad config key is a hard error") {
    oracle::ScratchDir dir("cli");
    save_image(dir.path / "blank.png", ScalarImage(40, 30, 0.1));
    save_mask(dir.path / "blank_part.png", dir.path / "blank_instance.png", InstancePartMask(40, 30));
    const Run r = cli({"measure", dir.path.string(), "--set", "steger.nope=1", "--out", dir.path.string()});
    CHECK(r.code == kExitHardError);
    CHECK(r.err.find("steger.nope") != std::string::npos);
}

TEST_CASE("eval-parsing on identical directories") {
    oracle::ScratchDir dir("cli");
    InstancePartMask m(10, 8);
    for (int x = 2; x < 8; ++x) m.set(x, 3, 1, PartLabel::Tail);
    m.set(1, 1, 2, PartLabel::Nucleus);
    save_mask(dir.path / "a_part.png", dir.path / "a_instance.png", m);
    const Run r = cli({"eval-parsing", "--pred", dir.path.string(), "--gt", dir.path.string(), "--out",
                       (dir.path / "m").string()});
    REQUIRE(r.code == kExitOk);
    const auto csv = slurp(dir.path / "m" / "metrics.csv");
    CHECK(csv.find("ALL,1.0000,1.0000,1.0000,1.0000") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir.path / "m" / "metrics.json"));
    CHECK(j["aggregate"]["miou"].get<double>() == 1.0);
}

TEST_CASE("synth then measure round trip") {
    oracle::ScratchDir dir("cli");
    const Run s = cli({"synth", "--seed", "5", "--count", "1", "--out", dir.path.string()});
    REQUIRE(s.code == kExitOk);
    REQUIRE(fs::exists(dir.path / "phantom_000.png"));
    const Run m = cli({"measure", dir.path.string(), "--out", (dir.path / "out").string(), "--overlay"});
    REQUIRE(m.code == kExitOk);
    CHECK(fs::exists(dir.path / "out" / "phantom_000_overlay.svg"));

    const auto truth = nlohmann::json::parse(slurp(dir.path / "phantom_000_truth.json"));
    const auto& t2 = truth["instances"][0]["truth"]["table2"];
    const auto rep = nlohmann::json::parse(slurp(dir.path / "out" / "report.json"));
    REQUIRE(rep.size() == 1);
    const auto& r = rep[0];
    CHECK(r["head"]["length_um"].get<double>() == doctest::Approx(t2["head_length_um"].get<double>()).epsilon(0.02));
    CHECK(r["head"]["width_um"].get<double>() == doctest::Approx(t2["head_width_um"].get<double>()).epsilon(0.03));
    CHECK(r["tail"]["length_um"].get<double>() == doctest::Approx(t2["tail_length_um"].get<double>()).epsilon(0.05));
    CHECK(r["tail"]["width_um"].get<double>() == doctest::Approx(t2["tail_width_um"].get<double>()).epsilon(0.05));
    CHECK(r["vacuole"]["count"] == t2["vacuole_count"]);
    CHECK(std::abs(r["midpiece"]["length_um"].get<double>() - t2["midpiece_length_um"].get<double>()) < 0.15);
}

TEST_CASE("centerline with and without the baseline arm") {
    oracle::ScratchDir dir("cli");
    REQUIRE(cli({"synth", "--seed", "8", "--count", "1", "--out", dir.path.string()}).code == kExitOk);
    const std::string img = (dir.path / "phantom_000.png").string();
    const Run full = cli({"centerline", img, "--mask-dir", dir.path.string()});
    REQUIRE(full.code == kExitOk);
    CHECK(full.out.rfind("instance,chain,index,x,y,n_x,n_y,width,source\n", 0) == 0);
    CHECK(full.out.find(",reconstructed") != std::string::npos);
    const Run base = cli({"centerline", img, "--mask-dir", dir.path.string(), "--steger-baseline"});
    REQUIRE(base.code == kExitOk);
    CHECK(lines(base.out) > 10);
    CHECK(base.out.find(",reconstructed") == std::string::npos);

    const fs::path walk = dir.path / "walk.csv";
    REQUIRE(cli({"centerline", img, "--mask-dir", dir.path.string(), "--trace-walk", walk.string(), "--out",
                 (dir.path / "c.csv").string()})
                .code == kExitOk);
    CHECK(slurp(walk).rfind("instance,end,step,", 0) == 0);
}

TEST_CASE("overlay writes an SVG") {
    oracle::ScratchDir dir("cli");
    REQUIRE(cli({"synth", "--seed", "2", "--count", "1", "--out", dir.path.string()}).code == kExitOk);
    const fs::path svg = dir.path / "o.svg";
    REQUIRE(cli({"overlay", (dir.path / "phantom_000.png").string(), "--out", svg.string()}).code == kExitOk);
    const std::string s = slurp(svg);
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("class=\"reconstructed\"") != std::string::npos);
    CHECK(s.find("class=\"detected\"") != std::string::npos);
}
