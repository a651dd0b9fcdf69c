#include <doctest.h>

#include <random>

#include "metric_oracle.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/parsing_metrics.hpp"

using namespace spermmorph;

namespace {

InstancePartMask strip(std::initializer_list<std::pair<InstanceId, PartLabel>> px) {
    InstancePartMask m(static_cast<int>(px.size()), 1);
    int x = 0;
    for (auto [id, part] : px) {
        if (part != PartLabel::Background) m.set(x, 0, id, part);
        ++x;
    }
    return m;
}

constexpr auto T = PartLabel::Tail;
constexpr auto M = PartLabel::Midpiece;
constexpr auto N = PartLabel::Nucleus;
constexpr auto A = PartLabel::Acrosome;
constexpr auto V = PartLabel::Vacuole;
constexpr auto B = PartLabel::Background;

}  // namespace

TEST_CASE("miou hand cases") {
    const auto gt = strip({{1, T}, {1, T}, {1, M}, {1, M}});
    const auto pr = strip({{1, T}, {1, M}, {1, M}, {1, M}});
    const auto r = miou(pr, gt);
    CHECK(r.per_part.at(T) == doctest::Approx(0.5));
    CHECK(r.per_part.at(M) == doctest::Approx(2.0 / 3.0));
    CHECK(r.miou == doctest::Approx(7.0 / 12.0));
    CHECK(miou(gt, gt).miou == 1.0);
    CHECK(miou(strip({{1, T}, {0, B}}), strip({{0, B}, {1, T}})).miou == 0.0);
    CHECK_THROWS_AS(miou(InstancePartMask(2, 2), InstancePartMask(3, 2)), InvalidArgument);
}

TEST_CASE("AP hand cases") {
    const auto gt = strip({{1, T}, {1, T}, {1, M}, {1, M}});
    CHECK(ap_p(ParsingPrediction{gt, {}}, gt, 0.5) == 1.0);
    CHECK(ap_p(ParsingPrediction{InstancePartMask(4, 1), {}}, gt, 0.5) == 0.0);

    // gt: one instance with tail over 5 pixels. pred 1 covers 4 of them (score
    // 0.8), pred 2 covers the fifth (score 0.2).
    InstancePartMask g(15, 1), p(15, 1);
    for (int x = 0; x < 5; ++x) g.set(x, 0, 1, T);
    for (int x = 0; x < 4; ++x) p.set(x, 0, 1, T);
    p.set(4, 0, 2, T);
    CHECK(instance_score(p, 1, g, 1) == doctest::Approx(0.8));
    CHECK(instance_score(p, 2, g, 1) == doctest::Approx(0.2));
    const ParsingPrediction pred{p, {{1, 0.9}, {2, 0.8}}};
    CHECK(ap_p(pred, g, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("AP vol with every score at 0.55") {
    // Instance score 0.55 = mean of part IoUs 0.6 and 0.5.
    InstancePartMask g(12, 1), p(12, 1);
    for (int x = 0; x < 5; ++x) g.set(x, 0, 1, T);  // tail: pred 3 of gt 5 -> 0.6
    for (int x = 0; x < 3; ++x) p.set(x, 0, 1, T);
    for (int x = 6; x < 10; ++x) g.set(x, 0, 1, M);  // midpiece: pred 2 of 4 -> 0.5
    for (int x = 6; x < 8; ++x) p.set(x, 0, 1, M);
    CHECK(instance_score(p, 1, g, 1) == doctest::Approx(0.55));
    const ParsingPrediction pred{p, {}};
    CHECK(ap_p_vol(pred, g) == doctest::Approx(5.0 / 9.0));
    CHECK(ap_p_vol(ParsingPrediction{g, {}}, g) == 1.0);
    CHECK(ap_p_vol(ParsingPrediction{InstancePartMask(12, 1), {}}, g) == 0.0);
}

TEST_CASE("PCP hand cases") {
    // Five parts, three above 0.5.
    InstancePartMask g(20, 1), p(20, 1);
    const PartLabel parts[] = {A, V, N, M, T};
    for (int k = 0; k < 5; ++k) {
        for (int x = 0; x < 4; ++x) g.set(4 * k + x, 0, 1, parts[k]);
        const int covered = k < 3 ? 4 : 1;  // IoU 1 or 0.25
        for (int x = 0; x < covered; ++x) p.set(4 * k + x, 0, 1, parts[k]);
    }
    // score = (3 + 0.5) / 5 = 0.7 > 0.5, matched
    CHECK(pcp(ParsingPrediction{p, {}}, g, 0.5) == doctest::Approx(0.6));
    CHECK(pcp(ParsingPrediction{g, {}}, g, 0.5) == 1.0);

    InstancePartMask g2(8, 1), p2(8, 1);
    for (int x = 0; x < 3; ++x) {
        g2.set(x, 0, 1, T);
        p2.set(x, 0, 1, T);
        g2.set(5 + x, 0, 2, T);
    }
    CHECK(pcp(ParsingPrediction{p2, {}}, g2, 0.5) == doctest::Approx(0.5));
    CHECK(pcp(ParsingPrediction{p2, {}}, g2, 0.5, false) == doctest::Approx(1.0));
}

TEST_CASE("metrics invariant under relabelling") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = oracle::random_mask(rng, 6, 5, {3, 4, 5});
        const auto p = oracle::random_mask(rng, 6, 5, {3, 4, 5});
        auto swap_ids = [](const InstancePartMask& m) {
            InstancePartMask out(m.width(), m.height());
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x)
                    if (m.instance(x, y) != 0)
                        out.set(x, y, static_cast<InstanceId>(m.instance(x, y) == 1 ? 40 : 7), m.part(x, y));
            return out;
        };
        const ParsingPrediction a{p, {{1, 0.3}, {2, 0.7}}}, b{swap_ids(p), {{40, 0.3}, {7, 0.7}}};
        const auto ga = evaluate_parsing(a, g), gb = evaluate_parsing(b, swap_ids(g));
        CHECK(ga.miou == gb.miou);
        CHECK(ga.ap_p_50 == gb.ap_p_50);
        CHECK(ga.ap_p_vol == gb.ap_p_vol);
        CHECK(ga.pcp_50 == gb.pcp_50);
    }
}

TEST_CASE("AP is non-increasing in the threshold") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = oracle::random_mask(rng, 5, 5, {1, 5});
        const auto p = oracle::random_mask(rng, 5, 5, {1, 5});
        const ParsingPrediction pred{p, {}};
        double prev = 2.0;
        for (double t = 0.0; t <= 1.0; t += 0.05) {
            const double v = ap_p(pred, g, t);
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("brute-force agreement on random masks") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 8), coin(0, 3);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int w = dim(rng), h = dim(rng);
        const auto g = oracle::random_mask(rng, w, h, {2, 3, 5});
        const auto p = oracle::random_mask(rng, w, h, {2, 3, 5});
        ParsingPrediction pred{p, {}};
        if (coin(rng) > 0) pred.confidence = {{1, conf(rng)}, {2, conf(rng)}};
        CHECK(miou(p, g).miou == doctest::Approx(oracle::brute_miou(p, g)).epsilon(1e-12));
        for (double t : {0.1, 0.3, 0.5})
            CHECK(ap_p(pred, g, t) == doctest::Approx(oracle::brute_ap(pred, g, t)).epsilon(1e-12));
        CHECK(pcp(pred, g, 0.5) == doctest::Approx(oracle::brute_pcp(pred, g, 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("accumulator pools images") {
    const auto gt = strip({{1, T}, {1, T}, {1, M}, {1, M}});
    ParsingAccumulator acc;
    acc.add(ParsingPrediction{gt, {}}, gt);
    acc.add(ParsingPrediction{gt, {}}, gt);
    const auto r = acc.report();
    CHECK(r.miou == 1.0);
    CHECK(r.ap_p_50 == 1.0);
    CHECK(r.ap_p_vol == 1.0);
    CHECK(r.pcp_50 == 1.0);
}
