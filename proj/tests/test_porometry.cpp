#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "semmp/error.hpp"
#include "semmp/porometry.hpp"
#include "semmp/synthgen.hpp"

using namespace semmp;
using namespace semmp::porometry;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution on(density);
    BinaryMask m(w, h);
    for (auto& b : m.bits()) b = on(rng) ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("connected_components trivial cases") {
    CHECK(connected_components(BinaryMask(6, 4)).count == 0);

    const auto full = connected_components(BinaryMask(6, 4, true));
    CHECK(full.count == 1);
    CHECK(full.sizes == std::vector<std::size_t>{24});

    BinaryMask diag(2, 2);
    diag.set(0, 0, true);
    diag.set(1, 1, true);
    CHECK(connected_components(diag, Connectivity::Four).count == 2);
    CHECK(connected_components(diag, Connectivity::Eight).count == 1);

    BinaryMask anti(2, 2);
    anti.set(1, 0, true);
    anti.set(0, 1, true);
    CHECK(connected_components(anti, Connectivity::Eight).count == 1);
}

TEST_CASE("connected_components labels in raster first-encounter order") {
    // A U shape whose arms meet only on the last row: one component, and the
    // isolated pixel to its right, encountered later, is label 2.
    BinaryMask m(6, 3);
    for (int y = 0; y < 3; ++y) {
        m.set(0, y, true);
        m.set(2, y, true);
    }
    m.set(1, 2, true);
    m.set(4, 0, true);
    const auto cc = connected_components(m);
    CHECK(cc.count == 2);
    CHECK(cc.labels[0] == 1);
    CHECK(cc.labels[2] == 1);
    CHECK(cc.labels[4] == 2);
    CHECK(cc.sizes == std::vector<std::size_t>{7, 1});
}

TEST_CASE("connected_components agrees with flood fill on random masks") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 120; ++trial) {
        const double density = 0.2 + 0.6 * (trial % 7) / 6.0;
        const BinaryMask m = random_mask(rng, 1 + trial % 31, 1 + (trial * 7) % 29, density);
        for (auto conn : {Connectivity::Four, Connectivity::Eight}) {
            const auto cc = connected_components(m, conn);
            const auto ref = oracle::flood_fill(m, conn == Connectivity::Eight);
            REQUIRE(cc.count == ref.count);
            auto sizes = cc.sizes;
            std::sort(sizes.begin(), sizes.end());
            CHECK(sizes == ref.sorted_sizes);

            std::size_t total = 0;
            for (auto s : cc.sizes) total += s;
            CHECK(total == m.count());
            for (auto l : cc.labels) CHECK(l <= cc.count);
        }
    }
}

TEST_CASE("estimate_pore_size on a single dark square") {
    GrayImage img(40, 40, 200);
    for (int y = 10; y < 20; ++y)
        for (int x = 5; x < 15; ++x) img.at(x, y) = 20;
    const auto e = estimate_pore_size(img, {50, 200});
    CHECK(e.area_px2 == 100.0);
    CHECK(e.side_px == 10.0);
    CHECK(e.diagonal_px == doctest::Approx(14.142).epsilon(1e-4));
    CHECK(e.contributing_components == 1);

    CHECK_THROWS_AS(estimate_pore_size(img, {150, 300}), NoPoresFound);
    CHECK_THROWS_AS(estimate_pore_size(GrayImage(10, 10, 4), {1, 10}), DegenerateImage);
    CHECK_THROWS_AS(estimate_pore_size(img, {0.5, 10}), InvalidConfig);
    CHECK_THROWS_AS(estimate_pore_size(img, {20, 10}), InvalidConfig);
}

TEST_CASE("estimate_pore_size picks the modal bucket, smaller bucket on ties") {
    // Component sizes 100, 100, 100, 400, 400, 400: median 250, bucket width 13.
    BinaryMask m(200, 20);
    auto square = [&](int x0, int side) {
        for (int y = 0; y < side; ++y)
            for (int x = x0; x < x0 + side; ++x) m.set(x, y, true);
    };
    square(0, 10);
    square(12, 10);
    square(24, 10);
    square(40, 20);
    square(62, 20);
    square(84, 20);
    const auto e = estimate_from_mask(m, {1, 1000});
    CHECK(e.area_px2 == 100.0);
    CHECK(e.contributing_components == 3);

    square(110, 20);
    CHECK(estimate_from_mask(m, {1, 1000}).area_px2 == 400.0);
}

TEST_CASE("diagonal is side times sqrt 2") {
    for (double area : {1.0, 2.0, 99.5, 400.0, 12345.678}) {
        const auto e = PoreEstimate::from_area(area, 1);
        CHECK(e.diagonal_px / e.side_px == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
        CHECK(std::abs(e.diagonal_px - e.side_px * std::numbers::sqrt2) <= 1e-9 * e.diagonal_px);
    }
}

TEST_CASE("estimate_pore_size recovers synthetic pore geometry") {
    synthgen::SynthConfig cfg;
    cfg.image_side = 512;
    cfg.pitch = 40;
    cfg.pore_side = 20;
    cfg.seed = 3;

    SUBCASE("no skew") {
        const auto e = estimate_pore_size(synthgen::generate_filter_background(cfg), AreaBounds::defaults_for({512, 512}));
        CHECK(std::abs(e.side_px - 20.0) <= 1.0);
        CHECK(std::abs(e.diagonal_px - 28.28) <= 1.5);
    }
    SUBCASE("8 degree skew") {
        cfg.skew_deg = 8.0;
        const auto e = estimate_pore_size(synthgen::generate_filter_background(cfg), AreaBounds::defaults_for({512, 512}));
        CHECK(std::abs(e.side_px - 20.0) <= 1.5);
    }
}

TEST_CASE("pore side relative error stays within 7.5% across pitch and skew") {
    for (double pitch : {30.0, 40.0, 60.0}) {
        for (double skew : {0.0, 5.0, 10.0}) {
            synthgen::SynthConfig cfg;
            cfg.image_side = 512;
            cfg.pitch = pitch;
            cfg.pore_side = 20;
            cfg.skew_deg = skew;
            cfg.seed = static_cast<std::uint64_t>(pitch * 100 + skew);
            const auto e = estimate_pore_size(synthgen::generate_filter_background(cfg));
            INFO("pitch " << pitch << " skew " << skew << " side " << e.side_px);
            CHECK(std::abs(e.side_px - 20.0) / 20.0 <= 0.075);
        }
    }
}

TEST_CASE("pore CSV round-trip") {
    const auto e = PoreEstimate::from_area(401.25, 17);
    const std::string text = std::string(kPoreCsvHeader) + "\n" + format_pore_csv_row("img_1", e) + "\n";
    const auto parsed = parse_pore_csv(text);
    REQUIRE(parsed.count("img_1"));
    CHECK(parsed.at("img_1").area_px2 == e.area_px2);
    CHECK(parsed.at("img_1").contributing_components == 17);
    CHECK_THROWS_AS(parse_pore_csv("nope\n"), MalformedInput);
    CHECK_THROWS_AS(parse_pore_csv(std::string(kPoreCsvHeader) + "\na,b,c\n"), MalformedInput);
}
