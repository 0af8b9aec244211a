#include <doctest.h>

#include <cmath>
#include <string>

#include "synth.hpp"
#include "vidmark/error.hpp"
#include "vidmark/keying.hpp"
#include "vidmark/metrics.hpp"

using namespace vidmark;

TEST_CASE("psnr") {
    Plane a(16, 16, 100);
    CHECK(std::isinf(psnr(a, a)));

    Plane b = a;
    for (auto& s : b.samples) s = static_cast<uint8_t>(s + 1);
    CHECK(psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-3 / 48.0));
    CHECK(psnr(a, b) == psnr(b, a));

    Plane c(8, 8);
    CHECK_THROWS_AS(psnr(a, c), Error);
}

TEST_CASE("nc and ber") {
    uint64_t state = 55;
    WatermarkImage w = synth::random_mark(state, 8, 8);

    CHECK(nc(w, w) == 1.0);
    CHECK(ber(w, w) == 0.0);

    WatermarkImage inv = w;
    for (auto& b : inv.bits) b ^= 1;
    CHECK(nc(w, inv) == -1.0);
    CHECK(ber(w, inv) == 1.0);

    WatermarkImage half = w;
    for (size_t i = 0; i < half.bits.size(); i += 2) half.bits[i] ^= 1;
    CHECK(nc(w, half) == 0.0);
    CHECK(ber(w, half) == 0.5);

    WatermarkImage two(4, 2);
    two.bits = w.bits;
    two.bits.resize(8);
    two.bits[1] ^= 1;
    two.bits[5] ^= 1;
    WatermarkImage base(4, 2);
    base.bits = std::vector<uint8_t>(two.bits);
    base.bits[1] ^= 1;
    base.bits[5] ^= 1;
    CHECK(ber(base, two) == 0.25);  // 2 of 8 differ

    // ber == (1 - nc) / 2 for equal-size binary marks
    for (int trial = 0; trial < 50; trial++) {
        WatermarkImage x = synth::random_mark(state, 5, 7);
        WatermarkImage y = synth::random_mark(state, 5, 7);
        CHECK(ber(x, y) == doctest::Approx((1.0 - nc(x, y)) / 2.0).epsilon(1e-12));
    }

    WatermarkImage other(3, 3);
    CHECK_THROWS_AS(nc(w, other), Error);
    CHECK_THROWS_AS(ber(w, other), Error);
}

TEST_CASE("singular report layout") {
    std::string report = singular_report(synth::fixture_matrix_a());
    CHECK(report.find("U =") != std::string::npos);
    CHECK(report.find("S =") != std::string::npos);
    CHECK(report.find("V =") != std::string::npos);
    CHECK(report.find("2-norm = 15.423896") != std::string::npos);
    CHECK(report.find("singular values =") != std::string::npos);
    CHECK(report.find("15.423896") != std::string::npos);
    // trailing digits float within the solver tolerance; pin the prefixes
    CHECK(report.find("0.5578") != std::string::npos);
    CHECK(report.find("0.0282") != std::string::npos);

    Matrix eye(2, 2);
    eye.at(0, 0) = eye.at(1, 1) = 1.0;
    CHECK(singular_report(eye).find("1.000000  1.000000") != std::string::npos);

    Matrix zero(1, 1);
    CHECK(singular_report(zero).find("0.000000") != std::string::npos);
}

TEST_CASE("csv schema") {
    MetricsReport report;
    report.rows = {{0, 45.5}, {7, std::numeric_limits<double>::infinity()}};
    report.mean_psnr = 45.5;
    report.nc = 1.0;
    report.ber = 0.0;
    report.has_mark_metrics = true;
    report.status = "ok";

    std::string csv = to_csv(report);
    CHECK(csv.find("frame,psnr_db\n") == 0);
    CHECK(csv.find("0,45.500000\n") != std::string::npos);
    CHECK(csv.find("7,inf\n") != std::string::npos);
    CHECK(csv.find("#aggregate,45.500000,1.000000,0.000000,ok\n") != std::string::npos);
}

TEST_CASE("svg bar chart") {
    std::string svg = svg_bar_chart({"a", "b"}, {0.5, 0.25}, "test");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("<rect") != std::string::npos);
    CHECK(svg.find(">a<") != std::string::npos);
    CHECK(svg.find("0.250000") != std::string::npos);
    CHECK_THROWS_AS(svg_bar_chart({"a"}, {1.0, 2.0}, "bad"), Error);
}

TEST_CASE("psnr_report aggregates modified frames only") {
    VideoSequence a = synth::smooth_video(4, 16, 16, 2);
    VideoSequence b = a;
    for (auto& s : b.frames[2].y.samples) s = static_cast<uint8_t>(s ^ 1);

    MetricsReport r = psnr_report(a, b, {2});
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].frame == 2);
    CHECK(std::isfinite(r.mean_psnr));

    MetricsReport all_same = psnr_report(a, a, {0, 1});
    CHECK(std::isinf(all_same.mean_psnr));
}
