#include "bridgewatch/attention.hpp"
#include "bridgewatch/error.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bridgewatch;
using bwtest::gaze_at;

namespace {

const ScreenGeometry kScreen{1920, 1080};

template <typename Fn>
Errc error_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected bridgewatch::Error");
    return Errc::MalformedLine;
}

Session session_with(std::vector<GazeSample> gaze) {
    Session s = bwtest::tiny_session();
    s.gaze = std::move(gaze);
    return s;
}

AnalysisConfig tiled(int n) {
    AnalysisConfig c;
    c.af_window_n = n;
    c.af_stride = n;
    return c;
}

// rank = ceil(p/100 * n), 1-based, clamped to [1, n]
double nearest_rank_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    auto rank = static_cast<long>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    rank = std::clamp<long>(rank, 1, static_cast<long>(v.size()));
    return v[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("strict calibration takes the extrema") {
    std::vector<GazeSample> g = {gaze_at(0, 1, 1, 2.0), gaze_at(20, 1, 1, 4.0), gaze_at(40, 1, 1, 6.0)};
    PupilCalibration c = calibrate_pupil(g, PupilMethod::strict());
    CHECK(c.pd_min_mm == 2.0);
    CHECK(c.pd_max_mm == 6.0);
}

TEST_CASE("calibration errors") {
    std::vector<GazeSample> flat = {gaze_at(0, 1, 1, 3.0), gaze_at(20, 1, 1, 3.0)};
    CHECK(error_code([&] { calibrate_pupil(flat, PupilMethod::strict()); }) == Errc::DegenerateCalibration);
    std::vector<GazeSample> one = {gaze_at(0, 1, 1, 3.0)};
    CHECK(error_code([&] { calibrate_pupil(one, PupilMethod::strict()); }) == Errc::InsufficientPupilData);
}

TEST_CASE("calibration uses the per-sample mean of the reporting eyes") {
    GazeSample a = gaze_at(0, 1, 1, 2.0);
    a.pd_right_mm = 4.0;  // mean 3.0
    GazeSample b = gaze_at(20, 1, 1, 5.0);
    b.pd_right_mm.reset();  // left only
    GazeSample c = gaze_at(40, 1, 1, 9.0);
    c.valid = false;  // ignored
    std::vector<GazeSample> g = {a, b, c};
    PupilCalibration cal = calibrate_pupil(g, PupilMethod::strict());
    CHECK(cal.pd_min_mm == 3.0);
    CHECK(cal.pd_max_mm == 5.0);
}

TEST_CASE("robust calibration matches a nearest-rank oracle and excludes the outlier") {
    std::vector<GazeSample> g;
    std::vector<double> values;
    for (int i = 0; i < 199; ++i) {
        double pd = 3.0 + 0.005 * ((i * 37) % 199);
        g.push_back(gaze_at(i * 20, 1, 1, pd));
        values.push_back(pd);
    }
    g.push_back(gaze_at(199 * 20, 1, 1, 9.0));
    values.push_back(9.0);
    PupilCalibration c = calibrate_pupil(g, PupilMethod::robust(1, 99));
    CHECK(c.pd_max_mm < 9.0);
    CHECK(c.pd_max_mm == nearest_rank_oracle(values, 99));
    CHECK(c.pd_min_mm == nearest_rank_oracle(values, 1));
}

TEST_CASE("nearest-rank percentile agrees with the oracle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 10);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + trial % 37);
        for (double& x : v) {
            x = u(rng);
        }
        std::sort(v.begin(), v.end());
        for (double p : {0.0, 1.0, 5.0, 25.0, 50.0, 99.0, 100.0}) {
            CHECK(nearest_rank_percentile(v, p) == nearest_rank_oracle(v, p));
        }
    }
}

TEST_CASE("pd_normalize endpoints, midpoint and clamp") {
    PupilCalibration cal{2.0, 6.0, PupilMethod::strict()};
    CHECK(pd_normalize(2.0, cal) == 0.0);
    CHECK(pd_normalize(4.0, cal) == 0.5);
    CHECK(pd_normalize(7.0, cal) == 1.0);
    CHECK(pd_normalize(1.0, cal) == 0.0);
}

TEST_CASE("pd_normalize is monotone") {
    PupilCalibration cal{2.5, 5.5, PupilMethod::strict()};
    double prev = -1.0;
    for (double pd = 0.0; pd <= 8.0; pd += 0.01) {
        double v = pd_normalize(pd, cal);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("gaze stability hand cases") {
    std::vector<Point2> same = {{5, 5}, {5, 5}, {5, 5}};
    CHECK(gaze_stability(same, kScreen) == 1.0);
    std::vector<Point2> corner = {{0, 0}, {1920, 1080}};
    CHECK(std::abs(gaze_stability(corner, kScreen) - 0.5) <= 1e-12);
    const double half = kScreen.diagonal_px() / 2.0;
    const double ux = 1920.0 / kScreen.diagonal_px();
    const double uy = 1080.0 / kScreen.diagonal_px();
    std::vector<Point2> hops;
    for (int i = 0; i < 4; ++i) {
        double k = (i % 2 == 0) ? 0.0 : half;
        hops.push_back({k * ux, k * uy});
    }
    CHECK(std::abs(gaze_stability(hops, kScreen) - 0.625) <= 1e-12);
}

TEST_CASE("gs divisor switch rescales only the motion term") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 40;
        std::vector<Point2> pts;
        for (int i = 0; i < n; ++i) {
            pts.push_back(bwtest::random_point(rng, kScreen));
        }
        double by_n = gaze_stability(pts, kScreen, GsDivisor::N);
        double by_n1 = gaze_stability(pts, kScreen, GsDivisor::NMinus1);
        CHECK(std::abs((1.0 - by_n) * n - (1.0 - by_n1) * (n - 1)) <= 1e-12);
    }
}

TEST_CASE("gaze stability needs two points") {
    std::vector<Point2> one = {{1, 1}};
    CHECK(error_code([&] { gaze_stability(one, kScreen); }) == Errc::WindowTooSmall);
}

TEST_CASE("attentional focus arithmetic and weight validation") {
    CHECK(attentional_focus(1.0, 1.0, 0.3, 0.7) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(attentional_focus(0.8, 0.6, 0.5, 0.5) - 0.7) <= 1e-12);
    CHECK(error_code([] { attentional_focus(0.5, 0.5, 0.7, 0.2); }) == Errc::InvalidWeights);
    CHECK(error_code([] { attentional_focus(0.5, 0.5, -0.1, 1.1); }) == Errc::InvalidWeights);
}

TEST_CASE("property: GS in [1/N, 1] and AF in [0, 1]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 2 + trial % 60;
        std::vector<Point2> pts;
        for (int i = 0; i < n; ++i) {
            pts.push_back(bwtest::random_point(rng, kScreen));
        }
        double gs = gaze_stability(pts, kScreen);
        CHECK(gs >= 1.0 / n - 1e-12);
        CHECK(gs <= 1.0);
        double w1 = u(rng);
        double af = attentional_focus(u(rng), gs, w1, 1.0 - w1);
        CHECK(af >= 0.0);
        CHECK(af <= 1.0 + 1e-12);
    }
}

TEST_CASE("property: AF is monotone in each input") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        double w1 = u(rng);
        double a = u(rng), b = u(rng), g = u(rng);
        double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(attentional_focus(lo, g, w1, 1 - w1) <= attentional_focus(hi, g, w1, 1 - w1));
        CHECK(attentional_focus(g, lo, w1, 1 - w1) <= attentional_focus(g, hi, w1, 1 - w1));
    }
}

TEST_CASE("property: GS is invariant under a common scale of points and screen") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 20;
        std::vector<Point2> pts;
        for (int i = 0; i < n; ++i) {
            pts.push_back(bwtest::random_point(rng, kScreen));
        }
        for (int k : {2, 3, 5}) {
            std::vector<Point2> scaled;
            for (Point2 p : pts) {
                scaled.push_back({p.x * k, p.y * k});
            }
            ScreenGeometry big{kScreen.width_px * k, kScreen.height_px * k};
            CHECK(std::abs(gaze_stability(scaled, big) - gaze_stability(pts, kScreen)) <= 1e-12);
        }
    }
}

TEST_CASE("flat gaze at mid-range pupil gives AF 0.75") {
    std::vector<GazeSample> g;
    for (int i = 0; i < 90; ++i) {
        g.push_back(gaze_at(i * 20, 500, 500, 4.0));
    }
    // calibration tail: extremes 2.0 and 6.0 in a window of their own
    for (int i = 90; i < 120; ++i) {
        g.push_back(gaze_at(i * 20, 500, 500, i % 2 == 0 ? 2.0 : 6.0));
    }
    AFTimeline tl = af_timeline(session_with(g), tiled(30));
    REQUIRE(tl.samples.size() == 4);
    for (int w = 0; w < 3; ++w) {
        CHECK(std::abs(tl.samples[w].pd_norm - 0.5) <= 1e-12);
        CHECK(tl.samples[w].gs == 1.0);
        CHECK(std::abs(tl.samples[w].af - 0.75) <= 1e-12);
    }
    CHECK(tl.samples[0].window_start.ms == 0);
    CHECK(tl.samples[0].window_end.ms == 29 * 20);
}

TEST_CASE("pupil step from min to max raises AF by w1") {
    std::vector<GazeSample> g;
    for (int i = 0; i < 120; ++i) {
        g.push_back(gaze_at(i * 20, 800, 400, i < 60 ? 2.0 : 6.0));
    }
    AnalysisConfig c = tiled(30);
    c.w1 = 0.3;
    c.w2 = 0.7;
    AFTimeline tl = af_timeline(session_with(g), c);
    REQUIRE(tl.samples.size() == 4);
    CHECK(std::abs(tl.samples[1].af - 0.7) <= 1e-12);
    CHECK(std::abs(tl.samples[2].af - tl.samples[1].af - 0.3) <= 1e-12);
}

TEST_CASE("windows without two valid positions become gaps") {
    std::vector<GazeSample> g;
    for (int i = 0; i < 60; ++i) {
        GazeSample s = gaze_at(i * 20, 10, 10, 2.0 + (i % 5));
        if (i >= 30) {
            s.valid = false;
            s.gaze_px.reset();
        }
        g.push_back(s);
    }
    AFTimeline tl = af_timeline(session_with(g), tiled(30));
    CHECK(tl.samples.size() == 1);
    REQUIRE(tl.gaps.size() == 1);
    CHECK(tl.gaps[0] == TimeRange{{600}, {1180}});
}

TEST_CASE("all samples invalid gives an empty timeline with a full-session gap") {
    std::vector<GazeSample> g;
    for (int i = 0; i < 50; ++i) {
        GazeSample s;
        s.t = {i * 20};
        g.push_back(s);
    }
    AFTimeline tl = af_timeline(session_with(g), AnalysisConfig{});
    CHECK(tl.samples.empty());
    REQUIRE(tl.gaps.size() == 1);
    CHECK(tl.gaps[0] == TimeRange{{0}, {980}});
}

TEST_CASE("event slices clip at zero and reject late events") {
    std::vector<AFSample> tl;
    for (int i = 0; i < 10; ++i) {
        tl.push_back({{i * 200}, {i * 200 + 580}, 0.5, 1.0, 0.1 * i});
    }
    std::vector<TriggerEvent> early = {{{400}, "alarm", ""}};
    auto slices = event_locked_af(tl, early, 30000, 600);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].from.ms == 0);
    CHECK(slices[0].to.ms == 1000);
    REQUIRE(slices[0].pre_mean.has_value());
    CHECK(*slices[0].pre_mean == doctest::Approx(0.05));
    CHECK(*slices[0].post_max == doctest::Approx(0.5));

    std::vector<TriggerEvent> late = {{{99999}, "alarm", ""}};
    CHECK(error_code([&] { event_locked_af(tl, late, 1000, 1000); }) == Errc::EventOutsideSession);
}

}
