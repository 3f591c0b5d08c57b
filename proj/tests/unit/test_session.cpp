#include "bridgewatch/session.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace bridgewatch;
using bwtest::gaze_at;
using bwtest::obs_at;
using bwtest::tiny_session;

TEST_SUITE("session") {

TEST_CASE("well-formed session validates clean") {
    CHECK(validate_session(tiny_session()).ok());
}

TEST_CASE("out-of-order gaze is one violation at index 1") {
    Session s = tiny_session();
    s.gaze = {gaze_at(10, 1, 1), gaze_at(5, 1, 1)};
    ValidationReport r = validate_session(s);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0] == Violation{"gaze", 1, "non-decreasing"});
}

TEST_CASE("degenerate bbox is reported") {
    Session s = tiny_session();
    s.panels = {obs_at(0, "radar", {50, 50, 40, 60})};
    ValidationReport r = validate_session(s);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].rule == "x0 < x1");
    CHECK(r.violations[0].stream == "panels");
}

TEST_CASE("each type invariant is checked") {
    Session s = tiny_session();
    s.gaze[0].gaze_px = Point2{2000, 10};
    s.gaze[1].pd_left_mm = 0.0;
    s.gaze[2].direction = Vec3{0, 0, 2};
    s.panels[0].confidence = 1.5;
    s.utterances[0].text = "   ";
    s.events[0].kind = "";
    ValidationReport r = validate_session(s);
    std::vector<std::string> rules;
    for (const Violation& v : r.violations) {
        rules.push_back(v.stream + ":" + v.rule);
    }
    CHECK(rules == std::vector<std::string>{"gaze:gaze within frame", "gaze:pupil diameter > 0",
                                            "gaze:direction unit norm", "panels:confidence in [0,1]",
                                            "transcript:text non-empty", "events:kind non-empty"});
}

TEST_CASE("unknown panel and subpanel ids are violations") {
    Session s = tiny_session();
    s.panels.push_back(obs_at(10, "sonar", {0, 0, 10, 10}));
    PanelObservation sub = obs_at(20, "sms", {0, 0, 10, 10});
    sub.subpanel_id = "heading";
    s.panels.push_back(sub);
    ValidationReport r = validate_session(s);
    REQUIRE(r.violations.size() == 2);
    CHECK(r.violations[0].rule == "panel in catalog");
    CHECK(r.violations[1].rule == "subpanel in catalog");
}

TEST_CASE("validate_session is idempotent") {
    Session s = tiny_session();
    s.gaze = {gaze_at(10, 1, 1), gaze_at(5, 1, 1)};
    const Session before = s;
    CHECK(validate_session(s) == validate_session(s));
    CHECK(s == before);
}

TEST_CASE("zero offsets are the identity") {
    Session s = tiny_session();
    s.audio_offset_ms = 7;
    OffsetResult r = apply_clock_offsets(s, {});
    CHECK(r.session == s);
    CHECK(r.dropped_total() == 0);
}

TEST_CASE("negative gaze offset drops samples that fall before zero") {
    Session s = tiny_session();
    s.gaze = {gaze_at(10, 1, 1), gaze_at(30, 1, 1)};
    ClockOffsets off;
    off.gaze = -20;
    OffsetResult r = apply_clock_offsets(s, off);
    REQUIRE(r.session.gaze.size() == 1);
    CHECK(r.session.gaze[0].t.ms == 10);
    CHECK(r.dropped_gaze == 1);
    CHECK(r.session.panels == s.panels);
}

TEST_CASE("audio offset leaves utterances untouched") {
    Session s = tiny_session();
    ClockOffsets off;
    off.audio = 100;
    OffsetResult r = apply_clock_offsets(s, off);
    CHECK(r.session.utterances == s.utterances);
    CHECK(r.session.audio_offset_ms == s.audio_offset_ms + 100);
}

TEST_CASE("uniform shifts preserve ordering validity") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> shift(-500, 500);
    for (int trial = 0; trial < 200; ++trial) {
        Session s = tiny_session();
        s.gaze.clear();
        for (int i = 0; i < 20; ++i) {
            s.gaze.push_back(gaze_at(i * 20, 10, 10));
        }
        ClockOffsets off{shift(rng), shift(rng), shift(rng), shift(rng), 0};
        OffsetResult r = apply_clock_offsets(s, off);
        for (const Violation& v : validate_session(r.session).violations) {
            CHECK(v.rule != "non-decreasing");
        }
    }
}

TEST_CASE("mean pupil uses whichever eyes reported") {
    GazeSample g;
    CHECK_FALSE(g.mean_pupil_mm().has_value());
    g.pd_left_mm = 3.0;
    CHECK(*g.mean_pupil_mm() == doctest::Approx(3.0));
    g.pd_right_mm = 4.0;
    CHECK(*g.mean_pupil_mm() == doctest::Approx(3.5));
}

}
