#include "bridgewatch/error.hpp"
#include "bridgewatch/ingest.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <sstream>

using namespace bridgewatch;
using bwtest::TempDir;

namespace {

const char* kGazeLine =
    R"({"t_ms":0,"gx":100.0,"gy":50.0,"depth_m":1.2,"pd_left_mm":3.1,"pd_right_mm":3.0,"dir":[0,0,1],"valid":true})";

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

void write_minimal_dir(const std::filesystem::path& dir) {
    write_session(bwtest::tiny_session(), dir);
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("gaze line maps fields directly") {
    Parsed<GazeSample> p = parse_gaze_jsonl(std::string_view(kGazeLine), ParseMode::Strict);
    REQUIRE(p.items.size() == 1);
    const GazeSample& g = p.items[0];
    CHECK(g.t.ms == 0);
    CHECK(g.gaze_px == Point2{100.0, 50.0});
    CHECK(*g.depth_m == 1.2);
    CHECK(*g.pd_left_mm == 3.1);
    CHECK(*g.pd_right_mm == 3.0);
    CHECK(g.direction == Vec3{0, 0, 1});
    CHECK(g.valid);
    CHECK(p.skipped == 0);
}

TEST_CASE("missing optional fields stay absent") {
    Parsed<GazeSample> p = parse_gaze_jsonl(std::string_view(R"({"t_ms":5,"valid":false})"), ParseMode::Strict);
    REQUIRE(p.items.size() == 1);
    CHECK_FALSE(p.items[0].gaze_px.has_value());
    CHECK_FALSE(p.items[0].pd_left_mm.has_value());
    CHECK_FALSE(p.items[0].depth_m.has_value());
}

TEST_CASE("empty file yields nothing") {
    Parsed<GazeSample> p = parse_gaze_jsonl(std::string_view(""), ParseMode::Strict);
    CHECK(p.items.empty());
    CHECK(p.skipped == 0);
}

TEST_CASE("tolerant mode skips bad lines, strict mode reports the line") {
    std::string text = std::string(kGazeLine) + "\n" + kGazeLine + "\nnot-json\n" + kGazeLine + "\n";
    Parsed<GazeSample> p = parse_gaze_jsonl(std::string_view(text), ParseMode::Tolerant);
    CHECK(p.items.size() == 3);
    CHECK(p.skipped == 1);
    try {
        parse_gaze_jsonl(std::string_view(text), ParseMode::Strict);
        FAIL("strict parse accepted a malformed line");
    } catch (const ParseError& e) {
        CHECK(e.code() == Errc::MalformedLine);
        CHECK(e.line_no() == 3);
    }
}

TEST_CASE("missing timestamp is MissingField") {
    CHECK(error_code([] { parse_gaze_jsonl(std::string_view(R"({"valid":true})"), ParseMode::Strict); }) ==
          Errc::MissingField);
}

TEST_CASE("panel line with subpanel") {
    auto p = parse_panels_jsonl(
        std::string_view(R"({"t_ms":40,"panel":"sms","subpanel":"lateral_speed","bbox":[100,100,400,300],"conf":0.97})"),
        ParseMode::Strict);
    REQUIRE(p.items.size() == 1);
    const PanelObservation& o = p.items[0];
    CHECK(o.t.ms == 40);
    CHECK(o.panel_id == "sms");
    CHECK(o.subpanel_id == std::optional<std::string>("lateral_speed"));
    CHECK(o.bbox == BBox{100, 100, 400, 300});
    CHECK(o.confidence == 0.97);
}

TEST_CASE("degenerate panel bbox and out-of-range confidence") {
    try {
        parse_panels_jsonl(std::string_view(R"({"t_ms":40,"panel":"sms","bbox":[400,100,100,300],"conf":0.9})"),
                           ParseMode::Strict);
        FAIL("accepted degenerate bbox");
    } catch (const ParseError& e) {
        CHECK(e.code() == Errc::OutOfRangeValue);
        CHECK(e.reason().find("x0 < x1") != std::string::npos);
    }
    CHECK(error_code([] {
              parse_panels_jsonl(std::string_view(R"({"t_ms":40,"panel":"sms","bbox":[1,1,2,2],"conf":1.5})"),
                                 ParseMode::Strict);
          }) == Errc::OutOfRangeValue);
}

TEST_CASE("events document") {
    auto events = parse_events_json(R"([{"t_ms":600000,"kind":"main_engine_failure","label":"ME failure"}])");
    REQUIRE(events.size() == 1);
    CHECK(events[0] == TriggerEvent{{600000}, "main_engine_failure", "ME failure"});
}

TEST_CASE("event errors carry the field path") {
    try {
        parse_events_json(R"([{"t_ms":1}])");
        FAIL("accepted event without kind");
    } catch (const ParseError& e) {
        CHECK(e.reason().find("[0].kind") != std::string::npos);
    }
}

TEST_CASE("config weights must sum to one") {
    try {
        parse_config(R"({"w1":0.6,"w2":0.5})");
        FAIL("accepted bad weights");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidWeights);
        CHECK(std::string(e.what()).find("w1+w2 must equal 1") != std::string::npos);
    }
}

TEST_CASE("config defaults and overrides") {
    AnalysisConfig c = parse_config(R"({"gs_divisor":"n_minus_1","pd_calibration":{"method":"robust","p_low":1,"p_high":99}})");
    CHECK(c.w1 == 0.5);
    CHECK(c.af_window_n == 30);
    CHECK(c.af_stride == 10);
    CHECK(c.gs_divisor == GsDivisor::NMinus1);
    CHECK(c.pd_calibration == PupilMethod::robust(1, 99));
    CHECK(c.checklist_horizon_ms == 900000);
    CHECK(parse_config(write_config_json(c)) == c);
}

TEST_CASE("catalog with duplicate panel id") {
    try {
        parse_catalog_json(
            R"({"screen":{"w_px":1920,"h_px":1080},"panels":[{"id":"radar"},{"id":"radar"}]})");
        FAIL("accepted duplicate id");
    } catch (const ParseError& e) {
        CHECK(e.reason().find("duplicate id") != std::string::npos);
    }
}

TEST_CASE("catalog round trip") {
    PanelCatalog cat = bwtest::tiny_session().catalog;
    CHECK(parse_catalog_json(write_catalog_json(cat)) == cat);
}

TEST_CASE("load_session composes the parsers") {
    TempDir dir("ingest");
    Session s = bwtest::tiny_session();
    write_session(s, dir.path());
    LoadedSession loaded = load_session(dir.path());
    CHECK(loaded.session == s);
    CHECK(loaded.validation.ok());
}

TEST_CASE("missing panels.jsonl is MissingFile naming the file") {
    TempDir dir("ingest");
    write_minimal_dir(dir.path());
    std::filesystem::remove(dir / "panels.jsonl");
    try {
        load_session(dir.path());
        FAIL("loaded an incomplete directory");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingFile);
        CHECK(std::string(e.what()).find("panels.jsonl") != std::string::npos);
    }
}

TEST_CASE("offsets.json is applied before validation") {
    TempDir dir("ingest");
    Session s = bwtest::tiny_session();
    // out of order by 10 ms; the offset does not fix order, so use a drop instead
    s.gaze = {bwtest::gaze_at(10, 1, 1), bwtest::gaze_at(30, 1, 1)};
    write_session(s, dir.path());
    write_file(dir / "offsets.json", R"({"gaze":-20})");
    LoadedSession loaded = load_session(dir.path());
    REQUIRE(loaded.session.gaze.size() == 1);
    CHECK(loaded.session.gaze[0].t.ms == 10);
    CHECK(loaded.dropped_by_offsets == 1);
}

TEST_CASE("strict load rejects invariant violations, tolerant load reports them") {
    TempDir dir("ingest");
    Session s = bwtest::tiny_session();
    s.gaze = {bwtest::gaze_at(10, 1, 1), bwtest::gaze_at(5, 1, 1)};
    write_session(s, dir.path());
    CHECK(error_code([&] { load_session(dir.path()); }) == Errc::ValidationFailed);
    LoadOptions tolerant;
    tolerant.mode = ParseMode::Tolerant;
    LoadedSession loaded = load_session(dir.path(), tolerant);
    REQUIRE(loaded.validation.violations.size() == 1);
    CHECK(loaded.validation.violations[0].rule == "non-decreasing");
}

TEST_CASE("write then load round-trips field by field") {
    TempDir dir("ingest");
    Session s = bwtest::tiny_session();
    GazeSample invalid;
    invalid.t = {60};
    invalid.pd_left_mm = 2.5;
    s.gaze.push_back(invalid);
    s.gaze[1].direction = Vec3{0.6, 0.0, 0.8};
    s.gaze[1].depth_m = 0.65;
    PanelObservation sub = bwtest::obs_at(40, "sms", {10.25, 20.5, 300.75, 400.125}, 0.875);
    sub.subpanel_id = "lateral_speed";
    s.panels.push_back(sub);
    s.utterances.push_back({{2000}, {2500}, "port_control", "SMA Voyager, \"roger\" over"});
    write_session(s, dir.path());
    LoadedSession loaded = load_session(dir.path());
    CHECK(loaded.session == s);
}

TEST_CASE("tolerant output is a subsequence of strict output on the valid prefix") {
    std::ostringstream out;
    std::vector<GazeSample> gaze;
    for (int i = 0; i < 30; ++i) {
        gaze.push_back(bwtest::gaze_at(i * 20, i, 2 * i, 3.0 + i / 100.0));
    }
    write_gaze_jsonl(out, gaze);
    const std::string good = out.str();
    auto strict = parse_gaze_jsonl(std::string_view(good), ParseMode::Strict);
    CHECK(strict.items == gaze);

    std::string noisy;
    std::istringstream lines(good);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        noisy += line + "\n";
        if (++n % 7 == 0) {
            noisy += "{\"t_ms\": oops}\n\n";
        }
    }
    auto tolerant = parse_gaze_jsonl(std::string_view(noisy), ParseMode::Tolerant);
    CHECK(tolerant.skipped == 4);
    std::size_t j = 0;
    for (const GazeSample& g : strict.items) {
        if (j < tolerant.items.size() && tolerant.items[j] == g) {
            ++j;
        }
    }
    CHECK(j == tolerant.items.size());
}

TEST_CASE("parsing is deterministic") {
    std::string text = std::string(kGazeLine) + "\n" + kGazeLine + "\n";
    CHECK(parse_gaze_jsonl(std::string_view(text), ParseMode::Strict).items ==
          parse_gaze_jsonl(std::string_view(text), ParseMode::Strict).items);
}

TEST_CASE("load_config resolves auxiliary paths against the config directory") {
    TempDir dir("ingest");
    write_file(dir / "config.json", R"({"entities":"lex/entities.json","checklists":["c/a.json"]})");
    AnalysisConfig c = load_config(dir / "config.json");
    CHECK(std::filesystem::path(c.entities_path) == dir / "lex/entities.json");
    REQUIRE(c.checklist_paths.size() == 1);
    CHECK(std::filesystem::path(c.checklist_paths[0]) == dir / "c/a.json");
}

}
