#include "bridgewatch/comms.hpp"
#include "bridgewatch/error.hpp"
#include "bridgewatch/text.hpp"
#include "test_support.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <json.hpp>

#include <random>

using namespace bridgewatch;
using nlohmann::json;

namespace {

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

EntityLexicon voyage_lexicon() {
    return EntityLexicon({
        {"Keppel Control", {"keppel control"}, EntityCategory::External},
        {"SMA Voyager", {"sma voyager"}, EntityCategory::External},
        {"Engine Room", {"engine room"}, EntityCategory::Internal},
        {"Port Control", {"port control"}, EntityCategory::External},
        {"Engineer", {"engineer", "chief engineer"}, EntityCategory::Internal},
    });
}

ChecklistDefinition engine_room_checklist() {
    ChecklistDefinition c;
    c.event_kind = "main_engine_failure";
    c.items = {
        {"contacted_engine_room", "Contacted engine room to know status", {{"engine room"}, {"status", "condition"}}, {}},
        {"anchoring_standby", "Kept anchoring stations on stand by", {{"anchor", "anchoring"}, {"stand by", "standby"}}, {}},
    };
    return c;
}

const TriggerEvent kEvent{{120000}, "main_engine_failure", "Main Engine Failure"};

class EchoJudge final : public JudgeAdapter {
public:
    std::vector<ChecklistResult> judge(const ChecklistDefinition& c, std::span<const Utterance> u,
                                       const TriggerEvent& e, std::chrono::milliseconds) override {
        return judge_checklist(c, u, e, 900000);
    }
};

}  // namespace

TEST_SUITE("comms") {

TEST_CASE("normalize_text examples") {
    CHECK(normalize_text("Keppel Control, Keppel Control,").text == "keppel control keppel control");
    CHECK(normalize_text("").text.empty());
    CHECK(normalize_text("A--B").text == "a b");
    CHECK(normalize_text("  Over?  Out!  ").text == "over out");
}

TEST_CASE("normalize_text offsets map back into the source") {
    const std::string src = "  Port-Control: SMA Voyager.";
    NormalizedText n = normalize_text(src);
    REQUIRE(n.source_offsets.size() == n.text.size());
    for (std::size_t i = 0; i < n.text.size(); ++i) {
        char c = src[n.source_offsets[i]];
        if (n.text[i] != ' ') {
            CHECK(static_cast<char>(std::tolower(static_cast<unsigned char>(c))) == n.text[i]);
        }
    }
}

TEST_CASE("normalize_text agrees with the independent oracle") {
    std::mt19937_64 rng(3);
    const std::string alphabet = "abcXYZ .,?!;:'\"-\t\n01";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        for (int i = 0; i < trial % 40; ++i) {
            s += alphabet[pick(rng)];
        }
        CHECK(normalize_text(s).text == bwtest::normalize_oracle(s));
    }
}

TEST_CASE("entity extraction examples") {
    EntityLexicon lex = voyage_lexicon();
    auto m = extract_entities("keppel control this is sma voyager", 0, lex);
    REQUIRE(m.size() == 2);
    CHECK(m[0].name == "Keppel Control");
    CHECK(m[1].name == "SMA Voyager");
    CHECK(m[0].category == EntityCategory::External);
    CHECK(m[1].category == EntityCategory::External);

    auto er = extract_entities("engine room engine room", 3, lex);
    REQUIRE(er.size() == 2);
    CHECK(er[0].name == "Engine Room");
    CHECK(er[1].utterance_index == 3);
    CHECK(er[0].category == EntityCategory::Internal);

    CHECK(extract_entities("nothing to see here", 0, lex).empty());
}

TEST_CASE("longest alias wins and matches respect token boundaries") {
    EntityLexicon lex = voyage_lexicon();
    auto m = extract_entities("Chief Engineer, the engineers are busy", 0, lex);
    REQUIRE(m.size() == 1);
    CHECK(m[0].alias == "chief engineer");
    CHECK(m[0].begin == 0);
    CHECK(m[0].end == 14);
}

TEST_CASE("lexicon validation") {
    CHECK(error_code([] {
              EntityLexicon({{"A", {"x"}, EntityCategory::Internal}, {"A", {"y"}, EntityCategory::Internal}});
          }) == Errc::InvalidLexicon);
    CHECK(error_code([] { EntityLexicon({{"A", {""}, EntityCategory::Internal}}); }) == Errc::InvalidLexicon);
    CHECK(error_code([] {
              EntityLexicon({{"A", {"x"}, EntityCategory::Internal}, {"B", {"x"}, EntityCategory::External}});
          }) == Errc::InvalidLexicon);
    CHECK(error_code([] { parse_lexicon_json(R"([{"name":"A","aliases":["a"],"category":"other"}])"); }) ==
          Errc::InvalidLexicon);
}

TEST_CASE("entity fixture agrees with the hand-labelled spans") {
    EntityLexicon lex = parse_lexicon_json(read_file(bwtest::fixture("entities_50_lexicon.json")));
    json records = bwtest::load_json(bwtest::fixture("entities_50.json"));
    REQUIRE(records.size() == 50);
    for (const json& r : records) {
        const std::string text = r.at("text");
        CHECK(normalize_text(text).text == r.at("normalized").get<std::string>());
        auto got = extract_entities(text, r.at("index"), lex);
        const json& want = r.at("mentions");
        REQUIRE_MESSAGE(got.size() == want.size(), text);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].begin == want[i].at("begin").get<std::size_t>());
            CHECK(got[i].end == want[i].at("end").get<std::size_t>());
            CHECK(got[i].name == want[i].at("name").get<std::string>());
            CHECK(category_name(got[i].category) == want[i].at("category").get<std::string>());
        }
    }
}

TEST_CASE("property: spans never overlap and spell an alias of the entity") {
    EntityLexicon lex = parse_lexicon_json(read_file(bwtest::fixture("entities_50_lexicon.json")));
    std::vector<std::string> words = {"engine", "room", "port", "control", "keppel", "chief", "engineer", "tug",
                                      "boat",   "sea",  "falcon", "vts",   "over",   "this",  "is",       "master"};
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string text;
        for (int i = 0; i < 12; ++i) {
            text += words[pick(rng)] + (i % 3 == 0 ? ", " : " ");
        }
        const std::string norm = normalize_text(text).text;
        auto ms = extract_entities(text, 0, lex);
        for (std::size_t i = 0; i < ms.size(); ++i) {
            REQUIRE(ms[i].end <= norm.size());
            if (i > 0) {
                CHECK(ms[i - 1].end <= ms[i].begin);
            }
            const std::string span = norm.substr(ms[i].begin, ms[i].end - ms[i].begin);
            bool is_alias = false;
            for (const LexiconEntry& e : lex.entries()) {
                if (e.name == ms[i].name) {
                    for (const std::string& a : e.aliases) {
                        is_alias = is_alias || normalize_text(a).text == span;
                    }
                    is_alias = is_alias || normalize_text(e.name).text == span;
                }
            }
            CHECK_MESSAGE(is_alias, span);
        }
    }
}

TEST_CASE("entity summary counts and ordering") {
    EntityLexicon lex = voyage_lexicon();
    std::vector<Utterance> us = {
        {{0}, {1}, "s", "Engine room engine room"},
        {{2}, {3}, "s", "Engine room, Port Control"},
    };
    EntitySummary s = entity_summary(us, lex);
    CHECK(s.internal_total == 3);
    CHECK(s.external_total == 1);
    REQUIRE(s.entities.size() == 5);
    CHECK(s.entities[0] == EntityCount{"Engine Room", EntityCategory::Internal, 3});
    CHECK(s.entities[1] == EntityCount{"Engineer", EntityCategory::Internal, 0});
    CHECK(s.entities[2] == EntityCount{"Port Control", EntityCategory::External, 1});
    CHECK(s.entities[3].name == "Keppel Control");
    CHECK(s.entities[4].name == "SMA Voyager");

    EntitySummary empty = entity_summary({}, lex);
    CHECK(empty.internal_total == 0);
    CHECK(empty.external_total == 0);
    for (const EntityCount& c : empty.entities) {
        CHECK(c.count == 0);
    }
}

TEST_CASE("checklist item completed by a matching utterance after the event") {
    std::vector<Utterance> us = {
        {{125000}, {128000}, "subject", "Engine room, bridge, what is the status of the main engine"}};
    auto r = judge_checklist(engine_room_checklist(), us, kEvent, 900000);
    REQUIRE(r.size() == 2);
    CHECK(r[0].completed);
    REQUIRE(r[0].evidence.has_value());
    CHECK(r[0].evidence->utterance_index == std::optional<std::size_t>(0));
    CHECK(r[0].evidence->quote == us[0].text);
    CHECK_FALSE(r[1].completed);
    CHECK_FALSE(r[1].evidence.has_value());
}

TEST_CASE("matching utterance before the event does not count") {
    std::vector<Utterance> us = {{{60000}, {62000}, "subject", "Engine room, what is the status"}};
    CHECK_FALSE(judge_checklist(engine_room_checklist(), us, kEvent, 900000)[0].completed);
}

TEST_CASE("entity contact alone does not complete an item") {
    std::vector<Utterance> us = {{{130000}, {131000}, "subject", "Engine room, engine room, bridge calling"}};
    CHECK_FALSE(judge_checklist(engine_room_checklist(), us, kEvent, 900000)[0].completed);
}

TEST_CASE("checklist bound to another event kind") {
    TriggerEvent other{{0}, "collision", ""};
    CHECK(error_code([&] { judge_checklist(engine_room_checklist(), {}, other, 1000); }) ==
          Errc::ChecklistEventMismatch);
}

TEST_CASE("property: growing the horizon never un-completes an item") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::int64_t> when(0, 2000000);
    const char* texts[] = {"engine room status", "anchor stand by", "hello", "engine room condition please",
                           "anchoring standby now"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Utterance> us;
        for (int i = 0; i < 6; ++i) {
            std::int64_t t = when(rng);
            us.push_back({{t}, {t + 1000}, "s", texts[(trial + i) % 5]});
        }
        std::sort(us.begin(), us.end(), [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
        std::vector<bool> prev(2, false);
        for (std::int64_t h = 0; h <= 2000000; h += 100000) {
            auto r = judge_checklist(engine_room_checklist(), us, kEvent, h);
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (prev[i]) {
                    CHECK(r[i].completed);
                }
                prev[i] = r[i].completed;
            }
        }
    }
}

TEST_CASE("checklist json parsing") {
    ChecklistDefinition c = parse_checklist_json(R"({"event_kind":"main_engine_failure","items":[
        {"id":"a","description":"A","match":{"all_of":[["engine room"],["status"]]}},
        {"id":"b","description":"B","match":{"all_of":[["tug"]]},"horizon_ms":60000}]})");
    REQUIRE(c.items.size() == 2);
    CHECK(c.items[1].horizon_ms == std::optional<std::int64_t>(60000));
    CHECK_THROWS_AS(parse_checklist_json(R"({"event_kind":"x","items":[{"id":"a","match":{"all_of":[[]]}}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_checklist_json(R"({"event_kind":"x","items":[
        {"id":"a","description":"","match":{"all_of":[["t"]]}},{"id":"a","description":"","match":{"all_of":[["t"]]}}]})"),
                    ParseError);
}

TEST_CASE("adapter echoing the rule backend is identical") {
    std::vector<Utterance> us = {{{125000}, {128000}, "s", "Engine room, status please"}};
    EchoJudge echo;
    JudgeOutcome out = judge_with_fallback(&echo, engine_room_checklist(), us, kEvent, 900000);
    CHECK_FALSE(out.fell_back);
    CHECK(out.results == judge_checklist(engine_room_checklist(), us, kEvent, 900000));
}

TEST_CASE("wire judge round trip") {
    std::vector<Utterance> us = {{{125000}, {128000}, "s", "Engine room, status please"}};
    std::string seen_request;
    WireJudge wire([&](const std::string& req, std::chrono::milliseconds) {
        seen_request = req;
        return std::string(R"([{"item_id":"contacted_engine_room","completed":true,"evidence":"Engine room, status please"},
                               {"item_id":"anchoring_standby","completed":false,"evidence":null}])");
    });
    auto r = wire.judge(engine_room_checklist(), us, kEvent, std::chrono::milliseconds(100));
    json req = json::parse(seen_request);
    CHECK(req.contains("checklist"));
    CHECK(req.at("utterances").size() == 1);
    CHECK(req.at("event").at("kind") == "main_engine_failure");
    REQUIRE(r.size() == 2);
    CHECK(r[0].completed);
    CHECK(r[0].evidence->quote == "Engine room, status please");
    CHECK_FALSE(r[1].completed);
    CHECK_FALSE(r[1].unknown);
}

TEST_CASE("judge responses are normalized") {
    ChecklistDefinition c = engine_room_checklist();
    auto r = decode_judge_response(c, R"([{"item_id":"contacted_engine_room","completed":"maybe"}])");
    CHECK_FALSE(r[0].completed);
    CHECK(r[0].unknown);
    CHECK(r[1].unknown);
    CHECK(error_code([&] { decode_judge_response(c, R"([{"item_id":"nope","completed":true}])"); }) ==
          Errc::MalformedAdapterResponse);
    CHECK(error_code([&] {
              decode_judge_response(c, R"([{"item_id":"anchoring_standby","completed":true},
                                           {"item_id":"anchoring_standby","completed":true}])");
          }) == Errc::MalformedAdapterResponse);
    CHECK(error_code([&] { decode_judge_response(c, "{not json"); }) == Errc::MalformedAdapterResponse);
}

TEST_CASE("timeout and unavailable adapters fall back to the rule backend") {
    std::vector<Utterance> us = {{{125000}, {128000}, "s", "Engine room, status please"}};
    for (Errc code : {Errc::AdapterTimeout, Errc::AdapterUnavailable}) {
        WireJudge wire([code](const std::string&, std::chrono::milliseconds) -> std::string {
            throw Error(code, "backend down");
        });
        CHECK(error_code([&] { wire.judge(engine_room_checklist(), us, kEvent, std::chrono::milliseconds(1)); }) ==
              code);
        JudgeOutcome out = judge_with_fallback(&wire, engine_room_checklist(), us, kEvent, 900000);
        CHECK(out.fell_back);
        CHECK_FALSE(out.adapter_error.empty());
        CHECK(out.results == judge_checklist(engine_room_checklist(), us, kEvent, 900000));
    }
    WireJudge bad([](const std::string&, std::chrono::milliseconds) { return std::string("[1]"); });
    CHECK(error_code([&] { judge_with_fallback(&bad, engine_room_checklist(), us, kEvent, 900000); }) ==
          Errc::MalformedAdapterResponse);
}

TEST_CASE("WER basics") {
    CHECK(word_error_rate("over and out", "Over, and out.").wer == 0.0);
    WerResult del = word_error_rate("one two three four", "");
    CHECK(del.deletions == 4);
    CHECK(del.wer == 1.0);
    CHECK(error_code([] { word_error_rate(" ,. ", "x"); }) == Errc::EmptyReference);
    WerResult sub = word_error_rate("a b c", "a x c");
    CHECK(sub.substitutions == 1);
    CHECK(sub.edits() == 1);
}

TEST_CASE("WER tie-break prefers substitution, then insertion") {
    // "a" vs "b c": one substitution plus one insertion, never a deletion
    WerResult r = word_error_rate("a", "b c");
    CHECK(r.substitutions == 1);
    CHECK(r.insertions == 1);
    CHECK(r.deletions == 0);
}

TEST_CASE("WER equals brute-force edit distance on short sequences") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len(0, 6);
    std::uniform_int_distribution<int> tok(0, 3);
    const std::vector<std::string> vocab = {"port", "control", "engine", "room"};
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> ref(1 + len(rng) % 6), hyp(len(rng));
        for (auto& t : ref) t = vocab[tok(rng)];
        for (auto& t : hyp) t = vocab[tok(rng)];
        WerResult r = word_error_rate_tokens(ref, hyp);
        CHECK(r.edits() == bwtest::brute_force_edits(ref, hyp));
        CHECK(r.ref_token_count == ref.size());
        CHECK(static_cast<long>(r.deletions) - static_cast<long>(r.insertions) ==
              static_cast<long>(ref.size()) - static_cast<long>(hyp.size()));
        CHECK(r.wer == doctest::Approx(static_cast<double>(r.edits()) / ref.size()));
    }
}

TEST_CASE("property: padding the hypothesis by k tokens adds k edits") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> tok(0, 4);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> ref(1 + trial % 8);
        for (auto& t : ref) t = vocab[tok(rng)];
        std::vector<std::string> hyp = ref;
        std::size_t k = trial % 5;
        for (std::size_t i = 0; i < k; ++i) {
            hyp.insert(hyp.begin() + static_cast<long>((i * 7) % (hyp.size() + 1)), "pad");
        }
        WerResult r = word_error_rate_tokens(ref, hyp);
        CHECK(r.edits() == k);
        CHECK((r.wer == 0.0) == (k == 0));
    }
}

TEST_CASE("published ASR pairs: biased transcription beats the original on both rows") {
    json rows = bwtest::load_json(bwtest::fixture("asr_pairs.json"));
    REQUIRE(rows.size() == 2);
    for (const json& row : rows) {
        const std::string ref = row.at("reference");
        const std::string orig = row.at("original");
        const std::string biased = row.at("biased");
        WerResult wo = word_error_rate(ref, orig);
        WerResult wb = word_error_rate(ref, biased);
        auto rt = bwtest::tokens_oracle(ref);
        CHECK(wo.edits() == bwtest::memo_edits(rt, bwtest::tokens_oracle(orig)));
        CHECK(wb.edits() == bwtest::memo_edits(rt, bwtest::tokens_oracle(biased)));
        CHECK(wb.wer < wo.wer);
    }
}

}
