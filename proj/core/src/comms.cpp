#include "bridgewatch/comms.hpp"

#include "bridgewatch/error.hpp"
#include "bridgewatch/text.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace bridgewatch {

using detail::json;
using detail::ordered_json;

const char* category_name(EntityCategory c) {
    return c == EntityCategory::Internal ? "internal" : "external";
}

EntityLexicon::EntityLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> names;
    std::map<std::string, std::size_t> owner;
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        const LexiconEntry& entry = entries_[e];
        if (entry.name.empty() || !names.insert(entry.name).second) {
            throw Error(Errc::InvalidLexicon, "InvalidLexicon: duplicate or empty name '" + entry.name + "'");
        }
        std::vector<std::string> forms = entry.aliases;
        forms.push_back(entry.name);
        for (const std::string& form : forms) {
            std::string norm = normalize_text(form).text;
            if (norm.empty()) {
                throw Error(Errc::InvalidLexicon, "InvalidLexicon: empty alias for '" + entry.name + "'");
            }
            auto [it, inserted] = owner.emplace(norm, e);
            if (!inserted) {
                if (it->second != e) {
                    throw Error(Errc::InvalidLexicon, "InvalidLexicon: alias '" + norm + "' maps to both '" +
                                                          entries_[it->second].name + "' and '" + entry.name + "'");
                }
                continue;
            }
            Alias alias{tokenize(norm), norm, e};
            by_first_token_[alias.tokens.front()].push_back(aliases_.size());
            aliases_.push_back(std::move(alias));
        }
    }
}

const std::vector<std::size_t>* EntityLexicon::aliases_starting_with(const std::string& token) const {
    auto it = by_first_token_.find(token);
    return it == by_first_token_.end() ? nullptr : &it->second;
}

EntityLexicon parse_lexicon_json(std::string_view bytes) {
    auto entries = detail::read_document(bytes, [](const json& doc) {
        detail::as_array(doc, "entities");
        std::vector<LexiconEntry> out;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            std::string path = detail::index_path("", i);
            LexiconEntry e;
            e.name = detail::string_field(doc[i], "name", path);
            if (const json* aliases = detail::opt_field(doc[i], "aliases")) {
                detail::as_array(*aliases, path + ".aliases");
                for (std::size_t j = 0; j < aliases->size(); ++j) {
                    e.aliases.push_back(detail::as_string((*aliases)[j], detail::index_path(path + ".aliases", j)));
                }
            }
            std::string cat = detail::string_field(doc[i], "category", path);
            if (cat == "internal") {
                e.category = EntityCategory::Internal;
            } else if (cat == "external") {
                e.category = EntityCategory::External;
            } else {
                detail::field_fail(Errc::InvalidLexicon, path + ".category: expected internal or external");
            }
            out.push_back(std::move(e));
        }
        return out;
    });
    return EntityLexicon(std::move(entries));
}

std::vector<EntityMention> extract_entities(std::string_view text, std::size_t utterance_index,
                                            const EntityLexicon& lexicon) {
    const std::string norm = normalize_text(text).text;
    const std::vector<TokenSpan> spans = token_spans(norm);
    std::vector<std::string> tokens;
    tokens.reserve(spans.size());
    for (const TokenSpan& s : spans) {
        tokens.push_back(norm.substr(s.begin, s.end - s.begin));
    }

    struct Candidate {
        std::size_t begin;
        std::size_t end;
        std::size_t alias;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto* starting = lexicon.aliases_starting_with(tokens[i]);
        if (starting == nullptr) {
            continue;
        }
        for (std::size_t a : *starting) {
            const auto& alias_tokens = lexicon.aliases()[a].tokens;
            if (i + alias_tokens.size() > tokens.size()) {
                continue;
            }
            if (std::equal(alias_tokens.begin(), alias_tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                candidates.push_back({spans[i].begin, spans[i + alias_tokens.size() - 1].end, a});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        std::size_t la = a.end - a.begin;
        std::size_t lb = b.end - b.begin;
        if (la != lb) {
            return la > lb;
        }
        return a.begin != b.begin ? a.begin < b.begin : a.alias < b.alias;
    });

    std::vector<EntityMention> out;
    for (const Candidate& c : candidates) {
        bool overlaps = std::any_of(out.begin(), out.end(), [&](const EntityMention& m) {
            return c.begin < m.end && m.begin < c.end;
        });
        if (overlaps) {
            continue;
        }
        const auto& alias = lexicon.aliases()[c.alias];
        const LexiconEntry& entry = lexicon.entries()[alias.entry];
        out.push_back({utterance_index, c.begin, c.end, entry.name, entry.category, alias.normalized});
    }
    std::sort(out.begin(), out.end(), [](const EntityMention& a, const EntityMention& b) { return a.begin < b.begin; });
    return out;
}

EntitySummary entity_summary(std::span<const Utterance> utterances, const EntityLexicon& lexicon) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < utterances.size(); ++i) {
        for (const EntityMention& m : extract_entities(utterances[i].text, i, lexicon)) {
            ++counts[m.name];
        }
    }
    EntitySummary summary;
    for (const LexiconEntry& e : lexicon.entries()) {
        std::size_t n = counts[e.name];
        summary.entities.push_back({e.name, e.category, n});
        (e.category == EntityCategory::Internal ? summary.internal_total : summary.external_total) += n;
    }
    std::sort(summary.entities.begin(), summary.entities.end(), [](const EntityCount& a, const EntityCount& b) {
        if (a.category != b.category) {
            return a.category == EntityCategory::Internal;
        }
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return a.name < b.name;
    });
    return summary;
}

ChecklistDefinition parse_checklist_json(std::string_view bytes) {
    return detail::read_document(bytes, [](const json& doc) {
        ChecklistDefinition def;
        def.event_kind = detail::string_field(doc, "event_kind", "");
        if (def.event_kind.empty()) {
            detail::field_fail(Errc::OutOfRangeValue, "event_kind: must be non-empty");
        }
        const json& items = detail::as_array(detail::field(doc, "items", ""), "items");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::string path = detail::index_path("items", i);
            ChecklistItem item;
            item.id = detail::string_field(items[i], "id", path);
            if (item.id.empty() || !ids.insert(item.id).second) {
                detail::field_fail(Errc::SchemaViolation, path + ".id: duplicate or empty id '" + item.id + "'");
            }
            item.description = detail::opt_string(items[i], "description", path).value_or(item.id);
            const json& match = detail::field(items[i], "match", path);
            const json& groups = detail::as_array(detail::field(match, "all_of", path + ".match"), path + ".match.all_of");
            if (groups.empty()) {
                detail::field_fail(Errc::SchemaViolation, path + ".match.all_of: must be non-empty");
            }
            for (std::size_t g = 0; g < groups.size(); ++g) {
                std::string gp = detail::index_path(path + ".match.all_of", g);
                detail::as_array(groups[g], gp);
                std::vector<std::string> terms;
                for (std::size_t t = 0; t < groups[g].size(); ++t) {
                    std::string term = detail::as_string(groups[g][t], detail::index_path(gp, t));
                    if (normalize_text(term).text.empty()) {
                        detail::field_fail(Errc::SchemaViolation, detail::index_path(gp, t) + ": empty term");
                    }
                    terms.push_back(std::move(term));
                }
                if (terms.empty()) {
                    detail::field_fail(Errc::SchemaViolation, gp + ": group must be non-empty");
                }
                item.all_of.push_back(std::move(terms));
            }
            if (const json* h = detail::opt_field(items[i], "horizon_ms")) {
                item.horizon_ms = detail::as_int(*h, path + ".horizon_ms");
            }
            def.items.push_back(std::move(item));
        }
        return def;
    });
}

namespace {

// Term found at token boundaries of the normalized utterance.
bool contains_term(const std::string& padded_text, const std::string& term) {
    std::string needle = " " + normalize_text(term).text + " ";
    return padded_text.find(needle) != std::string::npos;
}

}  // namespace

std::vector<ChecklistResult> judge_checklist(const ChecklistDefinition& checklist,
                                             std::span<const Utterance> utterances, const TriggerEvent& event,
                                             std::int64_t horizon_ms) {
    if (checklist.event_kind != event.kind) {
        throw Error(Errc::ChecklistEventMismatch, "ChecklistEventMismatch: checklist for '" + checklist.event_kind +
                                                      "' applied to event '" + event.kind + "'");
    }
    std::vector<std::string> padded;
    padded.reserve(utterances.size());
    for (const Utterance& u : utterances) {
        padded.push_back(" " + normalize_text(u.text).text + " ");
    }

    std::vector<ChecklistResult> results;
    for (const ChecklistItem& item : checklist.items) {
        ChecklistResult r{item.id, item.description};
        const std::int64_t horizon = item.horizon_ms.value_or(horizon_ms);
        for (std::size_t i = 0; i < utterances.size() && !r.completed; ++i) {
            const std::int64_t t = utterances[i].t_start.ms;
            if (t < event.t.ms || t > event.t.ms + horizon) {
                continue;
            }
            std::vector<std::string> matched;
            bool all = true;
            for (const auto& group : item.all_of) {
                auto hit = std::find_if(group.begin(), group.end(),
                                        [&](const std::string& term) { return contains_term(padded[i], term); });
                if (hit == group.end()) {
                    all = false;
                    break;
                }
                matched.push_back(*hit);
            }
            if (all) {
                r.completed = true;
                r.evidence = ChecklistEvidence{i, std::move(matched), utterances[i].text};
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<ChecklistResult> RuleJudge::judge(const ChecklistDefinition& checklist,
                                              std::span<const Utterance> utterances, const TriggerEvent& event,
                                              std::chrono::milliseconds /*timeout*/) {
    return judge_checklist(checklist, utterances, event, horizon_ms_);
}

std::string encode_judge_request(const ChecklistDefinition& checklist, std::span<const Utterance> utterances,
                                 const TriggerEvent& event) {
    ordered_json req;
    ordered_json items = ordered_json::array();
    for (const ChecklistItem& item : checklist.items) {
        items.push_back({{"id", item.id}, {"description", item.description}, {"match", {{"all_of", item.all_of}}}});
    }
    req["checklist"] = {{"event_kind", checklist.event_kind}, {"items", std::move(items)}};
    ordered_json utts = ordered_json::array();
    for (const Utterance& u : utterances) {
        utts.push_back({{"t0_ms", u.t_start.ms}, {"t1_ms", u.t_end.ms}, {"speaker", u.speaker}, {"text", u.text}});
    }
    req["utterances"] = std::move(utts);
    req["event"] = {{"t_ms", event.t.ms}, {"kind", event.kind}, {"label", event.label}};
    return req.dump();
}

std::vector<ChecklistResult> decode_judge_response(const ChecklistDefinition& checklist, std::string_view response) {
    auto malformed = [](const std::string& why) {
        return Error(Errc::MalformedAdapterResponse, "MalformedAdapterResponse: " + why);
    };
    json doc = json::parse(response.begin(), response.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
        throw malformed("expected a JSON array");
    }
    std::map<std::string, ChecklistResult> by_id;
    for (const ChecklistItem& item : checklist.items) {
        by_id[item.id] = ChecklistResult{item.id, item.description, false, std::nullopt, true};
    }
    std::set<std::string> seen;
    for (const json& rec : doc) {
        auto id_it = rec.is_object() ? rec.find("item_id") : rec.end();
        if (!rec.is_object() || id_it == rec.end() || !id_it->is_string()) {
            throw malformed("entry without string item_id");
        }
        std::string id = id_it->get<std::string>();
        auto target = by_id.find(id);
        if (target == by_id.end()) {
            throw malformed("item id '" + id + "' not in checklist");
        }
        if (!seen.insert(id).second) {
            throw malformed("item id '" + id + "' repeated");
        }
        auto done = rec.find("completed");
        if (done == rec.end() || !done->is_boolean()) {
            continue;
        }
        ChecklistResult& r = target->second;
        r.unknown = false;
        r.completed = done->get<bool>();
        auto ev = rec.find("evidence");
        if (ev != rec.end() && ev->is_string()) {
            r.evidence = ChecklistEvidence{std::nullopt, {}, ev->get<std::string>()};
        }
    }
    std::vector<ChecklistResult> out;
    for (const ChecklistItem& item : checklist.items) {
        out.push_back(std::move(by_id[item.id]));
    }
    return out;
}

std::vector<ChecklistResult> WireJudge::judge(const ChecklistDefinition& checklist,
                                              std::span<const Utterance> utterances, const TriggerEvent& event,
                                              std::chrono::milliseconds timeout) {
    if (!transport_) {
        throw Error(Errc::AdapterUnavailable, "AdapterUnavailable: no transport configured");
    }
    return decode_judge_response(checklist, transport_(encode_judge_request(checklist, utterances, event), timeout));
}

JudgeOutcome judge_with_fallback(JudgeAdapter* adapter, const ChecklistDefinition& checklist,
                                 std::span<const Utterance> utterances, const TriggerEvent& event,
                                 std::int64_t horizon_ms, std::chrono::milliseconds timeout) {
    JudgeOutcome out;
    if (adapter != nullptr) {
        try {
            out.results = adapter->judge(checklist, utterances, event, timeout);
            return out;
        } catch (const Error& e) {
            if (e.code() != Errc::AdapterUnavailable && e.code() != Errc::AdapterTimeout) {
                throw;
            }
            out.fell_back = true;
            out.adapter_error = e.what();
        }
    }
    out.results = judge_checklist(checklist, utterances, event, horizon_ms);
    return out;
}

WerResult word_error_rate_tokens(std::span<const std::string> ref, std::span<const std::string> hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    if (n == 0) {
        throw Error(Errc::EmptyReference, "EmptyReference: reference has no tokens");
    }
    std::vector<std::size_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) {
        at(i, 0) = i;
    }
    for (std::size_t j = 0; j <= m; ++j) {
        at(0, j) = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
        }
    }

    WerResult r;
    r.ref_token_count = n;
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            bool same = ref[i - 1] == hyp[j - 1];
            if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
                r.substitutions += same ? 0 : 1;
                --i;
                --j;
                continue;
            }
        }
        if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
            ++r.insertions;
            --j;
        } else {
            ++r.deletions;
            --i;
        }
    }
    r.wer = static_cast<double>(r.edits()) / static_cast<double>(n);
    return r;
}

WerResult word_error_rate(std::string_view reference, std::string_view hypothesis) {
    std::vector<std::string> ref = tokenize(reference);
    std::vector<std::string> hyp = tokenize(hypothesis);
    return word_error_rate_tokens(ref, hyp);
}

}  // namespace bridgewatch
