/**
 * comms.hpp: Communication analysis over session transcripts.
 *
 * Entity extraction is a gazetteer: every lexicon alias (and the entry name
 * itself) is normalized and matched at token boundaries. When candidate
 * spans overlap, the longer one wins, then the earlier one.
 *
 * Checklist judging is rule based: an item is completed by the first
 * utterance starting inside [t_event, t_event + horizon] whose normalized
 * text contains at least one term from every all_of group. Contacting an
 * entity is not the same as completing an item; only utterance text counts.
 */
#pragma once

#include "bridgewatch/adapters.hpp"
#include "bridgewatch/session.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bridgewatch {

enum class EntityCategory { Internal, External };

const char* category_name(EntityCategory c);

struct LexiconEntry {
    std::string name;
    std::vector<std::string> aliases;
    EntityCategory category = EntityCategory::Internal;
};

class EntityLexicon {
public:
    EntityLexicon() = default;
    /// Throws InvalidLexicon on duplicate names, empty aliases, or an alias
    /// shared by two entries.
    explicit EntityLexicon(std::vector<LexiconEntry> entries);

    const std::vector<LexiconEntry>& entries() const { return entries_; }

    struct Alias {
        std::vector<std::string> tokens;
        std::string normalized;
        std::size_t entry = 0;
    };
    const std::vector<Alias>& aliases() const { return aliases_; }
    const std::vector<std::size_t>* aliases_starting_with(const std::string& token) const;

private:
    std::vector<LexiconEntry> entries_;
    std::vector<Alias> aliases_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
};

EntityLexicon parse_lexicon_json(std::string_view bytes);

struct EntityMention {
    std::size_t utterance_index = 0;
    std::size_t begin = 0;  // span in the normalized utterance text
    std::size_t end = 0;
    std::string name;
    EntityCategory category = EntityCategory::Internal;
    std::string alias;  // normalized alias that matched

    bool operator==(const EntityMention&) const = default;
};

std::vector<EntityMention> extract_entities(std::string_view text, std::size_t utterance_index,
                                            const EntityLexicon& lexicon);

struct EntityCount {
    std::string name;
    EntityCategory category = EntityCategory::Internal;
    std::size_t count = 0;

    bool operator==(const EntityCount&) const = default;
};

struct EntitySummary {
    /// Every lexicon entry, ordered by category (internal first), then
    /// descending count, then name.
    std::vector<EntityCount> entities;
    std::size_t internal_total = 0;
    std::size_t external_total = 0;

    bool operator==(const EntitySummary&) const = default;
};

EntitySummary entity_summary(std::span<const Utterance> utterances, const EntityLexicon& lexicon);

struct ChecklistItem {
    std::string id;
    std::string description;
    std::vector<std::vector<std::string>> all_of;
    std::optional<std::int64_t> horizon_ms;
};

struct ChecklistDefinition {
    std::string event_kind;
    std::vector<ChecklistItem> items;
};

/// Throws ParseError on schema errors, duplicate item ids, or empty groups.
ChecklistDefinition parse_checklist_json(std::string_view bytes);

struct ChecklistEvidence {
    std::optional<std::size_t> utterance_index;
    std::vector<std::string> matched_terms;
    std::string quote;

    bool operator==(const ChecklistEvidence&) const = default;
};

struct ChecklistResult {
    std::string item_id;
    std::string description;
    bool completed = false;
    std::optional<ChecklistEvidence> evidence;
    /// Set when an external judge gave no usable verdict for the item.
    bool unknown = false;

    bool operator==(const ChecklistResult&) const = default;
};

/// Reference rule backend. Throws ChecklistEventMismatch when the checklist
/// is bound to a different event kind.
std::vector<ChecklistResult> judge_checklist(const ChecklistDefinition& checklist,
                                             std::span<const Utterance> utterances, const TriggerEvent& event,
                                             std::int64_t horizon_ms);

class JudgeAdapter {
public:
    virtual ~JudgeAdapter() = default;
    virtual std::vector<ChecklistResult> judge(const ChecklistDefinition& checklist,
                                               std::span<const Utterance> utterances, const TriggerEvent& event,
                                               std::chrono::milliseconds timeout) = 0;
};

/// The rule backend behind the adapter interface.
class RuleJudge final : public JudgeAdapter {
public:
    explicit RuleJudge(std::int64_t horizon_ms) : horizon_ms_(horizon_ms) {}
    std::vector<ChecklistResult> judge(const ChecklistDefinition& checklist, std::span<const Utterance> utterances,
                                       const TriggerEvent& event, std::chrono::milliseconds timeout) override;

private:
    std::int64_t horizon_ms_;
};

/// Request: {"checklist": {...}, "utterances": [...], "event": {...}}.
std::string encode_judge_request(const ChecklistDefinition& checklist, std::span<const Utterance> utterances,
                                 const TriggerEvent& event);

/// Response: [{"item_id": str, "completed": bool, "evidence": str|null}].
/// Items the backend omits, or answers with a non-boolean verdict, become
/// not-completed with `unknown` set. Unknown or duplicate item ids throw
/// MalformedAdapterResponse.
std::vector<ChecklistResult> decode_judge_response(const ChecklistDefinition& checklist,
                                                   std::string_view response);

/// Speaks the wire contract over any JsonTransport (HTTP, pipe, in-process).
class WireJudge final : public JudgeAdapter {
public:
    explicit WireJudge(JsonTransport transport) : transport_(std::move(transport)) {}
    std::vector<ChecklistResult> judge(const ChecklistDefinition& checklist, std::span<const Utterance> utterances,
                                       const TriggerEvent& event, std::chrono::milliseconds timeout) override;

private:
    JsonTransport transport_;
};

struct JudgeOutcome {
    std::vector<ChecklistResult> results;
    bool fell_back = false;
    std::string adapter_error;
};

/// Uses `adapter` when given; on AdapterUnavailable or AdapterTimeout falls
/// back to the rule backend and records why.
JudgeOutcome judge_with_fallback(JudgeAdapter* adapter, const ChecklistDefinition& checklist,
                                 std::span<const Utterance> utterances, const TriggerEvent& event,
                                 std::int64_t horizon_ms,
                                 std::chrono::milliseconds timeout = kDefaultAdapterTimeout);

struct WerResult {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_token_count = 0;
    double wer = 0.0;

    std::size_t edits() const { return substitutions + deletions + insertions; }
    bool operator==(const WerResult&) const = default;
};

/// Minimal unit-cost alignment over normalized tokens. Backtrace ties prefer
/// substitution (or match), then insertion, then deletion. Throws
/// EmptyReference when the reference has no tokens.
WerResult word_error_rate(std::string_view reference, std::string_view hypothesis);
WerResult word_error_rate_tokens(std::span<const std::string> reference, std::span<const std::string> hypothesis);

}  // namespace bridgewatch
