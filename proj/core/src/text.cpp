#include "bridgewatch/text.hpp"

namespace bridgewatch {

namespace {

bool is_separator(char c) {
    switch (c) {
        case '.': case ',': case '?': case '!': case ';': case ':':
        case '\'': case '"': case '-':
        case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
            return true;
        default:
            return false;
    }
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

NormalizedText normalize_text(std::string_view text) {
    NormalizedText out;
    out.text.reserve(text.size());
    out.source_offsets.reserve(text.size());
    bool pending_space = false;
    std::size_t space_at = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (is_separator(c)) {
            if (!pending_space) {
                pending_space = true;
                space_at = i;
            }
            continue;
        }
        if (pending_space && !out.text.empty()) {
            out.text.push_back(' ');
            out.source_offsets.push_back(space_at);
        }
        pending_space = false;
        out.text.push_back(ascii_lower(c));
        out.source_offsets.push_back(i);
    }
    return out;
}

std::vector<TokenSpan> token_spans(std::string_view normalized) {
    std::vector<TokenSpan> spans;
    std::size_t start = 0;
    while (start < normalized.size()) {
        std::size_t end = normalized.find(' ', start);
        if (end == std::string_view::npos) {
            end = normalized.size();
        }
        if (end > start) {
            spans.push_back({start, end});
        }
        start = end + 1;
    }
    return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
    NormalizedText norm = normalize_text(text);
    std::vector<std::string> tokens;
    for (const TokenSpan& s : token_spans(norm.text)) {
        tokens.push_back(norm.text.substr(s.begin, s.end - s.begin));
    }
    return tokens;
}

}  // namespace bridgewatch
