#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

/// Lowercased text with the punctuation .,?!;:'"- turned into spaces,
/// whitespace runs collapsed to one space, and both ends trimmed.
/// source_offsets[i] is the byte offset in the original text of text[i].
struct NormalizedText {
    std::string text;
    std::vector<std::size_t> source_offsets;
};

NormalizedText normalize_text(std::string_view text);

struct TokenSpan {
    std::size_t begin = 0;  // byte offsets into the normalized text
    std::size_t end = 0;
};

/// Splits already-normalized text on single spaces.
std::vector<TokenSpan> token_spans(std::string_view normalized);
std::vector<std::string> tokenize(std::string_view text);

}  // namespace bridgewatch
