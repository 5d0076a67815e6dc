#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eis::text {

// ASCII case-fold; bytes outside ASCII pass through untouched.
std::string fold_case(std::string_view s);

// Case-fold and strip ASCII punctuation/whitespace from a single token.
// "Zzz-Absent" -> "zzzabsent". Non-ASCII bytes are kept.
std::string normalize_term(std::string_view token);

// Whitespace split followed by normalize_term; empty results dropped.
// This is the tokenisation used for the corpus term index.
std::vector<std::string> index_tokens(std::string_view s);

// Word split for free text (dialogue, query strings): case-folded, every
// ASCII non-alphanumeric byte is a separator.
std::vector<std::string> words(std::string_view s);

}  // namespace eis::text
