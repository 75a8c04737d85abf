#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sva {

// Tokenization used for embedding lookup: lowercase, strip the punctuation
// characters . , ! ? ; : " and em dashes, keep apostrophes only between
// word characters, split on whitespace. Deterministic and parser-free.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace sva
