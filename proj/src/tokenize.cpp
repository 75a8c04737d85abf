#include "sva/tokenize.hpp"

#include <cctype>

namespace sva {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

bool is_stripped_punct(unsigned char c) {
  switch (c) {
    case '.':
    case ',':
    case '!':
    case '?':
    case ';':
    case ':':
    case '"':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    // em dash (U+2014) separates words
    if (c == 0xE2 && i + 2 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x94) {
      cleaned += ' ';
      i += 2;
      continue;
    }
    if (is_stripped_punct(c)) {
      cleaned += ' ';
      continue;
    }
    if (c == '\'') {
      const bool intra_word = i > 0 && i + 1 < text.size() &&
                              is_word_char(static_cast<unsigned char>(text[i - 1])) &&
                              is_word_char(static_cast<unsigned char>(text[i + 1]));
      cleaned += intra_word ? '\'' : ' ';
      continue;
    }
    cleaned += static_cast<char>(std::tolower(c));
  }

  std::vector<std::string> tokens;
  std::string current;
  for (const char c : cleaned) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current += c;
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

}  // namespace sva
