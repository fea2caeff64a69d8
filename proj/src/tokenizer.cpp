#include "itg/tokenizer.hpp"

#include <cctype>

namespace itg {

namespace {

bool is_terminal_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':': return true;
    default: return false;
  }
}

}  // namespace

std::string Tokenizer::detokenize(std::span<const Token> tokens) const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<Token> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;

    std::string_view word = text.substr(i, j - i);
    std::size_t end = word.size();
    while (end > 0 && is_terminal_punct(word[end - 1])) --end;
    if (end > 0) out.emplace_back(word.substr(0, end));
    for (std::size_t k = end; k < word.size(); ++k) out.emplace_back(1, word[k]);
    i = j;
  }
  return out;
}

bool is_continuation(std::string_view token) { return token.size() > 2 && token.starts_with("##"); }

std::vector<std::size_t> word_groups(std::span<const Token> tokens) {
  std::vector<std::size_t> groups;
  groups.reserve(tokens.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && is_continuation(tokens[i])) {
      groups.push_back(groups.back());
    } else {
      groups.push_back(next++);
    }
  }
  return groups;
}

Document make_document(std::string_view text, const Tokenizer& tok, std::size_t capacity) {
  return Document(tok.tokenize(text), capacity);
}

}  // namespace itg
