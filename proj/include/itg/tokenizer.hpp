#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itg/document.hpp"

namespace itg {

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const Token> tokens) const;
};

// Splits on whitespace and peels terminal punctuation off each word, so
// "Monday." becomes {"Monday", "."}.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
};

// Subword pieces use the WordPiece convention: a token starting with "##"
// continues the word of the token before it.
bool is_continuation(std::string_view token);

// Group id per token; tokens of one complete word share an id. Ids are
// increasing from 0.
std::vector<std::size_t> word_groups(std::span<const Token> tokens);

Document make_document(std::string_view text, const Tokenizer& tok = WhitespaceTokenizer{},
                       std::size_t capacity = kDefaultCapacity);

}  // namespace itg
