#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace itg {

using Token = std::string;

// Internal spelling of the padding symbol. Never part of document content and
// never written into user-visible text.
inline constexpr std::string_view kBlank = "␣BLANK␣";
inline constexpr std::size_t kDefaultCapacity = 64;

enum class Mark : std::uint8_t { None, UserInserted, AgentInserted, DeletedGhost };
enum class Actor : std::uint8_t { None, User, Agent };

std::string_view to_string(Mark m);
Mark mark_from_string(std::string_view s);
std::string_view to_string(Actor a);
Mark mark_for(Actor a);

// A bounded token sequence. Content is stored contiguously; the blank suffix is
// implicit and only materialized by padded().
class Document {
 public:
  Document() : Document(kDefaultCapacity) {}
  explicit Document(std::size_t capacity);
  Document(std::vector<Token> tokens, std::size_t capacity = kDefaultCapacity);
  Document(std::vector<Token> tokens, std::vector<Mark> marks, std::size_t capacity = kDefaultCapacity);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  bool full() const noexcept { return tokens_.size() == capacity_; }

  std::span<const Token> tokens() const noexcept { return tokens_; }
  std::span<const Mark> marks() const noexcept { return marks_; }

  // 0-based content access.
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  Mark mark(std::size_t i) const { return marks_[i]; }

  // Exactly capacity() tokens, content followed by blanks.
  std::vector<Token> padded() const;

  // Space-joined content, blanks stripped.
  std::string to_text() const;

  Document with_marks_cleared() const;

  // Content equality; provenance marks are state-encoding metadata and do not
  // participate.
  friend bool operator==(const Document& a, const Document& b) {
    return a.capacity_ == b.capacity_ && a.tokens_ == b.tokens_;
  }

 private:
  friend class DocumentEditor;

  std::size_t capacity_;
  std::vector<Token> tokens_;
  std::vector<Mark> marks_;
};

bool is_blank(std::string_view t);

}  // namespace itg
