#include "itg/document.hpp"

#include <stdexcept>

#include "itg/edit.hpp"

namespace itg {

std::string_view to_string(Mark m) {
  switch (m) {
    case Mark::None: return "none";
    case Mark::UserInserted: return "user_inserted";
    case Mark::AgentInserted: return "agent_inserted";
    case Mark::DeletedGhost: return "deleted_ghost";
  }
  return "none";
}

Mark mark_from_string(std::string_view s) {
  if (s == "none") return Mark::None;
  if (s == "user_inserted") return Mark::UserInserted;
  if (s == "agent_inserted") return Mark::AgentInserted;
  if (s == "deleted_ghost") return Mark::DeletedGhost;
  throw std::invalid_argument("unknown mark: " + std::string(s));
}

std::string_view to_string(Actor a) {
  switch (a) {
    case Actor::None: return "none";
    case Actor::User: return "user";
    case Actor::Agent: return "agent";
  }
  return "none";
}

Mark mark_for(Actor a) {
  switch (a) {
    case Actor::User: return Mark::UserInserted;
    case Actor::Agent: return Mark::AgentInserted;
    case Actor::None: break;
  }
  return Mark::None;
}

bool is_blank(std::string_view t) { return t == kBlank; }

Document::Document(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("document capacity must be positive");
}

Document::Document(std::vector<Token> tokens, std::size_t capacity)
    : Document(std::move(tokens), {}, capacity) {}

Document::Document(std::vector<Token> tokens, std::vector<Mark> marks, std::size_t capacity)
    : capacity_(capacity), tokens_(std::move(tokens)), marks_(std::move(marks)) {
  if (capacity_ == 0) throw std::invalid_argument("document capacity must be positive");
  if (tokens_.size() > capacity_) {
    throw CapacityExceeded("document has " + std::to_string(tokens_.size()) +
                           " tokens but capacity " + std::to_string(capacity_));
  }
  for (const auto& t : tokens_) {
    if (t.empty() || is_blank(t)) throw std::invalid_argument("blank token inside document content");
  }
  if (marks_.empty()) marks_.assign(tokens_.size(), Mark::None);
  if (marks_.size() != tokens_.size()) throw std::invalid_argument("marks and tokens differ in length");
}

std::vector<Token> Document::padded() const {
  std::vector<Token> out(tokens_);
  out.resize(capacity_, Token(kBlank));
  return out;
}

std::string Document::to_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Document Document::with_marks_cleared() const { return Document(tokens_, capacity_); }

}  // namespace itg
