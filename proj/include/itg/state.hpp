#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "itg/document.hpp"
#include "itg/edit.hpp"
#include "itg/similarity.hpp"

namespace itg {

enum class DiffLabel : std::uint8_t { Kept, AgentInserted, AgentSubstituted, AgentDeleted, UserInserted };

std::string_view to_string(DiffLabel l);
DiffLabel diff_label_from_string(std::string_view s);

// One token of the diff over U_h. Ghosts (AgentDeleted) are not part of U_h;
// every other entry is, in order.
struct DiffEntry {
  Token word;
  DiffLabel label = DiffLabel::Kept;
  bool user_ever = false;  // carries a user insertion from any earlier turn
  Token replaced;          // previous word for AgentSubstituted

  bool visible() const noexcept { return label != DiffLabel::AgentDeleted; }
  friend bool operator==(const DiffEntry&, const DiffEntry&) = default;
};

// What the agent sees at round h. The goal is never part of it.
struct PolicyState {
  std::size_t h = 1;
  Document prev_user;   // U_{h-1}
  Document prev_agent;  // A_{h-1}
  Document user;        // U_h, with provenance marks
  std::vector<Edit> user_edits;  // A_{h-1} -> U_h
  std::vector<DiffEntry> diff;
  // Every word the user has inserted so far, with multiplicity. Survives
  // later deletions.
  std::map<Token, std::size_t> user_words;

  bool user_inserted(const Token& w) const { return user_words.count(w) > 0; }
};

// Diff labels when the agent's edits U_{h-1} -> A_{h-1} are known. An
// insertion lands right after visible token l-1, ahead of any ghosts there.
std::vector<DiffEntry> diff_from_edits(const Document& prev_user, std::span<const Edit> agent_edits,
                                       std::span<const Edit> user_edits, const Document& user);

// Same labels recovered from align(U_{h-1}, A_{h-1}), for agents that rewrite
// the whole draft.
std::vector<DiffEntry> diff_from_alignment(const Document& prev_user, const Document& prev_agent,
                                           std::span<const Edit> user_edits, const Document& user,
                                           const SimilarityProvider& sim);

// `to` with marks carried over from `from` on aligned matches; every other
// token is marked agent-inserted.
Document inherit_marks(const Document& from, const Document& to, const SimilarityProvider& sim);

}  // namespace itg
