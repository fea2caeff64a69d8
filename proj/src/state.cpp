#include "itg/state.hpp"

#include <stdexcept>

#include "itg/alignment.hpp"

namespace itg {

std::string_view to_string(DiffLabel l) {
  switch (l) {
    case DiffLabel::Kept: return "kept";
    case DiffLabel::AgentInserted: return "agent_inserted";
    case DiffLabel::AgentSubstituted: return "agent_substituted";
    case DiffLabel::AgentDeleted: return "agent_deleted";
    case DiffLabel::UserInserted: return "user_inserted";
  }
  return "kept";
}

DiffLabel diff_label_from_string(std::string_view s) {
  for (const auto l : {DiffLabel::Kept, DiffLabel::AgentInserted, DiffLabel::AgentSubstituted,
                       DiffLabel::AgentDeleted, DiffLabel::UserInserted}) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown diff label '" + std::string(s) + "'");
}

namespace {

// Index into `entries` of the k-th visible entry (1-based k).
std::size_t visible_index(const std::vector<DiffEntry>& entries, std::size_t k) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].visible() && ++seen == k) return i;
  }
  throw LocationOutOfBounds("diff has fewer than " + std::to_string(k) + " visible tokens");
}

std::size_t insertion_index(const std::vector<DiffEntry>& entries, std::size_t l) {
  return l == 1 ? 0 : visible_index(entries, l - 1) + 1;
}

std::vector<DiffEntry> initial_entries(const Document& prev_user) {
  std::vector<DiffEntry> out;
  out.reserve(prev_user.size());
  for (std::size_t i = 0; i < prev_user.size(); ++i) {
    out.push_back({prev_user[i], DiffLabel::Kept, prev_user.mark(i) == Mark::UserInserted, {}});
  }
  return out;
}

void apply_agent_edit(std::vector<DiffEntry>& entries, const Edit& e) {
  switch (e.op) {
    case Op::Ins:
      entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(insertion_index(entries, e.location)),
                     DiffEntry{e.word, DiffLabel::AgentInserted, false, {}});
      break;
    case Op::Del: {
      const std::size_t i = visible_index(entries, e.location);
      if (entries[i].label == DiffLabel::AgentInserted) {
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        if (entries[i].label == DiffLabel::AgentSubstituted) entries[i].word = entries[i].replaced;
        entries[i].label = DiffLabel::AgentDeleted;
        entries[i].replaced.clear();
      }
      break;
    }
    case Op::Sub: {
      auto& d = entries[visible_index(entries, e.location)];
      if (d.label == DiffLabel::Kept) {
        d.replaced = d.word;
        d.label = DiffLabel::AgentSubstituted;
      }
      d.word = e.word;
      if (d.label == DiffLabel::AgentSubstituted && d.word == d.replaced) {
        d.label = DiffLabel::Kept;
        d.replaced.clear();
      }
      break;
    }
  }
}

void apply_user_edit(std::vector<DiffEntry>& entries, const Edit& e) {
  switch (e.op) {
    case Op::Ins:
      entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(insertion_index(entries, e.location)),
                     DiffEntry{e.word, DiffLabel::UserInserted, true, {}});
      break;
    case Op::Del:
      entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(visible_index(entries, e.location)));
      break;
    case Op::Sub: {
      auto& d = entries[visible_index(entries, e.location)];
      d = DiffEntry{e.word, DiffLabel::UserInserted, true, {}};
      break;
    }
  }
}

std::vector<DiffEntry> finish(std::vector<DiffEntry> entries, std::span<const Edit> user_edits,
                              const Document& user) {
  for (const auto& e : user_edits) apply_user_edit(entries, e);
  std::size_t k = 0;
  for (auto& d : entries) {
    if (!d.visible()) continue;
    if (k >= user.size() || user[k] != d.word) {
      throw std::logic_error("diff does not reproduce the current draft at token " + std::to_string(k + 1));
    }
    d.user_ever = user.mark(k) == Mark::UserInserted;
    ++k;
  }
  if (k != user.size()) throw std::logic_error("diff is shorter than the current draft");
  return entries;
}

}  // namespace

std::vector<DiffEntry> diff_from_edits(const Document& prev_user, std::span<const Edit> agent_edits,
                                       std::span<const Edit> user_edits, const Document& user) {
  auto entries = initial_entries(prev_user);
  for (const auto& e : agent_edits) apply_agent_edit(entries, e);
  return finish(std::move(entries), user_edits, user);
}

std::vector<DiffEntry> diff_from_alignment(const Document& prev_user, const Document& prev_agent,
                                           std::span<const Edit> user_edits, const Document& user,
                                           const SimilarityProvider& sim) {
  const Alignment a = align(prev_user, prev_agent, sim);
  std::vector<DiffEntry> entries;
  std::size_t xi = 0;
  for (std::size_t p = 1; p <= a.used; ++p) {
    const Token& xw = a.x_bar[p - 1];
    const Token& yw = a.y_bar[p - 1];
    const bool was_user = !is_blank(xw) && prev_user.mark(xi) == Mark::UserInserted;
    switch (a.kind_at(p)) {
      case AlignKind::Match: entries.push_back({yw, DiffLabel::Kept, was_user, {}}); break;
      case AlignKind::Ins: entries.push_back({yw, DiffLabel::AgentInserted, false, {}}); break;
      case AlignKind::Del: entries.push_back({xw, DiffLabel::AgentDeleted, was_user, {}}); break;
      case AlignKind::Sub: entries.push_back({yw, DiffLabel::AgentSubstituted, false, xw}); break;
    }
    if (!is_blank(xw)) ++xi;
  }
  return finish(std::move(entries), user_edits, user);
}

Document inherit_marks(const Document& from, const Document& to, const SimilarityProvider& sim) {
  const Alignment a = align(from, to, sim);
  std::vector<Mark> marks;
  marks.reserve(to.size());
  std::size_t xi = 0;
  for (std::size_t p = 1; p <= a.used; ++p) {
    const bool x_tok = !is_blank(a.x_bar[p - 1]);
    if (!is_blank(a.y_bar[p - 1])) {
      marks.push_back(a.kind_at(p) == AlignKind::Match ? from.mark(xi) : Mark::AgentInserted);
    }
    if (x_tok) ++xi;
  }
  return Document(std::vector<Token>(to.tokens().begin(), to.tokens().end()), std::move(marks), to.capacity());
}

}  // namespace itg
