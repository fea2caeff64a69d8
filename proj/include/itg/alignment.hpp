#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "itg/document.hpp"
#include "itg/edit.hpp"
#include "itg/similarity.hpp"

namespace itg {

enum class AlignKind : std::uint8_t { Match, Ins, Del, Sub };

std::string_view to_string(AlignKind k);

// One element of the edit index set: a 1-based position in the padded pair
// where the two sides differ. `word` is the y-side word for Ins/Sub and the
// x-side word for Del.
struct AlignedOp {
  std::size_t pos = 0;
  AlignKind kind = AlignKind::Ins;
  Token word;

  friend bool operator==(const AlignedOp&, const AlignedOp&) = default;
};

// Canonical padded pair (x_bar, y_bar) of length 2L. Within every maximal run
// of insertion/deletion positions, insertions come first.
struct Alignment {
  std::vector<Token> x_bar;
  std::vector<Token> y_bar;
  std::vector<AlignedOp> ops;   // ascending pos; this is the edit index set
  std::size_t used = 0;         // positions before the double-blank tail
  double score = 0.0;

  std::size_t num_edits() const noexcept { return ops.size(); }
  AlignKind kind_at(std::size_t pos) const;  // Match for double blanks too
  std::size_t blanks_before(std::size_t pos) const;  // blanks in x_bar strictly before pos
};

class InvalidPermutation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Score-maximal monotonic alignment. Ties prefer match/substitution, then
// deletion, then insertion, decided cell by cell during traceback.
Alignment align(const Document& x, const Document& y, const SimilarityProvider& sim);

// Edits e_1..e_M for the ordering `order` (a 0-based permutation of the edit
// index set). Applying them to `x` in sequence yields y.
std::vector<Edit> extract_edit_sequence(const Alignment& a, std::span<const std::size_t> order, const Document& x);

// Location of op `i` of `a` when the ops in `done` (indices into a.ops) have
// already been applied.
std::size_t location_after(const Alignment& a, std::size_t i, std::span<const std::size_t> done);

Edit edit_for(const AlignedOp& op, std::size_t location);

// One candidate per element of the edit index set, located as if applied
// first. Duplicates are kept, so the size is exactly num_edits().
std::vector<Edit> first_edit_candidates(const Alignment& a);

// Deduplicated first elements over all orderings of align(x, y).
std::vector<Edit> first_edits(const Document& x, const Document& y, const SimilarityProvider& sim);

}  // namespace itg
