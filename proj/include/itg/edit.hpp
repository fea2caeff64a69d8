#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itg/document.hpp"

namespace itg {

enum class Op : std::uint8_t { Ins, Del, Sub };

std::string_view to_string(Op op);
Op op_from_string(std::string_view s);

// Single-word edit with a 1-based location. The word of a deletion is always
// the blank token.
struct Edit {
  std::size_t location = 1;
  Op op = Op::Ins;
  Token word;

  static Edit ins(std::size_t l, Token w) { return {l, Op::Ins, std::move(w)}; }
  static Edit del(std::size_t l) { return {l, Op::Del, Token(kBlank)}; }
  static Edit sub(std::size_t l, Token w) { return {l, Op::Sub, std::move(w)}; }

  friend bool operator==(const Edit&, const Edit&) = default;
  friend auto operator<=>(const Edit&, const Edit&) = default;
};

std::string to_string(const Edit& e);

// Either the stop action or a single edit.
class EditAction {
 public:
  static EditAction stop() { return EditAction(); }
  static EditAction make(Edit e) { return EditAction(std::move(e)); }

  bool is_stop() const noexcept { return !edit_.has_value(); }
  const Edit& edit() const { return edit_.value(); }

  friend bool operator==(const EditAction&, const EditAction&) = default;

 private:
  EditAction() = default;
  explicit EditAction(Edit e) : edit_(std::move(e)) {}

  std::optional<Edit> edit_;
};

class EditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  std::optional<std::size_t> edit_index() const noexcept { return edit_index_; }
  void set_edit_index(std::size_t i) noexcept { edit_index_ = i; }

 private:
  std::optional<std::size_t> edit_index_;
};

class LocationOutOfBounds : public EditError {
 public:
  using EditError::EditError;
};

class CapacityExceeded : public EditError {
 public:
  using EditError::EditError;
};

// Whether `e` satisfies its location bounds against `doc` and fits its capacity.
bool is_valid(const Document& doc, const Edit& e) noexcept;

// Applies one edit. Inserted and substituted tokens receive the mark of
// `actor`; the input is left untouched.
Document apply(const Document& doc, const Edit& e, Actor actor = Actor::None);

// Left fold of apply(). Errors carry the index of the failing edit.
Document apply_sequence(const Document& doc, std::span<const Edit> edits, Actor actor = Actor::None);

}  // namespace itg
