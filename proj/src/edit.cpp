#include "itg/edit.hpp"

namespace itg {

std::string_view to_string(Op op) {
  switch (op) {
    case Op::Ins: return "ins";
    case Op::Del: return "del";
    case Op::Sub: return "sub";
  }
  return "ins";
}

Op op_from_string(std::string_view s) {
  if (s == "ins") return Op::Ins;
  if (s == "del") return Op::Del;
  if (s == "sub") return Op::Sub;
  throw std::invalid_argument("unknown edit op: " + std::string(s));
}

std::string to_string(const Edit& e) {
  std::string out = "(" + std::to_string(e.location) + ", " + std::string(to_string(e.op)) + ", ";
  out += e.op == Op::Del ? "_" : e.word;
  return out + ")";
}

bool is_valid(const Document& doc, const Edit& e) noexcept {
  if (e.location < 1) return false;
  switch (e.op) {
    case Op::Ins: return !doc.full() && e.location <= doc.size() + 1 && !e.word.empty() && !is_blank(e.word);
    case Op::Del: return e.location <= doc.size();
    case Op::Sub: return e.location <= doc.size() && !e.word.empty() && !is_blank(e.word);
  }
  return false;
}

class DocumentEditor {
 public:
  static Document apply(const Document& doc, const Edit& e, Actor actor) {
    const std::size_t n = doc.size();
    if (e.op == Op::Ins && doc.full()) {
      throw CapacityExceeded("insert " + to_string(e) + " into full document of capacity " +
                             std::to_string(doc.capacity()));
    }
    const std::size_t upper = e.op == Op::Ins ? n + 1 : n;
    if (e.location < 1 || e.location > upper) {
      throw LocationOutOfBounds("edit " + to_string(e) + " outside [1, " + std::to_string(upper) +
                                "] for content length " + std::to_string(n));
    }
    if (e.op != Op::Del && (e.word.empty() || is_blank(e.word))) {
      throw std::invalid_argument("edit " + to_string(e) + " writes a blank token");
    }

    Document out = doc;
    const auto at = static_cast<std::ptrdiff_t>(e.location - 1);
    switch (e.op) {
      case Op::Ins:
        out.tokens_.insert(out.tokens_.begin() + at, e.word);
        out.marks_.insert(out.marks_.begin() + at, mark_for(actor));
        break;
      case Op::Del:
        out.tokens_.erase(out.tokens_.begin() + at);
        out.marks_.erase(out.marks_.begin() + at);
        break;
      case Op::Sub:
        out.tokens_[e.location - 1] = e.word;
        out.marks_[e.location - 1] = mark_for(actor);
        break;
    }
    return out;
  }
};

Document apply(const Document& doc, const Edit& e, Actor actor) {
  return DocumentEditor::apply(doc, e, actor);
}

Document apply_sequence(const Document& doc, std::span<const Edit> edits, Actor actor) {
  Document cur = doc;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    try {
      cur = DocumentEditor::apply(cur, edits[i], actor);
    } catch (EditError& err) {
      err.set_edit_index(i);
      throw;
    }
  }
  return cur;
}

}  // namespace itg
