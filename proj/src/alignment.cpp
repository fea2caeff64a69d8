#include "itg/alignment.hpp"

#include <algorithm>
#include <set>

namespace itg {

std::string_view to_string(AlignKind k) {
  switch (k) {
    case AlignKind::Match: return "match";
    case AlignKind::Ins: return "ins";
    case AlignKind::Del: return "del";
    case AlignKind::Sub: return "sub";
  }
  return "match";
}

AlignKind Alignment::kind_at(std::size_t pos) const {
  const auto& xb = x_bar[pos - 1];
  const auto& yb = y_bar[pos - 1];
  if (is_blank(xb) && !is_blank(yb)) return AlignKind::Ins;
  if (!is_blank(xb) && is_blank(yb)) return AlignKind::Del;
  if (xb != yb) return AlignKind::Sub;
  return AlignKind::Match;
}

std::size_t Alignment::blanks_before(std::size_t pos) const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < pos; ++i) n += is_blank(x_bar[i - 1]) ? 1 : 0;
  return n;
}

namespace {

enum class Move : std::uint8_t { Diag, Up, Left };

}  // namespace

Alignment align(const Document& x, const Document& y, const SimilarityProvider& sim) {
  const auto xs = x.tokens();
  const auto ys = y.tokens();
  const std::size_t n = xs.size();
  const std::size_t m = ys.size();
  const std::size_t width = 2 * std::max(x.capacity(), y.capacity());
  if (n + m > width) throw std::invalid_argument("alignment needs more than 2L positions");

  const double b = sim.gap_baseline();
  const std::size_t cols = m + 1;
  std::vector<double> best((n + 1) * cols, 0.0);
  std::vector<double> pair((n + 1) * cols, 0.0);
  auto at = [cols](std::size_t i, std::size_t j) { return i * cols + j; };

  for (std::size_t i = 1; i <= n; ++i) best[at(i, 0)] = best[at(i - 1, 0)] + b;
  for (std::size_t j = 1; j <= m; ++j) best[at(0, j)] = best[at(0, j - 1)] + b;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double s = sim.score(xs[i - 1], ys[j - 1], AlignContext{xs, ys, i - 1, j - 1});
      pair[at(i, j)] = s;
      best[at(i, j)] = std::max({best[at(i - 1, j - 1)] + s, best[at(i - 1, j)] + b, best[at(i, j - 1)] + b});
    }
  }

  // Traceback from the end; at each cell prefer diag > up (delete) > left (insert).
  std::vector<Move> moves;
  moves.reserve(n + m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const double here = best[at(i, j)];
    if (i > 0 && j > 0 && best[at(i - 1, j - 1)] + pair[at(i, j)] == here) {
      moves.push_back(Move::Diag);
      --i, --j;
    } else if (i > 0 && (j == 0 || best[at(i - 1, j)] + b == here)) {
      moves.push_back(Move::Up);
      --i;
    } else {
      moves.push_back(Move::Left);
      --j;
    }
  }
  std::reverse(moves.begin(), moves.end());

  // Canonical form: inside each run of gaps, insertions before deletions.
  for (std::size_t k = 0; k < moves.size();) {
    if (moves[k] == Move::Diag) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < moves.size() && moves[end] != Move::Diag) ++end;
    std::stable_partition(moves.begin() + static_cast<std::ptrdiff_t>(k),
                          moves.begin() + static_cast<std::ptrdiff_t>(end),
                          [](Move mv) { return mv == Move::Left; });
    k = end;
  }

  Alignment out;
  out.x_bar.assign(width, Token(kBlank));
  out.y_bar.assign(width, Token(kBlank));
  out.used = moves.size();
  out.score = best[at(n, m)];
  i = 0, j = 0;
  for (std::size_t k = 0; k < moves.size(); ++k) {
    const std::size_t pos = k + 1;
    switch (moves[k]) {
      case Move::Diag:
        out.x_bar[k] = xs[i];
        out.y_bar[k] = ys[j];
        if (xs[i] != ys[j]) out.ops.push_back({pos, AlignKind::Sub, ys[j]});
        ++i, ++j;
        break;
      case Move::Up:
        out.x_bar[k] = xs[i];
        out.ops.push_back({pos, AlignKind::Del, xs[i]});
        ++i;
        break;
      case Move::Left:
        out.y_bar[k] = ys[j];
        out.ops.push_back({pos, AlignKind::Ins, ys[j]});
        ++j;
        break;
    }
  }
  return out;
}

Edit edit_for(const AlignedOp& op, std::size_t location) {
  switch (op.kind) {
    case AlignKind::Ins: return Edit::ins(location, op.word);
    case AlignKind::Del: return Edit::del(location);
    case AlignKind::Sub: return Edit::sub(location, op.word);
    case AlignKind::Match: break;
  }
  throw std::logic_error("match positions carry no edit");
}

std::size_t location_after(const Alignment& a, std::size_t i, std::span<const std::size_t> done) {
  const std::size_t pos = a.ops[i].pos;
  std::size_t inserted = 0, deleted = 0;
  for (const std::size_t d : done) {
    const auto& prior = a.ops[d];
    if (prior.pos >= pos) continue;
    if (prior.kind == AlignKind::Ins) ++inserted;
    if (prior.kind == AlignKind::Del) ++deleted;
  }
  return pos - a.blanks_before(pos) - deleted + inserted;
}

std::vector<Edit> extract_edit_sequence(const Alignment& a, std::span<const std::size_t> order, const Document& x) {
  const std::size_t m = a.num_edits();
  if (order.size() != m) {
    throw InvalidPermutation("ordering has " + std::to_string(order.size()) + " entries for " +
                             std::to_string(m) + " edits");
  }
  std::vector<bool> seen(m, false);
  for (const std::size_t k : order) {
    if (k >= m || seen[k]) throw InvalidPermutation("ordering is not a permutation of the edit index set");
    seen[k] = true;
  }
  {
    std::size_t c = 0;
    for (std::size_t p = 0; p < a.used; ++p) {
      if (is_blank(a.x_bar[p])) continue;
      if (c >= x.size() || a.x_bar[p] != x[c]) throw std::invalid_argument("document does not match alignment source");
      ++c;
    }
    if (c != x.size()) throw std::invalid_argument("document does not match alignment source");
  }

  // Prefix blank counts so each location is O(M).
  std::vector<std::size_t> blanks(a.used + 2, 0);
  for (std::size_t p = 1; p <= a.used; ++p) blanks[p + 1] = blanks[p] + (is_blank(a.x_bar[p - 1]) ? 1 : 0);

  std::vector<Edit> edits;
  edits.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    const auto& op = a.ops[order[t]];
    std::size_t inserted = 0, deleted = 0;
    for (std::size_t s = 0; s < t; ++s) {
      const auto& prior = a.ops[order[s]];
      if (prior.pos >= op.pos) continue;
      if (prior.kind == AlignKind::Ins) ++inserted;
      if (prior.kind == AlignKind::Del) ++deleted;
    }
    edits.push_back(edit_for(op, op.pos - blanks[op.pos] - deleted + inserted));
  }
  return edits;
}

std::vector<Edit> first_edit_candidates(const Alignment& a) {
  std::vector<Edit> out;
  out.reserve(a.num_edits());
  std::size_t blanks = 0;
  std::size_t next = 0;
  for (std::size_t p = 1; p <= a.used && next < a.ops.size(); ++p) {
    if (a.ops[next].pos == p) {
      out.push_back(edit_for(a.ops[next], p - blanks));
      ++next;
    }
    blanks += is_blank(a.x_bar[p - 1]) ? 1 : 0;
  }
  return out;
}

std::vector<Edit> first_edits(const Document& x, const Document& y, const SimilarityProvider& sim) {
  std::vector<Edit> out;
  std::set<Edit> seen;
  for (auto& e : first_edit_candidates(align(x, y, sim))) {
    if (seen.insert(e).second) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace itg
