#include "itg/user_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "itg/alignment.hpp"
#include "itg/rng.hpp"
#include "itg/tokenizer.hpp"

namespace itg {

IdfTable::IdfTable(std::unordered_map<Token, std::size_t> doc_frequency, std::size_t corpus_size)
    : df_(std::move(doc_frequency)), corpus_size_(corpus_size) {
  if (corpus_size_ == 0) throw EmptyCorpus("IDF table needs a nonempty corpus");
  for (const auto& [w, df] : df_) {
    if (df > corpus_size_) throw std::invalid_argument("document frequency of '" + w + "' exceeds corpus size");
  }
}

IdfTable IdfTable::build(std::span<const Document> corpus) {
  if (corpus.empty()) throw EmptyCorpus("cannot build IDF table from an empty corpus");
  std::unordered_map<Token, std::size_t> df;
  for (const auto& d : corpus) {
    std::unordered_set<std::string_view> seen(d.tokens().begin(), d.tokens().end());
    for (const auto w : seen) ++df[Token(w)];
  }
  return IdfTable(std::move(df), corpus.size());
}

double IdfTable::idf(const Token& w) const {
  const auto n = static_cast<double>(corpus_size_);
  const auto it = df_.find(w);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((n + 1.0) / (df + 1.0)) + 1.0;
}

double IdfTable::max_idf() const { return std::log(static_cast<double>(corpus_size_) + 1.0) + 1.0; }

std::size_t IdfTable::doc_frequency(const Token& w) const {
  const auto it = df_.find(w);
  return it == df_.end() ? 0 : it->second;
}

void IdfTable::write_tsv(std::ostream& out) const {
  std::vector<const std::pair<const Token, std::size_t>*> rows;
  rows.reserve(df_.size());
  for (const auto& kv : df_) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "#corpus_size\t" << corpus_size_ << '\n';
  out.precision(17);
  for (const auto* kv : rows) out << kv->first << '\t' << idf(kv->first) << '\t' << kv->second << '\n';
}

IdfTable IdfTable::read_tsv(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  std::unordered_map<Token, std::size_t> df;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word, idf_cell, df_cell;
    std::getline(fields, word, '\t');
    std::getline(fields, idf_cell, '\t');
    std::getline(fields, df_cell, '\t');
    if (word == "#corpus_size") {
      n = std::stoull(idf_cell);
      continue;
    }
    if (df_cell.empty()) throw std::runtime_error("IDF TSV row for '" + word + "' lacks a document frequency");
    df[word] = std::stoull(df_cell);
  }
  return IdfTable(std::move(df), n);
}

IdfTable IdfTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open IDF table " + path.string());
  return read_tsv(in);
}

HeuristicSet HeuristicSet::parse(std::string_view spec) {
  HeuristicSet h;
  if (spec.empty() || spec == "unrestricted" || spec == "none") return h;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find('+', start), spec.size());
    const std::string_view part = spec.substr(start, end - start);
    if (part == "idf" || part == "ranking" || part == "ranking_idf") {
      h.ranking_idf = true;
    } else if (part == "adj" || part == "adjacent") {
      h.adjacent = true;
    } else if (part == "contig" || part == "contiguous") {
      h.contiguous = true;
    } else if (part == "words" || part == "complete_words") {
      h.complete_words = true;
    } else if (part == "unrestricted") {
    } else {
      throw std::invalid_argument("unknown user heuristic '" + std::string(part) + "'");
    }
    start = end + 1;
  }
  return h;
}

std::string HeuristicSet::to_string() const {
  std::string out;
  auto add = [&out](const char* s) {
    if (!out.empty()) out += '+';
    out += s;
  };
  if (ranking_idf) add("idf");
  if (adjacent) add("adj");
  if (contiguous) add("contig");
  if (complete_words) add("words");
  return out.empty() ? "unrestricted" : out;
}

void UserSimConfig::validate() const {
  if (edits_per_episode < 1) throw std::invalid_argument("user edits per episode must be at least 1");
  if (heuristics.ranking_idf && !idf_table) throw std::invalid_argument("IDF ranking enabled without an IDF table");
  if (!heuristics.ranking_idf && idf_table) throw std::invalid_argument("IDF table given but IDF ranking disabled");
}

namespace {

int type_rank(AlignKind k) {
  switch (k) {
    case AlignKind::Ins: return 0;
    case AlignKind::Sub: return 1;
    case AlignKind::Del: return 2;
    case AlignKind::Match: break;
  }
  return 3;
}

// Tracks chosen alignment positions while units of ops are picked.
class Selector {
 public:
  Selector(const Alignment& a, const HeuristicSet& h) : a_(a), h_(h), matched_(a.used + 2, false), chosen_(a.used + 2, false) {
    for (std::size_t p = 1; p <= a.used; ++p) {
      matched_[p] = a.kind_at(p) == AlignKind::Match;
      has_match_ = has_match_ || matched_[p];
    }
  }

  bool passes(const std::vector<std::size_t>& unit, int level) const {
    if (level < 2 && h_.adjacent) {
      const bool start = !has_match_ && count_ == 0 && a_.ops[unit.front()].pos == 1;
      if (!start && !std::any_of(unit.begin(), unit.end(), [&](std::size_t i) { return touches(a_.ops[i].pos, true); })) {
        return false;
      }
    }
    if (level < 1 && h_.contiguous && count_ > 0) {
      if (!std::any_of(unit.begin(), unit.end(), [&](std::size_t i) { return touches(a_.ops[i].pos, false); })) {
        return false;
      }
    }
    return true;
  }

  void choose(std::size_t op_index) {
    chosen_[a_.ops[op_index].pos] = true;
    ++count_;
  }
  bool is_chosen(std::size_t op_index) const { return chosen_[a_.ops[op_index].pos]; }
  std::size_t count() const { return count_; }

 private:
  // Whether a neighbour of p is chosen (or, with `matches`, a match).
  bool touches(std::size_t p, bool matches) const {
    for (const std::size_t q : {p - 1, p + 1}) {
      if (q < 1 || q > a_.used) continue;
      if (chosen_[q] || (matches && matched_[q])) return true;
    }
    return false;
  }

  const Alignment& a_;
  const HeuristicSet& h_;
  std::vector<bool> matched_;
  std::vector<bool> chosen_;
  std::size_t count_ = 0;
  bool has_match_ = false;
};

}  // namespace

std::vector<Edit> propose_edits(const Document& draft, const Document& goal, const UserSimConfig& cfg,
                                const SimilarityProvider& sim) {
  cfg.validate();
  const Alignment a = align(draft, goal, sim);
  const std::size_t m = a.num_edits();
  if (m == 0) throw AlreadyAtGoal("draft already equals the goal");

  // Ties break on a seeded word hash, then position. Keeping this independent
  // of the draft makes n single-edit turns agree with one n-edit turn.
  std::vector<std::uint64_t> tiebreak(m);
  for (std::size_t i = 0; i < m; ++i) tiebreak[i] = stable_hash(a.ops[i].word, cfg.rng_seed);

  std::vector<double> key(m, 0.0);
  if (cfg.heuristics.ranking_idf) {
    for (std::size_t i = 0; i < m; ++i) {
      const double v = cfg.idf_table->idf(a.ops[i].word);
      key[i] = a.ops[i].kind == AlignKind::Del ? -v : v;
    }
  }
  std::vector<std::size_t> ranked(m);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t i, std::size_t j) {
    if (key[i] != key[j]) return key[i] > key[j];
    const int ti = type_rank(a.ops[i].kind), tj = type_rank(a.ops[j].kind);
    if (ti != tj) return ti < tj;
    if (tiebreak[i] != tiebreak[j]) return tiebreak[i] < tiebreak[j];
    return i < j;
  });

  // Units are picked whole. With complete words, a continuation piece joins
  // the unit of the op right before it.
  std::vector<std::vector<std::size_t>> units;
  std::vector<std::size_t> unit_of(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& op = a.ops[i];
    const bool joins = cfg.heuristics.complete_words && i > 0 && op.kind != AlignKind::Del &&
                       is_continuation(op.word) && a.ops[i - 1].pos + 1 == op.pos &&
                       a.ops[i - 1].kind != AlignKind::Del;
    if (joins) {
      unit_of[i] = unit_of[i - 1];
      units[unit_of[i]].push_back(i);
    } else {
      unit_of[i] = units.size();
      units.push_back({i});
    }
  }
  std::vector<std::size_t> unit_rank;
  {
    std::vector<bool> seen(units.size(), false);
    for (const std::size_t i : ranked) {
      if (!seen[unit_of[i]]) {
        seen[unit_of[i]] = true;
        unit_rank.push_back(unit_of[i]);
      }
    }
  }

  const std::size_t budget = std::min(cfg.edits_per_episode, m);
  Selector sel(a, cfg.heuristics);
  std::vector<bool> unit_done(units.size(), false);
  std::vector<std::size_t> order;
  // Net growth of the chosen set must fit the draft's free capacity.
  const auto growth = [&](std::size_t i) -> long {
    return a.ops[i].kind == AlignKind::Ins ? 1 : a.ops[i].kind == AlignKind::Del ? -1 : 0;
  };
  const long slack = static_cast<long>(draft.capacity()) - static_cast<long>(draft.size());
  long grown = 0;
  const auto fits = [&](std::size_t u) {
    long g = 0;
    for (const std::size_t i : units[u]) g += growth(i);
    return grown + g <= slack;
  };
  int level = 0;
  while (sel.count() < budget) {
    const std::size_t room = budget - sel.count();
    std::optional<std::size_t> pick;
    for (;;) {
      for (const std::size_t u : unit_rank) {
        if (!unit_done[u] && units[u].size() <= room && fits(u) && sel.passes(units[u], level)) {
          pick = u;
          break;
        }
      }
      if (pick || level == 2) break;
      ++level;
    }
    if (!pick) {
      // Every remaining word is longer than the budget left: take a prefix.
      for (const std::size_t u : unit_rank) {
        if (!unit_done[u] && (fits(u) || growth(units[u].front()) + grown <= slack)) {
          pick = u;
          break;
        }
      }
    }
    if (!pick) throw std::logic_error("goal does not fit the draft capacity");
    unit_done[*pick] = true;
    for (const std::size_t i : units[*pick]) {
      if (sel.count() == budget || grown + growth(i) > slack) break;
      sel.choose(i);
      order.push_back(i);
      grown += growth(i);
    }
  }
  // Near capacity, shrink before growing.
  std::size_t inserts = 0;
  for (const std::size_t i : order) inserts += a.ops[i].kind == AlignKind::Ins;
  if (draft.size() + inserts > draft.capacity()) {
    std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return a.ops[i].kind != AlignKind::Ins; });
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (!sel.is_chosen(i)) order.push_back(i);
  }
  auto edits = extract_edit_sequence(a, order, draft);
  edits.resize(budget);
  return edits;
}

UserTurn user_step(const Document& draft, const Document& goal, const UserSimConfig& cfg,
                   const SimilarityProvider& sim) {
  auto edits = propose_edits(draft, goal, cfg, sim);
  Document next = apply_sequence(draft, edits, Actor::User);
  return {std::move(next), std::move(edits)};
}

}  // namespace itg
