#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "itg/document.hpp"
#include "itg/edit.hpp"
#include "itg/similarity.hpp"

namespace itg {

class EmptyCorpus : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AlreadyAtGoal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// idf(w) = ln((n + 1) / (df(w) + 1)) + 1 over a corpus of n documents.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::unordered_map<Token, std::size_t> doc_frequency, std::size_t corpus_size);

  static IdfTable build(std::span<const Document> corpus);

  double idf(const Token& w) const;
  // Value given to words never seen in the corpus.
  double max_idf() const;

  std::size_t corpus_size() const noexcept { return corpus_size_; }
  std::size_t doc_frequency(const Token& w) const;
  const std::unordered_map<Token, std::size_t>& doc_frequencies() const noexcept { return df_; }

  // TSV cache: a "#corpus_size" header, then word, idf, df per line.
  void write_tsv(std::ostream& out) const;
  static IdfTable read_tsv(std::istream& in);
  static IdfTable load(const std::filesystem::path& path);

 private:
  std::unordered_map<Token, std::size_t> df_;
  std::size_t corpus_size_ = 0;
};

// Simulator constraints. Ranking orders candidates by IDF; adjacency requires
// an edit next to a match; contiguity requires a single block; complete words
// keeps subword pieces of a word together.
struct HeuristicSet {
  bool ranking_idf = false;
  bool adjacent = false;
  bool contiguous = false;
  bool complete_words = false;

  // Accepts "unrestricted", "adjacent", "contiguous", "adj+contig", and
  // '+'-joined flag names (idf, adj, contig, words).
  static HeuristicSet parse(std::string_view spec);
  std::string to_string() const;

  friend bool operator==(const HeuristicSet&, const HeuristicSet&) = default;
};

struct UserSimConfig {
  std::size_t edits_per_episode = 1;
  HeuristicSet heuristics;
  std::shared_ptr<const IdfTable> idf_table;  // present iff heuristics.ranking_idf
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Up to n edits toward `goal`, each valid on the document produced by the ones
// before it. Candidates come from align(draft, goal); starved filters relax in
// the order contiguous, then adjacent.
std::vector<Edit> propose_edits(const Document& draft, const Document& goal, const UserSimConfig& cfg,
                                const SimilarityProvider& sim);

struct UserTurn {
  Document draft;
  std::vector<Edit> edits;
};

UserTurn user_step(const Document& draft, const Document& goal, const UserSimConfig& cfg,
                   const SimilarityProvider& sim);

}  // namespace itg
