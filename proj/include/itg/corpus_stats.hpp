#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "itg/document.hpp"
#include "itg/rng.hpp"
#include "itg/user_sim.hpp"

namespace itg {

// Word statistics of a training corpus: vocabulary, smoothed bigram language
// model and IDF. Immutable once built; shared read-only across threads.
class CorpusStats {
 public:
  static constexpr std::size_t kBos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kUnk = 2;

  static CorpusStats build(std::span<const Document> corpus);
  // From raw counts, as stored in checkpoints.
  CorpusStats(std::map<Token, std::size_t> unigrams, std::map<std::pair<Token, Token>, std::size_t> bigrams,
              IdfTable idf);

  // Corpus words, sorted.
  const std::vector<Token>& vocabulary() const noexcept { return vocab_; }
  std::size_t id(const Token& w) const;
  bool known(const Token& w) const { return id(w) != kUnk; }

  // log P(next | prev) over ids, with BOS/EOS for sentence boundaries.
  double log_prob(std::size_t prev, std::size_t next) const { return table_[prev * width_ + next]; }
  double unigram_log_prob(std::size_t w) const { return unigram_[w]; }

  const IdfTable& idf() const noexcept { return idf_; }
  std::shared_ptr<const IdfTable> idf_ptr() const { return std::make_shared<const IdfTable>(idf_); }

  const std::map<Token, std::size_t>& unigram_counts() const noexcept { return unigram_counts_; }
  const std::map<std::pair<Token, Token>, std::size_t>& bigram_counts() const noexcept { return bigram_counts_; }

 private:
  std::map<Token, std::size_t> unigram_counts_;
  std::map<std::pair<Token, Token>, std::size_t> bigram_counts_;
  IdfTable idf_;
  std::vector<Token> vocab_;
  std::unordered_map<Token, std::size_t> ids_;
  std::size_t width_ = 0;
  std::vector<double> table_;
  std::vector<double> unigram_;
};

// Draws corpus words in proportion to their frequency.
class UnigramSampler {
 public:
  explicit UnigramSampler(const CorpusStats& stats);
  const Token& operator()(Rng& rng) const;

 private:
  std::vector<Token> words_;
  mutable std::discrete_distribution<std::size_t> dist_;
};

}  // namespace itg
