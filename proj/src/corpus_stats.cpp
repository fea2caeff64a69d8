#include "itg/corpus_stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace itg {

namespace {

// Dirichlet-prior weight of the unigram distribution in each bigram row.
constexpr double kPrior = 2.0;

}  // namespace

CorpusStats CorpusStats::build(std::span<const Document> corpus) {
  std::map<Token, std::size_t> uni;
  std::map<std::pair<Token, Token>, std::size_t> bi;
  const Token bos = "<s>", eos = "</s>";
  for (const auto& d : corpus) {
    Token prev = bos;
    for (const auto& w : d.tokens()) {
      ++uni[w];
      ++bi[{prev, w}];
      prev = w;
    }
    ++bi[{prev, eos}];
  }
  return CorpusStats(std::move(uni), std::move(bi), IdfTable::build(corpus));
}

CorpusStats::CorpusStats(std::map<Token, std::size_t> unigrams, std::map<std::pair<Token, Token>, std::size_t> bigrams,
                         IdfTable idf)
    : unigram_counts_(std::move(unigrams)), bigram_counts_(std::move(bigrams)), idf_(std::move(idf)) {
  for (const auto& [w, c] : unigram_counts_) {
    (void)c;
    vocab_.push_back(w);
  }
  width_ = vocab_.size() + 3;
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_[vocab_[i]] = i + 3;

  auto id_of = [&](const Token& w) -> std::size_t {
    if (w == "<s>") return kBos;
    if (w == "</s>") return kEos;
    return id(w);
  };
  std::vector<double> row_total(width_, 0.0);
  std::vector<double> counts(width_ * width_, 0.0);
  std::vector<double> next_total(width_, 0.0);
  for (const auto& [pair, c] : bigram_counts_) {
    const std::size_t a = id_of(pair.first), b = id_of(pair.second);
    counts[a * width_ + b] += static_cast<double>(c);
    row_total[a] += static_cast<double>(c);
    next_total[b] += static_cast<double>(c);
  }
  // Add-one unigram over everything that can follow (words, EOS, UNK).
  double total = 0;
  for (std::size_t b = kEos; b < width_; ++b) total += next_total[b] + 1.0;
  std::vector<double> p_next(width_, 0.0);
  unigram_.assign(width_, -std::numeric_limits<double>::infinity());
  for (std::size_t b = kEos; b < width_; ++b) {
    p_next[b] = (next_total[b] + 1.0) / total;
    unigram_[b] = std::log(p_next[b]);
  }
  table_.assign(width_ * width_, -std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < width_; ++a) {
    for (std::size_t b = kEos; b < width_; ++b) {
      table_[a * width_ + b] = std::log((counts[a * width_ + b] + kPrior * p_next[b]) / (row_total[a] + kPrior));
    }
  }
}

std::size_t CorpusStats::id(const Token& w) const {
  const auto it = ids_.find(w);
  return it == ids_.end() ? kUnk : it->second;
}

UnigramSampler::UnigramSampler(const CorpusStats& stats) {
  std::vector<double> weights;
  for (const auto& [w, c] : stats.unigram_counts()) {
    words_.push_back(w);
    weights.push_back(static_cast<double>(c));
  }
  if (words_.empty()) throw EmptyCorpus("unigram sampler needs a nonempty vocabulary");
  dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

const Token& UnigramSampler::operator()(Rng& rng) const { return words_[dist_(rng)]; }

}  // namespace itg
