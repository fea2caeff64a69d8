#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "itg/document.hpp"

namespace itg {

// Where the two scored words sit. Static scorers ignore it; a contextual
// scorer can read the full documents.
struct AlignContext {
  std::span<const Token> x;
  std::span<const Token> y;
  std::size_t x_index = 0;
  std::size_t y_index = 0;
};

// Scores a pair of aligned words in [-1, 1], identical words scoring 1. The
// gap baseline is the score of a position where only one side is blank.
// Implementations are read-only after construction and may be shared across
// threads.
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double score(const Token& wx, const Token& wy, const AlignContext& ctx) const = 0;
  virtual double gap_baseline() const = 0;
};

inline constexpr double kDefaultGapBaseline = 0.25;

// Exact match scores 1; otherwise cosine similarity of character trigram count
// vectors (word padded with one boundary marker per side), floored at 0.
class TrigramSimilarity final : public SimilarityProvider {
 public:
  explicit TrigramSimilarity(double gap_baseline = kDefaultGapBaseline) : baseline_(gap_baseline) {}

  double score(const Token& wx, const Token& wy, const AlignContext& ctx) const override;
  double gap_baseline() const override { return baseline_; }

  static double cosine(std::string_view a, std::string_view b);

 private:
  double baseline_;
};

// 1 for identical words, 0 otherwise.
class ExactSimilarity final : public SimilarityProvider {
 public:
  explicit ExactSimilarity(double gap_baseline = kDefaultGapBaseline) : baseline_(gap_baseline) {}

  double score(const Token& wx, const Token& wy, const AlignContext&) const override {
    return wx == wy ? 1.0 : 0.0;
  }
  double gap_baseline() const override { return baseline_; }

 private:
  double baseline_;
};

// Cosine similarity over a static embedding table read from UTF-8 TSV, one
// word per line followed by its float components. Words missing from the table
// only match themselves.
class EmbeddingSimilarity final : public SimilarityProvider {
 public:
  EmbeddingSimilarity(std::istream& tsv, double gap_baseline = kDefaultGapBaseline);
  static EmbeddingSimilarity from_file(const std::filesystem::path& path,
                                       double gap_baseline = kDefaultGapBaseline);

  double score(const Token& wx, const Token& wy, const AlignContext& ctx) const override;
  double gap_baseline() const override { return baseline_; }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  double baseline_;
  std::size_t dim_ = 0;
  std::unordered_map<Token, std::vector<double>> table_;
};

}  // namespace itg
