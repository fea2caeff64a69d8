#pragma once

#include <span>
#include <string>

#include "itg/document.hpp"

namespace itg::metrics {

// Harmonic mean of clipped unigram precision and recall. Two empty token
// lists score 1.
double token_f1(std::span<const Token> hyp, std::span<const Token> ref);

// Clipped unigram precision times the brevity penalty exp(1 - r/c) for c < r.
double bleu1(std::span<const Token> hyp, std::span<const Token> ref);

// Character n-gram F-score over whitespace-stripped text with n = 1..6 and
// beta = 2. Precision and recall are averaged over the orders that occur on
// both sides before combining, matching sacreBLEU's default chrF.
double chrf(std::string_view hyp, std::string_view ref, int max_order = 6, double beta = 2.0);

inline double token_f1(const Document& hyp, const Document& ref) { return token_f1(hyp.tokens(), ref.tokens()); }
inline double bleu1(const Document& hyp, const Document& ref) { return bleu1(hyp.tokens(), ref.tokens()); }
inline double chrf(const Document& hyp, const Document& ref) { return chrf(hyp.to_text(), ref.to_text()); }

}  // namespace itg::metrics
