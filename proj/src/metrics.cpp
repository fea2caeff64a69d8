#include "itg/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string_view>
#include <unordered_map>

namespace itg::metrics {

namespace {

std::size_t clipped_overlap(std::span<const Token> hyp, std::span<const Token> ref) {
  std::unordered_map<std::string_view, std::size_t> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : hyp) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

}  // namespace

double token_f1(std::span<const Token> hyp, std::span<const Token> ref) {
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;
  const double overlap = static_cast<double>(clipped_overlap(hyp, ref));
  if (overlap == 0) return 0.0;
  const double p = overlap / static_cast<double>(hyp.size());
  const double r = overlap / static_cast<double>(ref.size());
  return 2 * p * r / (p + r);
}

double bleu1(std::span<const Token> hyp, std::span<const Token> ref) {
  if (hyp.empty() && ref.empty()) return 1.0;
  if (hyp.empty() || ref.empty()) return 0.0;
  const double c = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double precision = static_cast<double>(clipped_overlap(hyp, ref)) / c;
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return precision * bp;
}

double chrf(std::string_view hyp_text, std::string_view ref_text, int max_order, double beta) {
  const std::string hyp = strip_whitespace(hyp_text);
  const std::string ref = strip_whitespace(ref_text);
  if (hyp.empty() && ref.empty()) return 1.0;

  double avg_p = 0, avg_r = 0;
  int effective = 0;
  for (int n = 1; n <= max_order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    std::map<std::string_view, std::size_t> ref_counts;
    std::size_t n_ref = 0, n_hyp = 0, matched = 0;
    for (std::size_t i = 0; i + un <= ref.size(); ++i, ++n_ref) ++ref_counts[std::string_view(ref).substr(i, un)];
    for (std::size_t i = 0; i + un <= hyp.size(); ++i, ++n_hyp) {
      auto it = ref_counts.find(std::string_view(hyp).substr(i, un));
      if (it != ref_counts.end() && it->second > 0) {
        --it->second;
        ++matched;
      }
    }
    if (n_hyp > 0 && n_ref > 0) {
      avg_p += static_cast<double>(matched) / static_cast<double>(n_hyp);
      avg_r += static_cast<double>(matched) / static_cast<double>(n_ref);
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  avg_p /= effective;
  avg_r /= effective;
  if (avg_p + avg_r == 0) return 0.0;
  const double b2 = beta * beta;
  return (1 + b2) * avg_p * avg_r / (b2 * avg_p + avg_r);
}

}  // namespace itg::metrics
