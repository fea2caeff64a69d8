#include "itg/edit_policy.hpp"

#include <cmath>
#include <numeric>

namespace itg {

double ActionDistribution::total() const { return stop + std::accumulate(probs.begin(), probs.end(), 0.0); }

double ActionDistribution::prob(const EditAction& a) const {
  if (a.is_stop()) return stop;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    if (edits[i] == a.edit()) return probs[i];
  }
  return 0.0;
}

double EditPolicy::stop_probability(const Document& x, const PolicyState& s) const { return distribution(x, s).stop; }

double EditPolicy::log_prob(const Document& x, const PolicyState& s, const EditAction& a) const {
  return std::log(distribution(x, s).prob(a));
}

std::vector<Edit> valid_edits(const Document& x, std::span<const Token> words) {
  std::vector<Edit> out;
  const std::size_t n = x.size();
  for (std::size_t l = 1; l <= n + 1; ++l) {
    if (!x.full()) {
      for (const auto& w : words) out.push_back(Edit::ins(l, w));
    }
    if (l > n) break;
    out.push_back(Edit::del(l));
    for (const auto& w : words) {
      if (w != x[l - 1]) out.push_back(Edit::sub(l, w));
    }
  }
  return out;
}

}  // namespace itg
