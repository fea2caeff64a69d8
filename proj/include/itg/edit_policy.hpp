#pragma once

#include <span>
#include <vector>

#include "itg/edit.hpp"
#include "itg/state.hpp"

namespace itg {

// Normalized distribution over {stop} and the valid edits of a draft.
struct ActionDistribution {
  double stop = 1.0;
  std::vector<Edit> edits;
  std::vector<double> probs;

  double total() const;
  double prob(const EditAction& a) const;
};

// A token edit policy pi(a | x, S_h). The goal is never an input.
class EditPolicy {
 public:
  virtual ~EditPolicy() = default;
  virtual ActionDistribution distribution(const Document& x, const PolicyState& s) const = 0;
  virtual double stop_probability(const Document& x, const PolicyState& s) const;
  virtual double log_prob(const Document& x, const PolicyState& s, const EditAction& a) const;
};

// Every valid edit of x whose word (for ins/sub) comes from `words`; a
// substitution never keeps the word it replaces. Ordered by location, then
// ins, del, sub, then word order in `words`.
std::vector<Edit> valid_edits(const Document& x, std::span<const Token> words);

}  // namespace itg
