#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itg/corpus_stats.hpp"
#include "itg/edit_policy.hpp"

namespace itg {

// Factorized log-linear token edit policy:
//   pi(stop) = sigmoid(w_s . f_s / tau)
//   pi(l, o, w) = (1 - pi(stop)) * softmax_l * softmax_o|l * softmax_w|o,l
// Each head has its own weight block. Words come from the corpus vocabulary,
// the user's words and the draft itself.
class LogLinearEditPolicy final : public EditPolicy {
 public:
  static constexpr std::size_t kStopDim = 10;
  static constexpr std::size_t kLocDim = 11;
  static constexpr std::size_t kOpBase = 7;
  static constexpr std::size_t kOpDim = 3 * kOpBase;
  static constexpr std::size_t kWordBase = 12;
  static constexpr std::size_t kWordDim = 2 * kWordBase;
  static constexpr std::size_t kStopOffset = 0;
  static constexpr std::size_t kLocOffset = kStopOffset + kStopDim;
  static constexpr std::size_t kOpOffset = kLocOffset + kLocDim;
  static constexpr std::size_t kWordOffset = kOpOffset + kOpDim;
  static constexpr std::size_t kDim = kWordOffset + kWordDim;
  static constexpr std::string_view kFeatureVersion = "itg-loglinear-v1";

  // All-zero weights: stop probability 1/2, uniform over everything else.
  explicit LogLinearEditPolicy(std::shared_ptr<const CorpusStats> stats, double temperature = 1.0);

  std::span<const double> weights() const noexcept { return weights_; }
  std::vector<double>& mutable_weights() noexcept { return weights_; }
  void set_weights(std::vector<double> w);
  double temperature() const noexcept { return temperature_; }
  const CorpusStats& stats() const noexcept { return *stats_; }
  std::shared_ptr<const CorpusStats> stats_ptr() const noexcept { return stats_; }

  ActionDistribution distribution(const Document& x, const PolicyState& s) const override;
  double stop_probability(const Document& x, const PolicyState& s) const override;
  double log_prob(const Document& x, const PolicyState& s, const EditAction& a) const override;

  // weight * sum of log pi(a | x, s) over `actions`; the matching gradient is
  // added into `grad` (size kDim) when given. Throws std::domain_error for an
  // action outside the policy's support.
  double weighted_log_likelihood(const Document& x, const PolicyState& s, std::span<const EditAction> actions,
                                 double weight, std::vector<double>* grad = nullptr) const;

  std::string to_json() const;
  static LogLinearEditPolicy from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static LogLinearEditPolicy load(const std::filesystem::path& path);

 private:
  std::shared_ptr<const CorpusStats> stats_;
  double temperature_;
  std::vector<double> weights_;
};

}  // namespace itg
