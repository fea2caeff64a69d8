#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itg/alignment.hpp"
#include "itg/corpus_stats.hpp"
#include "itg/decoding.hpp"
#include "itg/environment.hpp"
#include "itg/loglinear.hpp"

namespace itg {

class DivergedLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class EmptyGoalSampler : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Number of alignment edits still pending at step k of M; the stop step
// k = M + 1 counts as one.
std::size_t n_k(std::size_t M, std::size_t k);

// One term of the token edit objective: -weight * sum log pi(a | x, S_h).
struct ObjectiveTarget {
  Document x;                       // X_{k-1}
  std::vector<EditAction> actions;  // pending alignment edits at x, with multiplicity, or {stop}
  double weight = 1.0;              // (M + 1) / n_k
  std::size_t k = 1;
  std::size_t M = 0;
};

// Term for a fixed ordering `sigma` (0-based over a.ops) and k in [1, M + 1].
// X_{k-1} applies the first k - 1 ordered edits to u_h; the targets are the
// remaining ops of the same alignment, located against X_{k-1}.
ObjectiveTarget objective_target(const Alignment& a, const Document& u_h, std::span<const std::size_t> sigma,
                                 std::size_t k);

// weight * sum log pi over the target's actions.
double surrogate_term(const EditPolicy& policy, const ObjectiveTarget& t, const PolicyState& s);

struct NoisyTrajectory {
  std::vector<Edit> edits;
  std::vector<bool> random;        // per edit: drawn by the noise branch
  std::vector<std::size_t> sigma;  // ordering drawn for align(u_h, goal)
  std::size_t prefix = 0;          // k - 1 with k uniform on 1..edits.size() + 1
  Document prefix_draft;           // u_h after the first `prefix` edits
  bool capped = false;             // noise was switched off at the length cap
};

// Walks u_h to the goal along the alignment, replacing each step by a random
// edit with probability `noise` and realigning after it. Random edits pick an
// op uniformly among the valid ones, a location uniformly, and a word from
// `words`. After `cap` steps (default 4L) noise is switched off.
NoisyTrajectory sample_noisy_trajectory(const Document& goal, const Document& u_h, double noise, Rng& rng,
                                        const SimilarityProvider& sim, const UnigramSampler* words,
                                        std::size_t cap = 0);

struct ObjectiveSample {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d weights
  ObjectiveTarget target;
};

// Draws a term of the objective for state S_h with current draft u_h. With
// noise 0 this samples sigma and k directly; otherwise the point comes from a
// noisy trajectory and the targets from realigning it to the goal.
ObjectiveSample sample_objective(const Document& goal, const Document& u_h, const PolicyState& state,
                                 const LogLinearEditPolicy& policy, Rng& rng, const SimilarityProvider& sim,
                                 double noise = 0.0, const UnigramSampler* words = nullptr);

// Left-to-right draft policy pi(g_i | g_<i, S_h).
class DraftTokenPolicy {
 public:
  virtual ~DraftTokenPolicy() = default;
  virtual double prob(const Token& next, std::span<const Token> prefix, const PolicyState& s) const = 0;
};

class UniformDraftPolicy final : public DraftTokenPolicy {
 public:
  explicit UniformDraftPolicy(std::vector<Token> vocabulary);
  double prob(const Token& next, std::span<const Token> prefix, const PolicyState& s) const override;

 private:
  std::vector<Token> vocab_;
};

// The expert viewed as a draft policy: all mass on the goal's next token.
class ExpertDraftPolicy final : public DraftTokenPolicy {
 public:
  explicit ExpertDraftPolicy(Document goal) : goal_(std::move(goal)) {}
  double prob(const Token& next, std::span<const Token> prefix, const PolicyState& s) const override;

 private:
  Document goal_;
};

// -sum_i log pi(g_i | g_<i, S_h).
double nll_draft_policy(const Document& goal, const PolicyState& state, const DraftTokenPolicy& policy);

struct DaggerConfig {
  double lambda = 0.9;
  std::size_t warmup = 300;
  std::size_t iterations = 600;
  std::size_t states_per_iteration = 10000;  // B
  std::size_t fit_steps = 0;                 // SGD steps per iteration; 0 means B
  double noise = 0.3;
  double step_size = 0.1;
  double clip_norm = 10.0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  SessionConfig session;  // roll-in protocol, train-time user included
  DecodeConfig decode;    // learner turns during roll-in

  void validate() const;
};

// beta_t = lambda^max(0, t - warmup), t counted from 0.
double dagger_beta(double lambda, std::size_t warmup, std::size_t t);

struct DatasetEntry {
  Document goal;
  PolicyState state;
  std::size_t iteration = 0;
  bool expert_acted = false;  // which side of the mixture answered this state
};

struct CurvePoint {
  std::size_t iteration = 0;
  double beta = 1.0;
  double loss = 0.0;        // mean fit loss
  double mean_score = 0.0;  // mean final score of this iteration's roll-ins
  std::size_t dataset_size = 0;
};

struct DaggerResult {
  LogLinearEditPolicy policy;
  std::vector<CurvePoint> curve;
  std::vector<DatasetEntry> dataset;
};

using DaggerObserver = std::function<void(const CurvePoint&, const std::vector<DatasetEntry>&)>;

// Roll in with a per-turn Bernoulli(beta) choice between the expert and the
// current policy, append every visited state to the dataset, then fit by SGD
// on the token edit objective over the whole dataset.
DaggerResult dagger_train(LogLinearEditPolicy policy, const DaggerConfig& cfg, std::span<const Document> goals,
                          const SimilarityProvider& sim, const DaggerObserver& observer = {});

void write_learning_curve(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace itg
