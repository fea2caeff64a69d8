#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itg/decoding.hpp"
#include "itg/environment.hpp"
#include "itg/imitation.hpp"
#include "itg/policy.hpp"

namespace itg {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class BudgetLedgerMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Flat "key = value" file. Values are numbers, bare or quoted strings, or
// bracketed comma lists; '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  std::size_t get(const std::string& key, std::size_t fallback) const;
  std::vector<std::string> get_list(const std::string& key, std::vector<std::string> fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  std::filesystem::path corpus;      // training sentences
  std::filesystem::path test_goals;  // held-out goals
  std::filesystem::path checkpoint;  // log-linear weights, for policy = loglinear
  std::filesystem::path output_dir = "out";
  std::string policy = "loglinear";  // identity | expert | near_expert | untrained | loglinear | dagger
  std::string similarity = "trigram";
  std::size_t budget = 6;
  std::vector<std::size_t> splits{1, 2, 3};
  std::size_t horizon = 8;
  double tolerance = 0.05;
  ScoreFn score;
  std::string train_heuristics = "idf+adj+contig";
  std::string test_heuristics = "idf+adj+contig";
  std::size_t train_episodes = 3;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> metrics{"bleu1", "token_f1", "chrf"};
  std::size_t max_goals = 0;  // 0 = all
  std::size_t workers = 1;
  std::size_t capacity = kDefaultCapacity;
  DecodeConfig decode;
  DaggerConfig dagger;  // session fields are filled from the keys above

  // Ablation axes.
  std::vector<double> ablate_noise{0.0, 0.1, 0.2, 0.3};
  std::vector<std::string> ablate_train_heuristics{"idf+adj+contig"};
  std::vector<double> ablate_lambda{0.8, 0.85, 0.9};
  std::vector<std::string> ablate_test_heuristics{"adj+contig", "contiguous", "adjacent", "unrestricted"};
  std::size_t ablate_episodes = 4;
  std::size_t ablate_edits_per_episode = 3;

  // ITG_SEED, when set, replaces `seed`.
  static ExperimentConfig from(const KeyValueConfig& kv, bool env_override = true);
  static ExperimentConfig load(const std::filesystem::path& path, bool env_override = true);
  void validate() const;

  // Session protocol for evaluation with M episodes and the given test user.
  SessionConfig session(std::size_t episodes, const std::string& heuristics,
                        std::shared_ptr<const IdfTable> idf) const;
  // Training config: DAgger settings plus the train-time session protocol.
  DaggerConfig dagger_config(std::shared_ptr<const IdfTable> idf) const;
};

std::shared_ptr<const SimilarityProvider> make_similarity(const std::string& name);

// Builds the agent for one goal (the expert-like policies need it).
using PolicyFactory = std::function<std::shared_ptr<const Policy>(const Document& goal)>;

// Resolves cfg.policy. `trained` supplies the log-linear policy for
// loglinear/dagger/untrained; `idf` serves near_expert.
PolicyFactory make_policy_factory(const std::string& spec, std::shared_ptr<const LogLinearEditPolicy> trained,
                                  std::shared_ptr<const IdfTable> idf, std::shared_ptr<const SimilarityProvider> sim,
                                  const DecodeConfig& decode);

struct MetricValues {
  double bleu1 = 0, token_f1 = 0, chrf = 0;
  double mean_T = 0, final_score = 0;

  double get(const std::string& metric) const;  // bleu1 | token_f1 | chrf | T | final_score
};

struct MetricReport {
  std::string label;
  std::size_t budget = 0;
  std::size_t episodes = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricValues> per_goal;  // averaged over seeds
  std::vector<MetricValues> per_seed;  // averaged over goals
  MetricValues aggregate;              // mean of per_goal
  MetricValues ci95;                   // half-width of a t interval over seeds
  std::size_t sessions = 0;
};

// One session result, kept for long-format output.
struct SessionResult {
  std::size_t goal = 0;
  std::uint64_t seed = 0;
  MetricValues values;
  SessionStatus status = SessionStatus::Running;
  std::size_t user_edits = 0;
};

// Runs every goal under every seed. Each session's user-edit total must equal
// the budget unless it stopped satisfied; otherwise BudgetLedgerMismatch.
MetricReport evaluate(const PolicyFactory& factory, std::span<const Document> goals, const SessionConfig& base,
                      std::span<const std::uint64_t> seeds, const SimilarityProvider& sim,
                      std::vector<SessionResult>* sessions = nullptr, std::size_t workers = 1,
                      const std::string& label = "");

struct SweepResult {
  std::vector<MetricReport> reports;  // one per split, in cfg.splits order
  std::vector<std::vector<SessionResult>> sessions;

  // final_score(M = b) - final_score(M = a), when both splits ran.
  std::optional<double> delta(std::size_t a, std::size_t b, const std::string& metric = "final_score") const;
};

SweepResult run_interactivity_sweep(const ExperimentConfig& cfg, const PolicyFactory& factory,
                                    std::span<const Document> goals, const SimilarityProvider& sim,
                                    std::shared_ptr<const IdfTable> idf);

// Long format: episodes,budget,seed,goal,metric,value.
void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& r);
// Per split and metric: mean and CI half-width.
void write_summary_csv(std::ostream& out, std::span<const MetricReport> reports, std::span<const std::string> metrics);
// Score against #episodes, one line per metric.
void write_sweep_svg(std::ostream& out, std::span<const MetricReport> reports, std::span<const std::string> metrics,
                     const std::string& title);

struct AblationRow {
  double noise = 0;
  std::string train_heuristics;
  double lambda = 0;
  std::string test_heuristics;
  MetricReport report;
};

// Trains one policy per (noise, train heuristics, lambda) cell when the
// policy spec is trainable, then evaluates it under each test-time user with
// the fixed ablation protocol. Non-trainable specs collapse the train axes
// into one cell. Cells run on up to cfg.workers threads.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::span<const Document> train,
                                      std::span<const Document> goals, std::shared_ptr<const SimilarityProvider> sim);

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows, std::span<const std::string> metrics);

bool trainable(const std::string& policy_spec);

}  // namespace itg
