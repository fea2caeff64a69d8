#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "itg/policy.hpp"
#include "itg/state.hpp"
#include "itg/user_sim.hpp"

namespace itg {

class IndivisibleBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class HorizonZero : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class PolicyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScoreKind : std::uint8_t { TokenF1, Chrf, Exact };

struct ScoreFn {
  ScoreKind kind = ScoreKind::TokenF1;

  static ScoreFn parse(std::string_view name);
  std::string to_string() const;
  friend bool operator==(const ScoreFn&, const ScoreFn&) = default;
};

// Closeness of a draft to the goal in [0, 1]; score(G, G) = 1.
double score(const Document& draft, const Document& goal, const ScoreFn& fn = {});

enum class SessionStatus : std::uint8_t { Running, StoppedSatisfied, StoppedHorizon, StoppedBudget };
std::string_view to_string(SessionStatus s);
SessionStatus session_status_from_string(std::string_view s);

struct SessionConfig {
  std::size_t horizon = 8;    // H
  double tolerance = 0.05;    // delta
  std::size_t budget = 6;     // N, total user edits
  std::size_t episodes = 1;   // M, user turns sharing the budget
  UserSimConfig user;         // edits_per_episode is overridden by N / M
  ScoreFn score;
  double cost = 0.0;          // reward = s(A_T) - cost * T
  std::uint64_t seed = 0;     // agent randomness
  std::size_t capacity = kDefaultCapacity;

  void validate() const;
  std::size_t edits_per_episode() const { return budget / episodes; }
};

struct TurnRecord {
  std::size_t h = 0;
  Actor actor = Actor::User;
  Document draft;
  std::vector<Edit> edits;
  bool edits_recorded = true;
  double score = 0.0;
  std::size_t budget_left = 0;
  std::vector<std::string> warnings;
};

struct SessionTrace {
  SessionConfig config;
  std::string policy;
  Document goal;
  bool has_goal = true;  // false for open-ended terminal sessions; scores are then 0
  std::vector<TurnRecord> turns;
  SessionStatus status = SessionStatus::Running;
  std::size_t T = 0;  // agent turns taken; A_T is the final draft
  Document final_draft;
  double final_score = 0.0;
  double reward = 0.0;

  std::size_t user_edits() const;
};

// Single-owner state of one interaction. Rounds go: boundary check, user move,
// agent move. The simulated user can be swapped for externally supplied edits.
class Session {
 public:
  Session(Document goal, SessionConfig cfg, const SimilarityProvider& sim, std::string policy_name = "");
  // Open-ended: no goal, never satisfied; the human ends it.
  Session(SessionConfig cfg, const SimilarityProvider& sim, std::string policy_name = "");

  // Runs the stopping checks for the next round; if still running, the
  // simulated user moves. Returns whether the agent is to act.
  bool begin_round();
  // Same, with the user's edits given (a human at the terminal). Budget is
  // charged but not enforced.
  bool begin_round(std::span<const Edit> user_edits);

  // Agent-visible view after the user's move (encode_state).
  const PolicyState& state() const;
  void agent_move(AgentTurn turn);

  SessionStatus status() const noexcept { return status_; }
  std::size_t round() const noexcept { return h_; }
  std::size_t budget_left() const noexcept { return budget_left_; }
  const Document& agent_draft() const noexcept { return agent_draft_; }
  const Document& goal() const noexcept { return trace_.goal; }
  const SessionConfig& config() const noexcept { return trace_.config; }

  // Ends a running session early (e.g. the terminal user quits).
  void abandon();
  const SessionTrace& trace() const noexcept { return trace_; }

 private:
  bool boundary();
  double score_of(const Document& d) const;
  void user_move(std::vector<Edit> edits, Document next);

  const SimilarityProvider* sim_;
  SessionTrace trace_;
  SessionStatus status_ = SessionStatus::Running;
  std::size_t h_ = 0;
  std::size_t budget_left_;
  Document user_draft_;   // U_h
  Document agent_draft_;  // A_{h-1} until the agent moves
  Document prev_user_;    // U_{h-1}
  std::optional<std::vector<Edit>> last_agent_edits_;
  std::map<Token, std::size_t> user_words_;
  PolicyState state_;
  bool awaiting_agent_ = false;
};

// The full protocol with a simulated user. Policy exceptions surface as
// PolicyFailure.
SessionTrace run_session(const Document& goal, const Policy& policy, const SessionConfig& cfg,
                         const SimilarityProvider& sim);

}  // namespace itg
