#pragma once

#include <memory>
#include <string>
#include <vector>

#include "itg/rng.hpp"
#include "itg/similarity.hpp"
#include "itg/state.hpp"

namespace itg {

class IdfTable;

struct AgentTurn {
  Document draft;
  // Edits U_h -> draft when the agent works by editing; empty and unrecorded
  // for agents that emit a whole draft.
  std::vector<Edit> edits;
  bool edits_recorded = false;
  std::vector<std::string> warnings;
};

// An agent. Implementations are immutable during a session; all randomness
// comes through `rng`.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual AgentTurn act(const PolicyState& state, Rng& rng) const = 0;
};

// Returns U_h unchanged.
class IdentityPolicy final : public Policy {
 public:
  std::string name() const override { return "identity"; }
  AgentTurn act(const PolicyState& state, Rng& rng) const override;
};

// Training-side oracle that emits the goal.
class ExpertPolicy final : public Policy {
 public:
  explicit ExpertPolicy(Document goal) : goal_(std::move(goal)) {}
  std::string name() const override { return "expert"; }
  AgentTurn act(const PolicyState& state, Rng& rng) const override;

 private:
  Document goal_;
};

// Knows the goal but can only produce words seen in training (document
// frequency > 0 in `idf`). It applies every alignment edit toward the goal
// whose word it knows and deletes where it would need an unknown word; the
// user must supply the rest.
class ScriptedNearExpertPolicy final : public Policy {
 public:
  ScriptedNearExpertPolicy(Document goal, std::shared_ptr<const IdfTable> idf,
                           std::shared_ptr<const SimilarityProvider> sim);
  std::string name() const override { return "near_expert"; }
  AgentTurn act(const PolicyState& state, Rng& rng) const override;

 private:
  Document goal_;
  std::shared_ptr<const IdfTable> idf_;
  std::shared_ptr<const SimilarityProvider> sim_;
};

}  // namespace itg
