#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "itg/edit_policy.hpp"
#include "itg/policy.hpp"
#include "itg/rng.hpp"

namespace itg {

struct DecodeConfig {
  double stop_threshold = 0.95;  // alpha
  std::size_t max_edits = 64;    // N_max
  std::size_t top_k = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct DecodeResult {
  Document draft;                // x_j, the visited draft with the highest stop probability
  std::vector<Edit> edits;       // u -> draft
  std::size_t chosen = 0;        // j
  std::vector<double> stop_probs;  // s_0, s_1, ... for every visited draft
  std::vector<Edit> sampled;     // every edit applied, including those past j
  bool no_valid_edits = false;   // stopped because the policy had no edit mass
};

// Repeatedly samples a non-stop edit from the renormalized top-k of pi(. | x)
// until the stop probability exceeds the threshold or max_edits edits were
// made. The stop action itself is never sampled.
DecodeResult decode(const EditPolicy& policy, const Document& u, const PolicyState& state, const DecodeConfig& cfg,
                    Rng& rng);
DecodeResult decode(const EditPolicy& policy, const Document& u, const PolicyState& state, const DecodeConfig& cfg);

// Indices of the k most probable actions, ties toward earlier indices.
std::vector<std::size_t> top_k_indices(const std::vector<double>& probs, std::size_t k);

// Agent that answers each user turn by decoding from U_h.
class EditPolicyAgent final : public Policy {
 public:
  EditPolicyAgent(std::shared_ptr<const EditPolicy> policy, DecodeConfig cfg, std::string name = "edit_policy");
  std::string name() const override { return name_; }
  AgentTurn act(const PolicyState& state, Rng& rng) const override;

 private:
  std::shared_ptr<const EditPolicy> policy_;
  DecodeConfig cfg_;
  std::string name_;
};

}  // namespace itg
