#include "itg/decoding.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace itg {

void DecodeConfig::validate() const {
  if (!(stop_threshold > 0.0 && stop_threshold <= 1.0)) throw std::invalid_argument("stop threshold must lie in (0, 1]");
  if (max_edits < 1) throw std::invalid_argument("max edits must be at least 1");
  if (top_k < 1) throw std::invalid_argument("top-k must be at least 1");
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& probs, std::size_t k) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return probs[a] != probs[b] ? probs[a] > probs[b] : a < b; });
  idx.resize(k);
  return idx;
}

DecodeResult decode(const EditPolicy& policy, const Document& u, const PolicyState& state, const DecodeConfig& cfg,
                    Rng& rng) {
  cfg.validate();
  DecodeResult r;
  Document x = u;
  std::vector<Document> visited{x};
  for (std::size_t i = 0;; ++i) {
    const ActionDistribution d = policy.distribution(x, state);
    r.stop_probs.push_back(d.stop);
    if (d.stop > cfg.stop_threshold || i == cfg.max_edits) break;
    const auto keep = top_k_indices(d.probs, cfg.top_k);
    double mass = 0;
    for (const auto k : keep) mass += d.probs[k];
    if (keep.empty() || !(mass > 0)) {
      r.no_valid_edits = true;
      break;
    }
    std::uniform_real_distribution<double> unif(0.0, mass);
    double t = unif(rng);
    std::size_t pick = keep.back();
    for (const auto k : keep) {
      if (t < d.probs[k]) {
        pick = k;
        break;
      }
      t -= d.probs[k];
    }
    r.sampled.push_back(d.edits[pick]);
    x = apply(x, d.edits[pick], Actor::Agent);
    visited.push_back(x);
  }
  r.chosen = static_cast<std::size_t>(std::max_element(r.stop_probs.begin(), r.stop_probs.end()) - r.stop_probs.begin());
  r.draft = visited[r.chosen];
  r.edits.assign(r.sampled.begin(), r.sampled.begin() + static_cast<std::ptrdiff_t>(r.chosen));
  return r;
}

DecodeResult decode(const EditPolicy& policy, const Document& u, const PolicyState& state, const DecodeConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return decode(policy, u, state, cfg, rng);
}

EditPolicyAgent::EditPolicyAgent(std::shared_ptr<const EditPolicy> policy, DecodeConfig cfg, std::string name)
    : policy_(std::move(policy)), cfg_(cfg), name_(std::move(name)) {
  if (!policy_) throw std::invalid_argument("edit-policy agent needs a policy");
  cfg_.validate();
}

AgentTurn EditPolicyAgent::act(const PolicyState& state, Rng& rng) const {
  DecodeResult r = decode(*policy_, state.user, state, cfg_, rng);
  AgentTurn t;
  t.draft = std::move(r.draft);
  t.edits = std::move(r.edits);
  t.edits_recorded = true;
  if (r.no_valid_edits) t.warnings.push_back("NoValidEdits: policy put no mass on any edit below the stop threshold");
  return t;
}

}  // namespace itg
