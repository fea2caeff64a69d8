#include "itg/policy.hpp"

#include "itg/alignment.hpp"
#include "itg/user_sim.hpp"

namespace itg {

AgentTurn IdentityPolicy::act(const PolicyState& state, Rng&) const {
  AgentTurn t;
  t.draft = state.user;
  t.edits_recorded = true;
  return t;
}

AgentTurn ExpertPolicy::act(const PolicyState&, Rng&) const {
  AgentTurn t;
  t.draft = goal_;
  return t;
}

ScriptedNearExpertPolicy::ScriptedNearExpertPolicy(Document goal, std::shared_ptr<const IdfTable> idf,
                                                   std::shared_ptr<const SimilarityProvider> sim)
    : goal_(std::move(goal)), idf_(std::move(idf)), sim_(std::move(sim)) {
  if (!idf_ || !sim_) throw std::invalid_argument("near-expert policy needs an IDF table and a similarity");
}

AgentTurn ScriptedNearExpertPolicy::act(const PolicyState& state, Rng&) const {
  const Alignment a = align(state.user, goal_, *sim_);
  std::vector<Token> out;
  for (std::size_t p = 1; p <= a.used; ++p) {
    const Token& yw = a.y_bar[p - 1];
    switch (a.kind_at(p)) {
      case AlignKind::Match: out.push_back(yw); break;
      case AlignKind::Del: break;
      case AlignKind::Ins:
      case AlignKind::Sub:
        if (idf_->doc_frequency(yw) > 0) out.push_back(yw);
        break;
    }
  }
  AgentTurn t;
  t.draft = Document(std::move(out), goal_.capacity());
  return t;
}

}  // namespace itg
