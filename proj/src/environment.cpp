#include "itg/environment.hpp"

#include "itg/metrics.hpp"

namespace itg {

ScoreFn ScoreFn::parse(std::string_view name) {
  if (name == "token_f1" || name == "f1") return {ScoreKind::TokenF1};
  if (name == "chrf") return {ScoreKind::Chrf};
  if (name == "exact") return {ScoreKind::Exact};
  throw std::invalid_argument("unknown score function '" + std::string(name) + "'");
}

std::string ScoreFn::to_string() const {
  switch (kind) {
    case ScoreKind::TokenF1: return "token_f1";
    case ScoreKind::Chrf: return "chrf";
    case ScoreKind::Exact: return "exact";
  }
  return "token_f1";
}

double score(const Document& draft, const Document& goal, const ScoreFn& fn) {
  switch (fn.kind) {
    case ScoreKind::TokenF1: return metrics::token_f1(draft, goal);
    case ScoreKind::Chrf: return metrics::chrf(draft, goal);
    case ScoreKind::Exact: return draft == goal ? 1.0 : 0.0;
  }
  return 0.0;
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Running: return "running";
    case SessionStatus::StoppedSatisfied: return "stopped_satisfied";
    case SessionStatus::StoppedHorizon: return "stopped_horizon";
    case SessionStatus::StoppedBudget: return "stopped_budget";
  }
  return "running";
}

SessionStatus session_status_from_string(std::string_view s) {
  for (const auto v : {SessionStatus::Running, SessionStatus::StoppedSatisfied, SessionStatus::StoppedHorizon,
                       SessionStatus::StoppedBudget}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown session status '" + std::string(s) + "'");
}

void SessionConfig::validate() const {
  if (horizon == 0) throw HorizonZero("session horizon must be positive");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  if (episodes == 0) throw std::invalid_argument("episode count must be positive");
  if (budget % episodes != 0) {
    throw IndivisibleBudget("budget " + std::to_string(budget) + " is not divisible by " +
                            std::to_string(episodes) + " episodes");
  }
  if (cost < 0.0) throw std::invalid_argument("turn cost must be non-negative");
  if (budget > 0) {
    UserSimConfig u = user;
    u.edits_per_episode = edits_per_episode();
    u.validate();
  }
}

std::size_t SessionTrace::user_edits() const {
  std::size_t n = 0;
  for (const auto& t : turns) {
    if (t.actor == Actor::User) n += t.edits.size();
  }
  return n;
}

Session::Session(Document goal, SessionConfig cfg, const SimilarityProvider& sim, std::string policy_name)
    : sim_(&sim), budget_left_(cfg.budget), user_draft_(cfg.capacity), agent_draft_(cfg.capacity),
      prev_user_(cfg.capacity) {
  cfg.validate();
  if (goal.capacity() != cfg.capacity) goal = Document(std::vector<Token>(goal.tokens().begin(), goal.tokens().end()), cfg.capacity);
  cfg.user.edits_per_episode = std::max<std::size_t>(1, cfg.edits_per_episode());
  trace_.config = std::move(cfg);
  trace_.policy = std::move(policy_name);
  trace_.goal = std::move(goal);
  trace_.final_draft = agent_draft_;
  trace_.final_score = score_of(agent_draft_);
  trace_.reward = trace_.final_score;
}

Session::Session(SessionConfig cfg, const SimilarityProvider& sim, std::string policy_name)
    : Session(Document(cfg.capacity), std::move(cfg), sim, std::move(policy_name)) {
  trace_.has_goal = false;
  trace_.final_score = trace_.reward = 0.0;
}

double Session::score_of(const Document& d) const {
  return trace_.has_goal ? score(d, trace_.goal, trace_.config.score) : 0.0;
}

bool Session::boundary() {
  if (status_ != SessionStatus::Running) return false;
  if (awaiting_agent_) throw std::logic_error("agent has not moved yet this round");
  const auto& cfg = trace_.config;
  if (trace_.has_goal && (agent_draft_ == trace_.goal || score_of(agent_draft_) > 1.0 - cfg.tolerance)) {
    status_ = SessionStatus::StoppedSatisfied;
  } else if (budget_left_ == 0) {
    status_ = SessionStatus::StoppedBudget;
  } else if (h_ == cfg.horizon) {
    status_ = SessionStatus::StoppedHorizon;
  }
  trace_.status = status_;
  if (status_ != SessionStatus::Running) return false;
  ++h_;
  return true;
}

bool Session::begin_round() {
  if (!boundary()) return false;
  UserSimConfig u = trace_.config.user;
  u.edits_per_episode = std::min(trace_.config.edits_per_episode(), budget_left_);
  UserTurn turn = user_step(agent_draft_, trace_.goal, u, *sim_);
  user_move(std::move(turn.edits), std::move(turn.draft));
  return true;
}

bool Session::begin_round(std::span<const Edit> user_edits) {
  // Validate before touching any state so a bad command can be retried.
  if (status_ == SessionStatus::Running && !awaiting_agent_) {
    (void)apply_sequence(agent_draft_, user_edits, Actor::User);
  }
  if (!boundary()) return false;
  Document next = apply_sequence(agent_draft_, user_edits, Actor::User);
  user_move(std::vector<Edit>(user_edits.begin(), user_edits.end()), std::move(next));
  return true;
}

void Session::user_move(std::vector<Edit> edits, Document next) {
  budget_left_ -= std::min(budget_left_, edits.size());
  for (const auto& e : edits) {
    if (e.op != Op::Del) ++user_words_[e.word];
  }
  state_.h = h_;
  state_.prev_user = prev_user_;
  state_.prev_agent = agent_draft_;
  state_.user = next;
  state_.user_edits = edits;
  state_.user_words = user_words_;
  state_.diff = last_agent_edits_
                    ? diff_from_edits(prev_user_, *last_agent_edits_, edits, next)
                    : diff_from_alignment(prev_user_, agent_draft_, edits, next, *sim_);
  user_draft_ = next;

  TurnRecord r;
  r.h = h_;
  r.actor = Actor::User;
  r.draft = std::move(next);
  r.edits = std::move(edits);
  r.score = score_of(r.draft);
  r.budget_left = budget_left_;
  trace_.turns.push_back(std::move(r));
  awaiting_agent_ = true;
}

const PolicyState& Session::state() const {
  if (!awaiting_agent_) throw std::logic_error("no agent-visible state outside an agent turn");
  return state_;
}

void Session::agent_move(AgentTurn turn) {
  if (!awaiting_agent_) throw std::logic_error("agent moved out of turn");
  if (turn.draft.capacity() != user_draft_.capacity()) {
    turn.draft = Document(std::vector<Token>(turn.draft.tokens().begin(), turn.draft.tokens().end()),
                          user_draft_.capacity());
  }
  Document next;
  if (turn.edits_recorded) {
    next = apply_sequence(user_draft_, turn.edits, Actor::Agent);
    if (!(next == turn.draft)) throw PolicyFailure("agent edits do not produce its reported draft");
    last_agent_edits_ = turn.edits;
  } else {
    next = inherit_marks(user_draft_, turn.draft, *sim_);
    last_agent_edits_.reset();
  }
  prev_user_ = user_draft_;
  agent_draft_ = next;
  awaiting_agent_ = false;

  TurnRecord r;
  r.h = h_;
  r.actor = Actor::Agent;
  r.draft = std::move(next);
  r.edits = std::move(turn.edits);
  r.edits_recorded = turn.edits_recorded;
  r.score = score_of(r.draft);
  r.budget_left = budget_left_;
  r.warnings = std::move(turn.warnings);
  trace_.turns.push_back(std::move(r));

  trace_.T = h_;
  trace_.final_draft = agent_draft_;
  trace_.final_score = trace_.turns.back().score;
  trace_.reward = trace_.final_score - trace_.config.cost * static_cast<double>(trace_.T);
}

void Session::abandon() {
  if (status_ != SessionStatus::Running) return;
  if (awaiting_agent_) {
    // The user's last move stands without an agent reply.
    awaiting_agent_ = false;
  }
  status_ = SessionStatus::StoppedHorizon;
  trace_.status = status_;
}

SessionTrace run_session(const Document& goal, const Policy& policy, const SessionConfig& cfg,
                         const SimilarityProvider& sim) {
  Session s(goal, cfg, sim, policy.name());
  while (s.begin_round()) {
    Rng rng(mix_seed(cfg.seed, s.round()));
    AgentTurn turn;
    try {
      turn = policy.act(s.state(), rng);
    } catch (const std::exception& e) {
      throw PolicyFailure("policy '" + policy.name() + "' failed at round " + std::to_string(s.round()) + ": " +
                          e.what());
    }
    s.agent_move(std::move(turn));
  }
  return s.trace();
}

}  // namespace itg
