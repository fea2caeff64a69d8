#include "itg/repl.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "itg/user_sim.hpp"

namespace itg {

namespace {

std::size_t parse_location(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("location must be a positive integer, got '" + s + "'");
  }
  const std::size_t l = std::stoul(s);
  if (l == 0) throw std::invalid_argument("locations start at 1");
  return l;
}

void show(std::ostream& out, const char* who, const Document& d) {
  out << who << ": " << (d.empty() ? "(blank)" : d.to_text()) << '\n';
}

constexpr const char* kHelp =
    "commands: ins <l> <word> | del <l> | sub <l> <word> | show | done | quit\n"
    "  locations are 1-based; 'done' hands the draft to the agent\n";

}  // namespace

ReplCommand parse_repl_command(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> w;
  for (std::string t; ss >> t;) w.push_back(t);
  if (w.empty()) throw std::invalid_argument("empty command");
  ReplCommand c;
  const std::string& verb = w[0];
  const auto arity = [&](std::size_t n) {
    if (w.size() != n) throw std::invalid_argument("'" + verb + "' takes " + std::to_string(n - 1) + " argument(s)");
  };
  if (verb == "ins" || verb == "sub") {
    arity(3);
    c.kind = ReplCommand::Kind::Edit;
    c.edit = verb == "ins" ? Edit::ins(parse_location(w[1]), w[2]) : Edit::sub(parse_location(w[1]), w[2]);
  } else if (verb == "del") {
    arity(2);
    c.kind = ReplCommand::Kind::Edit;
    c.edit = Edit::del(parse_location(w[1]));
  } else if (verb == "done") {
    arity(1);
    c.kind = ReplCommand::Kind::Done;
  } else if (verb == "show") {
    arity(1);
    c.kind = ReplCommand::Kind::Show;
  } else if (verb == "help" || verb == "?") {
    c.kind = ReplCommand::Kind::Help;
  } else if (verb == "quit" || verb == "exit") {
    arity(1);
    c.kind = ReplCommand::Kind::Quit;
  } else {
    throw std::invalid_argument("unknown command '" + verb + "'");
  }
  return c;
}

SessionTrace repl_session(std::istream& in, std::ostream& out, const std::optional<Document>& goal,
                          const Policy& policy, const SessionConfig& cfg, const SimilarityProvider& sim) {
  Session s = goal ? Session(*goal, cfg, sim, policy.name()) : Session(cfg, sim, policy.name());
  std::vector<Edit> pending;
  Document working = s.agent_draft();
  out << kHelp;
  if (goal) show(out, "goal", *goal);
  show(out, "draft", working);

  std::string line;
  while (s.status() == SessionStatus::Running) {
    out << "itg[" << s.round() + 1 << "]> " << std::flush;
    if (!std::getline(in, line)) break;
    ReplCommand cmd;
    try {
      cmd = parse_repl_command(line);
    } catch (const std::invalid_argument& e) {
      out << "? " << e.what() << '\n';
      continue;
    }
    switch (cmd.kind) {
      case ReplCommand::Kind::Help:
        out << kHelp;
        break;
      case ReplCommand::Kind::Show:
        show(out, "draft", working);
        if (!pending.empty()) out << "pending: " << pending.size() << " edit(s)\n";
        break;
      case ReplCommand::Kind::Edit:
        try {
          working = apply(working, cmd.edit, Actor::User);
          pending.push_back(cmd.edit);
          show(out, "draft", working);
        } catch (const std::exception& e) {
          out << "? " << e.what() << '\n';
        }
        break;
      case ReplCommand::Kind::Done: {
        if (!s.begin_round(pending)) {
          out << "session over: " << to_string(s.status()) << '\n';
          break;
        }
        pending.clear();
        Rng rng(mix_seed(cfg.seed, s.round()));
        AgentTurn turn;
        try {
          turn = policy.act(s.state(), rng);
        } catch (const std::exception& e) {
          throw PolicyFailure("policy '" + policy.name() + "' failed at round " + std::to_string(s.round()) + ": " +
                              e.what());
        }
        s.agent_move(std::move(turn));
        working = s.agent_draft();
        show(out, "agent", working);
        if (goal) out << "score: " << s.trace().turns.back().score << '\n';
        break;
      }
      case ReplCommand::Kind::Quit:
        s.abandon();
        break;
    }
  }
  if (s.status() == SessionStatus::Running) s.abandon();
  out << "status: " << to_string(s.status()) << '\n';
  return s.trace();
}

ReplayReport replay_trace(const SessionTrace& trace, const Policy* policy, const SimilarityProvider& sim,
                          const ReplayOptions& opt) {
  ReplayReport rep;
  const auto problem = [&](bool& flag, std::string msg) {
    flag = false;
    rep.problems.push_back(std::move(msg));
  };

  // Structure: each recorded draft follows from the previous one.
  Document prev(trace.config.capacity);
  for (std::size_t i = 0; i < trace.turns.size(); ++i) {
    const TurnRecord& r = trace.turns[i];
    const std::string where = "turn " + std::to_string(i) + " (h=" + std::to_string(r.h) + ", " +
                              std::string(to_string(r.actor)) + ")";
    if (r.edits_recorded) {
      try {
        const Document next = apply_sequence(prev, r.edits, r.actor);
        if (next.tokens().size() != r.draft.tokens().size() ||
            !std::equal(next.tokens().begin(), next.tokens().end(), r.draft.tokens().begin())) {
          problem(rep.structure_ok, where + ": edits do not produce the recorded draft");
        }
      } catch (const std::exception& e) {
        problem(rep.structure_ok, where + ": " + e.what());
      }
    }
    prev = r.draft;
  }
  if (prev.to_text() != trace.final_draft.to_text() && trace.T > 0) {
    problem(rep.final_ok, "final draft differs from the last recorded draft");
  }
  if (!policy) return rep;

  // Re-execution through a fresh session.
  SessionConfig cfg = trace.config;
  if (cfg.user.heuristics.ranking_idf && !cfg.user.idf_table) cfg.user.idf_table = opt.idf;
  if (opt.resimulate_user && (!trace.has_goal || (cfg.user.heuristics.ranking_idf && !cfg.user.idf_table))) {
    problem(rep.user_ok, "cannot resimulate the user: " +
                             std::string(trace.has_goal ? "no IDF table supplied" : "trace has no goal"));
    return rep;
  }
  if (cfg.user.heuristics.ranking_idf && !cfg.user.idf_table) cfg.user.heuristics.ranking_idf = false;
  Session s = trace.has_goal ? Session(trace.goal, cfg, sim, policy->name()) : Session(cfg, sim, policy->name());
  std::size_t i = 0;
  while (i < trace.turns.size()) {
    const TurnRecord& u = trace.turns[i];
    if (u.actor != Actor::User) {
      problem(rep.structure_ok, "turn " + std::to_string(i) + ": expected a user turn");
      return rep;
    }
    bool running = false;
    try {
      running = opt.resimulate_user ? s.begin_round() : s.begin_round(u.edits);
    } catch (const std::exception& e) {
      problem(rep.user_ok, "turn " + std::to_string(i) + ": " + e.what());
      return rep;
    }
    if (!running) {
      problem(rep.final_ok, "replayed session stopped before recorded turn " + std::to_string(i));
      return rep;
    }
    if (opt.resimulate_user && s.state().user.to_text() != u.draft.to_text()) {
      problem(rep.user_ok, "turn " + std::to_string(i) + ": simulated user draft '" + s.state().user.to_text() +
                               "' != recorded '" + u.draft.to_text() + "'");
    }
    ++i;
    if (i == trace.turns.size()) break;  // the recorded session ended after the user's move
    Rng rng(mix_seed(cfg.seed, s.round()));
    AgentTurn turn = policy->act(s.state(), rng);
    const TurnRecord& a = trace.turns[i];
    if (turn.draft.to_text() != a.draft.to_text()) {
      problem(rep.agent_ok, "turn " + std::to_string(i) + ": agent produced '" + turn.draft.to_text() + "' != recorded '" +
                                a.draft.to_text() + "'");
    }
    s.agent_move(std::move(turn));
    ++i;
  }
  if (s.trace().final_draft.to_text() != trace.final_draft.to_text()) {
    problem(rep.final_ok, "replayed final draft '" + s.trace().final_draft.to_text() + "' != recorded '" +
                              trace.final_draft.to_text() + "'");
  }
  return rep;
}

}  // namespace itg
