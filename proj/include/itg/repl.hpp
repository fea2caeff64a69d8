#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "itg/environment.hpp"
#include "itg/policy.hpp"

namespace itg {

// One terminal command. Locations are 1-based as everywhere else.
struct ReplCommand {
  enum class Kind { Edit, Done, Show, Help, Quit } kind = Kind::Show;
  Edit edit;
};

// Parses "ins <l> <word>", "del <l>", "sub <l> <word>", "done", "show",
// "help", "quit". Throws std::invalid_argument with a short message.
ReplCommand parse_repl_command(const std::string& line);

// Human-in-the-loop session: the person edits, `done` hands the turn to the
// agent, `quit` (or end of input) ends the session. Malformed or invalid
// commands are reported and the prompt repeats. Without a goal the session is
// open-ended and scores are 0.
SessionTrace repl_session(std::istream& in, std::ostream& out, const std::optional<Document>& goal,
                          const Policy& policy, const SessionConfig& cfg, const SimilarityProvider& sim);

struct ReplayOptions {
  // Re-run the simulated user instead of feeding the recorded user edits.
  bool resimulate_user = false;
  std::shared_ptr<const IdfTable> idf;  // reattached when the user ranks by IDF
};

struct ReplayReport {
  bool structure_ok = true;  // recorded edits reproduce every recorded draft
  bool agent_ok = true;      // the policy reproduces every agent draft
  bool user_ok = true;       // only checked with resimulate_user
  bool final_ok = true;      // replayed final draft equals the recorded one
  std::vector<std::string> problems;

  bool ok() const { return structure_ok && agent_ok && user_ok && final_ok; }
};

// Checks a trace on its own (structure) and, given the policy, re-executes it
// through a fresh session with the same config and seeds.
ReplayReport replay_trace(const SessionTrace& trace, const Policy* policy, const SimilarityProvider& sim,
                          const ReplayOptions& opt = {});

}  // namespace itg
