#include "itg/trace_io.hpp"

#include <fstream>
#include <json.hpp>

namespace itg {

using nlohmann::json;

namespace {

json tokens_json(const Document& d) { return json(std::vector<Token>(d.tokens().begin(), d.tokens().end())); }

json marks_json(const Document& d) {
  json out = json::array();
  for (const auto m : d.marks()) out.push_back(std::string(to_string(m)));
  return out;
}

Document document_from(const json& tokens, const json* marks, std::size_t capacity) {
  auto words = tokens.get<std::vector<Token>>();
  if (!marks) return Document(std::move(words), capacity);
  std::vector<Mark> ms;
  for (const auto& m : *marks) ms.push_back(mark_from_string(m.get<std::string>()));
  return Document(std::move(words), std::move(ms), capacity);
}

json edit_json(const Edit& e) {
  json j{{"l", e.location}, {"op", std::string(to_string(e.op))}};
  if (e.op != Op::Del) j["w"] = e.word;
  return j;
}

Edit edit_from(const json& j) {
  const auto l = j.at("l").get<std::size_t>();
  const Op op = op_from_string(j.at("op").get<std::string>());
  if (op == Op::Del) return Edit::del(l);
  return {l, op, j.at("w").get<Token>()};
}

Actor actor_from(const std::string& s) {
  if (s == "user") return Actor::User;
  if (s == "agent") return Actor::Agent;
  throw std::runtime_error("unknown actor '" + s + "' in trace");
}

json config_json(const SessionConfig& c) {
  return json{{"horizon", c.horizon},
              {"tolerance", c.tolerance},
              {"budget", c.budget},
              {"episodes", c.episodes},
              {"user_heuristics", c.user.heuristics.to_string()},
              {"user_seed", c.user.rng_seed},
              {"score", c.score.to_string()},
              {"cost", c.cost},
              {"seed", c.seed},
              {"capacity", c.capacity}};
}

SessionConfig config_from(const json& j) {
  SessionConfig c;
  c.horizon = j.at("horizon").get<std::size_t>();
  c.tolerance = j.at("tolerance").get<double>();
  c.budget = j.at("budget").get<std::size_t>();
  c.episodes = j.at("episodes").get<std::size_t>();
  c.user.heuristics = HeuristicSet::parse(j.at("user_heuristics").get<std::string>());
  c.user.rng_seed = j.at("user_seed").get<std::uint64_t>();
  c.score = ScoreFn::parse(j.at("score").get<std::string>());
  c.cost = j.at("cost").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.capacity = j.at("capacity").get<std::size_t>();
  return c;
}

}  // namespace

void write_trace(std::ostream& out, const SessionTrace& t) {
  out << json{{"type", "header"}, {"config", config_json(t.config)}, {"policy", t.policy}, {"goal", t.has_goal ? tokens_json(t.goal) : json(nullptr)}}
             .dump()
      << '\n';
  for (const auto& r : t.turns) {
    json edits = json::array();
    for (const auto& e : r.edits) edits.push_back(edit_json(e));
    json j{{"type", "turn"},
           {"h", r.h},
           {"actor", std::string(to_string(r.actor))},
           {"draft", tokens_json(r.draft)},
           {"marks", marks_json(r.draft)},
           {"edits", edits},
           {"edits_recorded", r.edits_recorded},
           {"score", r.score},
           {"budget_left", r.budget_left}};
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    out << j.dump() << '\n';
  }
  out << json{{"type", "end"},
              {"status", std::string(to_string(t.status))},
              {"T", t.T},
              {"final_draft", tokens_json(t.final_draft)},
              {"final_score", t.final_score},
              {"reward", t.reward}}
             .dump()
      << '\n';
  out.flush();
}

SessionTrace read_trace(std::istream& in) {
  SessionTrace t;
  bool header = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + " is not JSON: " + e.what());
    }
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      t.config = config_from(j.at("config"));
      t.policy = j.value("policy", "");
      t.has_goal = !j.at("goal").is_null();
      t.goal = t.has_goal ? document_from(j.at("goal"), nullptr, t.config.capacity) : Document(t.config.capacity);
      header = true;
    } else if (!header) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + " precedes the header");
    } else if (type == "turn") {
      TurnRecord r;
      r.h = j.at("h").get<std::size_t>();
      r.actor = actor_from(j.at("actor").get<std::string>());
      const json* marks = j.contains("marks") ? &j.at("marks") : nullptr;
      r.draft = document_from(j.at("draft"), marks, t.config.capacity);
      for (const auto& e : j.at("edits")) r.edits.push_back(edit_from(e));
      r.edits_recorded = j.value("edits_recorded", true);
      r.score = j.at("score").get<double>();
      r.budget_left = j.at("budget_left").get<std::size_t>();
      if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
      t.turns.push_back(std::move(r));
    } else if (type == "end") {
      t.status = session_status_from_string(j.at("status").get<std::string>());
      t.T = j.at("T").get<std::size_t>();
      t.final_draft = document_from(j.at("final_draft"), nullptr, t.config.capacity);
      t.final_score = j.at("final_score").get<double>();
      t.reward = j.at("reward").get<double>();
    } else {
      throw std::runtime_error("unknown trace record type '" + type + "'");
    }
  }
  if (!header) throw std::runtime_error("trace has no header record");
  return t;
}

void save_trace(const std::filesystem::path& path, const SessionTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  write_trace(out, trace);
}

SessionTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace(in);
}

}  // namespace itg
