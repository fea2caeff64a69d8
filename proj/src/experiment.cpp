#include "itg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "itg/corpus_stats.hpp"
#include "itg/metrics.hpp"
#include "itg/user_sim.hpp"

namespace itg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

// Drops a '#' comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return d;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' is out of range: '" + v + "'");
  }
}

double t_critical_95(std::size_t df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  return df >= 1 && df <= 30 ? table[df - 1] : 1.960;
}

MetricValues& operator+=(MetricValues& a, const MetricValues& b) {
  a.bleu1 += b.bleu1;
  a.token_f1 += b.token_f1;
  a.chrf += b.chrf;
  a.mean_T += b.mean_T;
  a.final_score += b.final_score;
  return a;
}

MetricValues scaled(MetricValues v, double k) {
  v.bleu1 *= k;
  v.token_f1 *= k;
  v.chrf *= k;
  v.mean_T *= k;
  v.final_score *= k;
  return v;
}

const std::set<std::string>& known_metrics() {
  static const std::set<std::string> m{"bleu1", "token_f1", "chrf", "T", "final_score"};
  return m;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k{
      "corpus", "test_goals", "checkpoint", "output_dir", "policy", "similarity", "budget", "splits", "horizon",
      "tolerance", "score", "train_heuristics", "test_heuristics", "train_episodes", "seed", "seeds", "metrics",
      "max_goals", "workers", "capacity", "stop_threshold", "max_edits", "top_k", "iterations", "warmup", "lambda",
      "noise", "states_per_iteration", "fit_steps", "step_size", "clip_norm", "ablate_noise",
      "ablate_train_heuristics", "ablate_lambda", "ablate_test_heuristics", "ablate_episodes",
      "ablate_edits_per_episode"};
  return k;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(10);
  o << v;
  return o.str();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig c;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (c.values_.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.values_[key] = value;
  }
  return c;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  return parse(in);
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : unquote(it->second);
}

double KeyValueConfig::get(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, unquote(it->second));
}

std::size_t KeyValueConfig::get(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : static_cast<std::size_t>(parse_uint(key, unquote(it->second)));
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key, std::vector<std::string> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv, bool env_override) {
  for (const auto& [key, value] : kv.values()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  c.corpus = kv.get("corpus", std::string());
  c.test_goals = kv.get("test_goals", std::string());
  c.checkpoint = kv.get("checkpoint", std::string());
  c.output_dir = kv.get("output_dir", c.output_dir.string());
  c.policy = kv.get("policy", c.policy);
  c.similarity = kv.get("similarity", c.similarity);
  c.budget = kv.get("budget", c.budget);
  if (kv.has("splits")) {
    c.splits.clear();
    for (const auto& s : kv.get_list("splits", {})) c.splits.push_back(parse_uint("splits", s));
  }
  c.horizon = kv.get("horizon", c.horizon);
  c.tolerance = kv.get("tolerance", c.tolerance);
  try {
    c.score = ScoreFn::parse(kv.get("score", std::string("token_f1")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.train_heuristics = kv.get("train_heuristics", c.train_heuristics);
  c.test_heuristics = kv.get("test_heuristics", c.test_heuristics);
  c.train_episodes = kv.get("train_episodes", c.train_episodes);
  c.seed = parse_uint("seed", kv.get("seed", std::string("0")));
  if (env_override) {
    if (const char* env = std::getenv("ITG_SEED"); env && *env) c.seed = parse_uint("ITG_SEED", env);
  }
  if (kv.has("seeds")) {
    c.seeds.clear();
    for (const auto& s : kv.get_list("seeds", {})) c.seeds.push_back(parse_uint("seeds", s));
  } else {
    c.seeds = {c.seed, c.seed + 1, c.seed + 2};
  }
  c.metrics = kv.get_list("metrics", c.metrics);
  c.max_goals = kv.get("max_goals", c.max_goals);
  c.workers = kv.get("workers", c.workers);
  c.capacity = kv.get("capacity", c.capacity);
  c.decode.stop_threshold = kv.get("stop_threshold", c.decode.stop_threshold);
  c.decode.max_edits = kv.get("max_edits", c.decode.max_edits);
  c.decode.top_k = kv.get("top_k", c.decode.top_k);
  c.decode.rng_seed = c.seed;
  c.dagger.iterations = kv.get("iterations", c.dagger.iterations);
  c.dagger.warmup = kv.get("warmup", c.dagger.warmup);
  c.dagger.lambda = kv.get("lambda", c.dagger.lambda);
  c.dagger.noise = kv.get("noise", c.dagger.noise);
  c.dagger.states_per_iteration = kv.get("states_per_iteration", c.dagger.states_per_iteration);
  c.dagger.fit_steps = kv.get("fit_steps", c.dagger.fit_steps);
  c.dagger.step_size = kv.get("step_size", c.dagger.step_size);
  c.dagger.clip_norm = kv.get("clip_norm", c.dagger.clip_norm);
  if (kv.has("ablate_noise")) {
    c.ablate_noise.clear();
    for (const auto& s : kv.get_list("ablate_noise", {})) c.ablate_noise.push_back(parse_double("ablate_noise", s));
  }
  c.ablate_train_heuristics = kv.get_list("ablate_train_heuristics", c.ablate_train_heuristics);
  if (kv.has("ablate_lambda")) {
    c.ablate_lambda.clear();
    for (const auto& s : kv.get_list("ablate_lambda", {})) c.ablate_lambda.push_back(parse_double("ablate_lambda", s));
  }
  c.ablate_test_heuristics = kv.get_list("ablate_test_heuristics", c.ablate_test_heuristics);
  c.ablate_episodes = kv.get("ablate_episodes", c.ablate_episodes);
  c.ablate_edits_per_episode = kv.get("ablate_edits_per_episode", c.ablate_edits_per_episode);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, bool env_override) {
  ExperimentConfig c = from(KeyValueConfig::load(path), env_override);
  // Relative paths are taken from the config file's directory.
  const auto base = path.parent_path();
  for (auto* p : {&c.corpus, &c.test_goals, &c.checkpoint, &c.output_dir}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> policies{"identity", "expert", "near_expert", "untrained", "loglinear", "dagger"};
  if (!policies.count(policy)) throw ConfigError("unknown policy '" + policy + "'");
  if (budget == 0) throw ConfigError("budget must be positive");
  if (splits.empty()) throw ConfigError("splits must be nonempty");
  for (const auto m : splits) {
    if (m == 0 || budget % m != 0) {
      throw ConfigError("split " + std::to_string(m) + " does not divide the budget " + std::to_string(budget));
    }
    if (m > horizon) throw ConfigError("split " + std::to_string(m) + " exceeds the horizon");
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  for (const auto& m : metrics) {
    if (!known_metrics().count(m)) throw ConfigError("unknown metric '" + m + "'");
  }
  if (workers == 0) throw ConfigError("workers must be positive");
  if (train_episodes == 0 || budget % train_episodes != 0) throw ConfigError("train_episodes must divide the budget");
  try {
    (void)HeuristicSet::parse(train_heuristics);
    (void)HeuristicSet::parse(test_heuristics);
    for (const auto& h : ablate_train_heuristics) (void)HeuristicSet::parse(h);
    for (const auto& h : ablate_test_heuristics) (void)HeuristicSet::parse(h);
    (void)make_similarity(similarity);
    decode.validate();
    DaggerConfig d = dagger;
    d.session = SessionConfig{};
    d.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (ablate_noise.empty() || ablate_train_heuristics.empty() || ablate_lambda.empty() ||
      ablate_test_heuristics.empty()) {
    throw ConfigError("ablation axes must be nonempty");
  }
  if (ablate_episodes == 0 || ablate_edits_per_episode == 0) throw ConfigError("ablation protocol must be positive");
  if (ablate_episodes > horizon) throw ConfigError("ablation episodes exceed the horizon");
}

SessionConfig ExperimentConfig::session(std::size_t episodes, const std::string& heuristics,
                                        std::shared_ptr<const IdfTable> idf) const {
  SessionConfig s;
  s.horizon = horizon;
  s.tolerance = tolerance;
  s.budget = budget;
  s.episodes = episodes;
  s.score = score;
  s.capacity = capacity;
  s.user.heuristics = HeuristicSet::parse(heuristics);
  if (s.user.heuristics.ranking_idf) {
    if (!idf) throw ConfigError("heuristics '" + heuristics + "' rank by IDF but no IDF table is available");
    s.user.idf_table = std::move(idf);
  }
  s.validate();
  return s;
}

DaggerConfig ExperimentConfig::dagger_config(std::shared_ptr<const IdfTable> idf) const {
  DaggerConfig d = dagger;
  d.seed = seed;
  d.workers = workers;
  d.decode = decode;
  d.session = session(train_episodes, train_heuristics, std::move(idf));
  d.session.seed = seed;
  return d;
}

std::shared_ptr<const SimilarityProvider> make_similarity(const std::string& name) {
  if (name == "trigram") return std::make_shared<const TrigramSimilarity>();
  if (name == "exact") return std::make_shared<const ExactSimilarity>();
  if (name.rfind("embedding:", 0) == 0) {
    return std::make_shared<const EmbeddingSimilarity>(EmbeddingSimilarity::from_file(name.substr(10)));
  }
  throw ConfigError("unknown similarity '" + name + "' (trigram, exact, embedding:<path>)");
}

bool trainable(const std::string& spec) { return spec == "dagger" || spec == "loglinear"; }

PolicyFactory make_policy_factory(const std::string& spec, std::shared_ptr<const LogLinearEditPolicy> trained,
                                  std::shared_ptr<const IdfTable> idf, std::shared_ptr<const SimilarityProvider> sim,
                                  const DecodeConfig& decode) {
  if (spec == "identity") {
    auto p = std::make_shared<const IdentityPolicy>();
    return [p](const Document&) { return p; };
  }
  if (spec == "expert") {
    return [](const Document& g) { return std::make_shared<const ExpertPolicy>(g); };
  }
  if (spec == "near_expert") {
    if (!idf) throw ConfigError("near_expert needs the training corpus IDF table");
    return [idf, sim](const Document& g) { return std::make_shared<const ScriptedNearExpertPolicy>(g, idf, sim); };
  }
  if (spec == "untrained" || spec == "loglinear" || spec == "dagger") {
    if (!trained) throw ConfigError("policy '" + spec + "' needs log-linear weights");
    auto agent = std::make_shared<const EditPolicyAgent>(trained, decode, spec);
    return [agent](const Document&) { return agent; };
  }
  throw ConfigError("unknown policy '" + spec + "'");
}

double MetricValues::get(const std::string& metric) const {
  if (metric == "bleu1") return bleu1;
  if (metric == "token_f1") return token_f1;
  if (metric == "chrf") return chrf;
  if (metric == "T") return mean_T;
  if (metric == "final_score") return final_score;
  throw ConfigError("unknown metric '" + metric + "'");
}

MetricReport evaluate(const PolicyFactory& factory, std::span<const Document> goals, const SessionConfig& base,
                      std::span<const std::uint64_t> seeds, const SimilarityProvider& sim,
                      std::vector<SessionResult>* sessions, std::size_t workers, const std::string& label) {
  if (goals.empty()) throw std::invalid_argument("no goals to evaluate");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  const std::size_t n = goals.size() * seeds.size();
  std::vector<SessionResult> results(n);

  const auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      const std::size_t s = i / goals.size(), g = i % goals.size();
      SessionConfig c = base;
      c.seed = mix_seed(seeds[s], g);
      c.user.rng_seed = seeds[s];
      const Document& goal = goals[g];
      const auto policy = factory(goal);
      const SessionTrace t = run_session(goal, *policy, c, sim);
      const std::size_t used = t.user_edits();
      if (used > c.budget || (used != c.budget && t.status != SessionStatus::StoppedSatisfied)) {
        throw BudgetLedgerMismatch("goal " + std::to_string(g) + ", seed " + std::to_string(seeds[s]) + ": user made " +
                                   std::to_string(used) + " of " + std::to_string(c.budget) + " edits, status " +
                                   std::string(to_string(t.status)));
      }
      SessionResult& r = results[i];
      r.goal = g;
      r.seed = seeds[s];
      r.status = t.status;
      r.user_edits = used;
      r.values.bleu1 = metrics::bleu1(t.final_draft, goal);
      r.values.token_f1 = metrics::token_f1(t.final_draft, goal);
      r.values.chrf = metrics::chrf(t.final_draft, goal);
      r.values.mean_T = static_cast<double>(t.T);
      r.values.final_score = t.final_score;
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, run, w));
    for (auto& j : jobs) j.get();
  }

  MetricReport rep;
  rep.label = label;
  rep.budget = base.budget;
  rep.episodes = base.episodes;
  rep.seeds.assign(seeds.begin(), seeds.end());
  rep.sessions = n;
  rep.per_goal.assign(goals.size(), {});
  rep.per_seed.assign(seeds.size(), {});
  for (std::size_t i = 0; i < n; ++i) {
    rep.per_goal[i % goals.size()] += results[i].values;
    rep.per_seed[i / goals.size()] += results[i].values;
  }
  for (auto& v : rep.per_goal) v = scaled(v, 1.0 / static_cast<double>(seeds.size()));
  for (auto& v : rep.per_seed) v = scaled(v, 1.0 / static_cast<double>(goals.size()));
  for (const auto& v : rep.per_goal) rep.aggregate += v;
  rep.aggregate = scaled(rep.aggregate, 1.0 / static_cast<double>(goals.size()));

  if (seeds.size() > 1) {
    const double k = static_cast<double>(seeds.size());
    const double t = t_critical_95(seeds.size() - 1);
    const auto half = [&](double MetricValues::*field) {
      double ss = 0;
      for (const auto& v : rep.per_seed) ss += (v.*field - rep.aggregate.*field) * (v.*field - rep.aggregate.*field);
      return t * std::sqrt(ss / (k - 1)) / std::sqrt(k);
    };
    rep.ci95.bleu1 = half(&MetricValues::bleu1);
    rep.ci95.token_f1 = half(&MetricValues::token_f1);
    rep.ci95.chrf = half(&MetricValues::chrf);
    rep.ci95.mean_T = half(&MetricValues::mean_T);
    rep.ci95.final_score = half(&MetricValues::final_score);
  }
  if (sessions) *sessions = std::move(results);
  return rep;
}

std::optional<double> SweepResult::delta(std::size_t a, std::size_t b, const std::string& metric) const {
  const MetricReport *ra = nullptr, *rb = nullptr;
  for (const auto& r : reports) {
    if (r.episodes == a) ra = &r;
    if (r.episodes == b) rb = &r;
  }
  if (!ra || !rb) return std::nullopt;
  return rb->aggregate.get(metric) - ra->aggregate.get(metric);
}

SweepResult run_interactivity_sweep(const ExperimentConfig& cfg, const PolicyFactory& factory,
                                    std::span<const Document> goals, const SimilarityProvider& sim,
                                    std::shared_ptr<const IdfTable> idf) {
  cfg.validate();
  if (cfg.max_goals && goals.size() > cfg.max_goals) goals = goals.first(cfg.max_goals);
  SweepResult out;
  out.reports.resize(cfg.splits.size());
  out.sessions.resize(cfg.splits.size());
  // One cell per split; cells share nothing but read-only inputs.
  std::vector<std::future<void>> cells;
  const auto launch = cfg.workers > 1 ? std::launch::async : std::launch::deferred;
  for (std::size_t i = 0; i < cfg.splits.size(); ++i) {
    cells.push_back(std::async(launch, [&, i] {
      const std::size_t m = cfg.splits[i];
      const SessionConfig base = cfg.session(m, cfg.test_heuristics, idf);
      out.reports[i] = evaluate(factory, goals, base, cfg.seeds, sim, &out.sessions[i], 1,
                                "M=" + std::to_string(m));
    }));
  }
  for (auto& c : cells) c.get();
  return out;
}

void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& r) {
  out << "episodes,budget,seed,goal,metric,value\n";
  std::vector<std::string> metrics = cfg.metrics;
  for (const char* extra : {"T", "final_score"}) {
    if (std::find(metrics.begin(), metrics.end(), extra) == metrics.end()) metrics.emplace_back(extra);
  }
  for (std::size_t i = 0; i < r.reports.size(); ++i) {
    for (const auto& s : r.sessions[i]) {
      for (const auto& m : metrics) {
        out << r.reports[i].episodes << ',' << r.reports[i].budget << ',' << s.seed << ',' << s.goal << ',' << m << ','
            << fmt(s.values.get(m)) << '\n';
      }
    }
  }
}

void write_summary_csv(std::ostream& out, std::span<const MetricReport> reports, std::span<const std::string> metrics) {
  out << "episodes,budget,metric,mean,ci95,sessions\n";
  for (const auto& r : reports) {
    for (const auto& m : metrics) {
      out << r.episodes << ',' << r.budget << ',' << m << ',' << fmt(r.aggregate.get(m)) << ',' << fmt(r.ci95.get(m))
          << ',' << r.sessions << '\n';
    }
  }
}

void write_sweep_svg(std::ostream& out, std::span<const MetricReport> reports, std::span<const std::string> metrics,
                     const std::string& title) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  const double W = 640, H = 400, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  std::vector<const MetricReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->episodes < b->episodes; });
  double lo = 1, hi = 0;
  for (const auto* r : sorted) {
    for (const auto& m : metrics) {
      if (m == "T") continue;
      lo = std::min(lo, r->aggregate.get(m) - r->ci95.get(m));
      hi = std::max(hi, r->aggregate.get(m) + r->ci95.get(m));
    }
  }
  if (lo > hi) lo = 0, hi = 1;
  lo = std::max(0.0, std::floor(lo * 10 - 0.5) / 10);
  hi = std::min(1.0, std::ceil(hi * 10 + 0.5) / 10);
  if (hi <= lo) hi = lo + 0.1;
  const std::size_t n = sorted.size();
  const auto X = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / static_cast<double>(n - 1) : pw / 2); };
  const auto Y = [&](double v) { return top + ph * (1 - (v - lo) / (hi - lo)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = lo + (hi - lo) * k / 5.0;
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << Y(v) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(v)
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 8 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << fmt(std::round(v * 1000) / 1000) << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << "<text x=\"" << X(i) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << sorted[i]->episodes << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">#episodes</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2 << ")\">score</text>\n";
  std::size_t c = 0;
  for (const auto& m : metrics) {
    if (m == "T") continue;
    const char* color = colors[c % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) out << X(i) << ',' << Y(sorted[i]->aggregate.get(m)) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double v = sorted[i]->aggregate.get(m), e = sorted[i]->ci95.get(m);
      out << "<circle cx=\"" << X(i) << "\" cy=\"" << Y(v) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      if (e > 0) {
        out << "<line x1=\"" << X(i) << "\" y1=\"" << Y(std::min(hi, v + e)) << "\" x2=\"" << X(i) << "\" y2=\""
            << Y(std::max(lo, v - e)) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    const double ly = top + 10 + 18 * static_cast<double>(c);
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4
        << "\">" << m << "</text>\n";
    ++c;
  }
  out << "</svg>\n";
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, std::span<const Document> train,
                                      std::span<const Document> goals, std::shared_ptr<const SimilarityProvider> sim) {
  cfg.validate();
  if (train.empty()) throw EmptyGoalSampler("ablation needs a training corpus");
  if (cfg.max_goals && goals.size() > cfg.max_goals) goals = goals.first(cfg.max_goals);
  const auto stats = std::make_shared<const CorpusStats>(CorpusStats::build(train));
  const auto idf = stats->idf_ptr();

  ExperimentConfig proto = cfg;
  proto.budget = cfg.ablate_episodes * cfg.ablate_edits_per_episode;
  proto.train_episodes = cfg.ablate_episodes;

  struct TrainCell {
    double noise, lambda;
    std::string heuristics;
  };
  std::vector<TrainCell> cells;
  const bool learn = trainable(cfg.policy);
  if (learn) {
    for (const double noise : cfg.ablate_noise) {
      for (const auto& h : cfg.ablate_train_heuristics) {
        for (const double lambda : cfg.ablate_lambda) cells.push_back({noise, lambda, h});
      }
    }
  } else {
    cells.push_back({std::nan(""), std::nan(""), "-"});
  }

  std::vector<std::vector<AblationRow>> per_cell(cells.size());
  const auto run_cell = [&](std::size_t i) {
    const TrainCell& tc = cells[i];
    std::shared_ptr<const LogLinearEditPolicy> policy;
    if (learn) {
      ExperimentConfig c = proto;
      c.train_heuristics = tc.heuristics;
      DaggerConfig d = c.dagger_config(idf);
      d.noise = tc.noise;
      d.lambda = tc.lambda;
      d.workers = 1;
      policy = std::make_shared<const LogLinearEditPolicy>(dagger_train(LogLinearEditPolicy(stats), d, train, *sim).policy);
    } else if (cfg.policy == "untrained") {
      policy = std::make_shared<const LogLinearEditPolicy>(stats);
    }
    const PolicyFactory factory = make_policy_factory(cfg.policy, policy, idf, sim, cfg.decode);
    for (const auto& th : cfg.ablate_test_heuristics) {
      const SessionConfig base = proto.session(cfg.ablate_episodes, th, idf);
      AblationRow row{tc.noise, tc.heuristics, tc.lambda, th, {}};
      row.report = evaluate(factory, goals, base, cfg.seeds, *sim, nullptr, 1, th);
      per_cell[i].push_back(std::move(row));
    }
  };
  // Bounded fan-out; results are joined in cell order.
  const std::size_t width = std::max<std::size_t>(1, cfg.workers);
  for (std::size_t start = 0; start < cells.size(); start += width) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(cells.size(), start + width); ++i) {
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, run_cell, i));
    }
    for (auto& b : batch) b.get();
  }
  std::vector<AblationRow> rows;
  for (auto& c : per_cell) {
    for (auto& r : c) rows.push_back(std::move(r));
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows, std::span<const std::string> metrics) {
  const auto num = [](double v) { return std::isnan(v) ? std::string("-") : fmt(v); };
  out << "noise,train_heuristics,lambda,test_heuristics,episodes,budget";
  for (const auto& m : metrics) out << ',' << m << ',' << m << "_ci95";
  out << '\n';
  for (const auto& r : rows) {
    out << num(r.noise) << ',' << r.train_heuristics << ',' << num(r.lambda) << ',' << r.test_heuristics << ','
        << r.report.episodes << ',' << r.report.budget;
    for (const auto& m : metrics) out << ',' << fmt(r.report.aggregate.get(m)) << ',' << fmt(r.report.ci95.get(m));
    out << '\n';
  }
}

}  // namespace itg
