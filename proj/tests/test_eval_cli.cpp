#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "itg/corpus.hpp"
#include "itg/corpus_stats.hpp"
#include "itg/experiment.hpp"
#include "itg/metrics.hpp"
#include "itg/repl.hpp"
#include "itg/trace_io.hpp"
#include "itg/user_sim.hpp"
#include "test_support.hpp"

using namespace itg;
using itg::testing::doc;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ITG_DATA_DIR;

std::string sentence(std::size_t n, std::size_t salt = 0) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i + salt);
  return s;
}

struct Toy {
  std::vector<Document> train = read_sentences(kData / "toy_train.txt");
  std::vector<Document> test = read_sentences(kData / "toy_test.txt");
  std::shared_ptr<const CorpusStats> stats = std::make_shared<const CorpusStats>(CorpusStats::build(train));
  std::shared_ptr<const SimilarityProvider> sim = std::make_shared<const TrigramSimilarity>();
};

const Toy& toy() {
  static const Toy t;
  return t;
}

ExperimentConfig small_config() {
  KeyValueConfig kv;
  kv.set("budget", "6");
  kv.set("splits", "[1, 2, 3, 6]");
  kv.set("seeds", "[0, 1]");
  kv.set("policy", "identity");
  kv.set("max_goals", "6");
  return ExperimentConfig::from(kv, false);
}

std::vector<Document> first_goals(std::size_t n) {
  return {toy().test.begin(), toy().test.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

// ---- metrics ----

TEST(Metrics, IdentityAndDisjoint) {
  const Document x = doc("the cat sat on the mat .");
  EXPECT_DOUBLE_EQ(metrics::bleu1(x, x), 1.0);
  EXPECT_DOUBLE_EQ(metrics::token_f1(x, x), 1.0);
  EXPECT_DOUBLE_EQ(metrics::chrf(x, x), 1.0);
  const Document y = doc("xyz qqq");
  EXPECT_DOUBLE_EQ(metrics::bleu1(x, y), 0.0);
  EXPECT_DOUBLE_EQ(metrics::token_f1(x, y), 0.0);
  EXPECT_DOUBLE_EQ(metrics::chrf(x, y), 0.0);
}

TEST(Metrics, UnigramGoldens) {
  // 5 of 6 tokens overlap; equal lengths.
  const Document h = doc("the cat sat on the mat"), r = doc("the cat sat on a mat");
  EXPECT_NEAR(metrics::token_f1(h, r), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(metrics::bleu1(h, r), 5.0 / 6.0, 1e-12);
  // Short hypothesis: brevity penalty exp(1 - 3/1).
  EXPECT_NEAR(metrics::bleu1(doc("dog"), doc("the dog ran")), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(metrics::token_f1(doc("dog"), doc("the dog ran")), 0.5, 1e-12);
  // Clipping: "the the the" against one "the".
  EXPECT_NEAR(metrics::bleu1(doc("the the the"), doc("the cat sat")), 1.0 / 3.0, 1e-12);
}

TEST(Metrics, ChrfGoldens) {
  // Reference values from sacreBLEU's sentence-level chrF (n = 6, beta = 2).
  EXPECT_NEAR(metrics::chrf("the cat sat on the mat", "the cat sat on a mat"), 0.720848317308, 1e-9);
  EXPECT_NEAR(metrics::chrf("a small boat sailed", "the small boat sank"), 0.633949383949, 1e-9);
  EXPECT_NEAR(metrics::chrf("dog", "the dog ran"), 0.285313376988, 1e-9);
  EXPECT_NEAR(metrics::chrf("the quick brown fox jumps over the lazy dog", "a quick brown dog jumps over the lazy fox"),
              0.736690180551, 1e-9);
}

// ---- ingest ----

TEST(Ingest, LengthFilterBoundaryAndDedup) {
  std::stringstream in;
  in << sentence(65) << '\n' << sentence(64) << '\n' << sentence(63) << "\n\n" << sentence(3) << '\n' << sentence(3) << '\n';
  IngestOptions opt;
  opt.valid_fraction = opt.test_fraction = 0;
  const auto s = ingest_corpus(in, opt);
  ASSERT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.train[0].size(), 63u);
  EXPECT_EQ(s.train[1].size(), 3u);
  EXPECT_EQ(s.stats.too_long, 2u);
  EXPECT_EQ(s.stats.duplicates, 1u);
  EXPECT_EQ(s.stats.blank, 1u);
  EXPECT_EQ(s.stats.lines, 6u);
}

TEST(Ingest, SplitProportionsOnTenThousandLines) {
  std::stringstream in;
  for (std::size_t i = 0; i < 10000; ++i) in << "sentence number " << i << " .\n";
  const auto s = ingest_corpus(in);
  EXPECT_NEAR(static_cast<double>(s.train.size()) / 10000, 0.90, 0.01);
  EXPECT_NEAR(static_cast<double>(s.valid.size()) / 10000, 0.05, 0.01);
  EXPECT_NEAR(static_cast<double>(s.test.size()) / 10000, 0.05, 0.01);
  EXPECT_EQ(s.train.size() + s.valid.size() + s.test.size(), 10000u);
}

TEST(Ingest, SameSeedSameManifest) {
  std::string text;
  for (std::size_t i = 0; i < 500; ++i) text += "line " + std::to_string(i) + " here\n";
  const auto manifest = [&](std::uint64_t seed) {
    std::stringstream in(text), out;
    IngestOptions opt;
    opt.seed = seed;
    write_manifest(out, ingest_corpus(in, opt));
    return out.str();
  };
  EXPECT_EQ(manifest(3), manifest(3));
  EXPECT_NE(manifest(3), manifest(4));
}

TEST(Ingest, Errors) {
  EXPECT_THROW(ingest_corpus(fs::path("/nonexistent/corpus.txt")), FileUnreadable);
  std::stringstream in("\n" + sentence(70) + "\n");
  EXPECT_THROW(ingest_corpus(in), EmptyAfterFilter);
}

// ---- config ----

TEST(Config, KeyValueParsing) {
  std::stringstream in(R"(# experiment
budget = 6
splits = [1, 2, 3]   # trailing comment
policy = "near_expert"
test_heuristics = 'unrestricted'
corpus = "a#b.txt"
)");
  const auto kv = KeyValueConfig::parse(in);
  EXPECT_EQ(kv.get("budget", std::size_t{0}), 6u);
  EXPECT_EQ(kv.get_list("splits", {}), (std::vector<std::string>{"1", "2", "3"}));
  EXPECT_EQ(kv.get("policy", std::string()), "near_expert");
  EXPECT_EQ(kv.get("test_heuristics", std::string()), "unrestricted");
  EXPECT_EQ(kv.get("corpus", std::string()), "a#b.txt");
  std::stringstream dup("a = 1\na = 2\n"), bad("just words\n");
  EXPECT_THROW(KeyValueConfig::parse(dup), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse(bad), ConfigError);
}

TEST(Config, Invariants) {
  KeyValueConfig kv;
  kv.set("budget", "6");
  kv.set("splits", "[1, 4]");
  EXPECT_THROW(ExperimentConfig::from(kv, false), ConfigError);
  kv.set("splits", "[1, 2]");
  kv.set("seeds", "[]");
  EXPECT_THROW(ExperimentConfig::from(kv, false), ConfigError);
  kv.set("seeds", "[5]");
  EXPECT_NO_THROW(ExperimentConfig::from(kv, false));
  kv.set("budjet", "6");
  EXPECT_THROW(ExperimentConfig::from(kv, false), ConfigError);
}

TEST(Config, EnvironmentSeedOverride) {
  KeyValueConfig kv;
  kv.set("seed", "3");
  ::setenv("ITG_SEED", "41", 1);
  const auto c = ExperimentConfig::from(kv);
  const auto d = ExperimentConfig::from(kv, false);
  ::unsetenv("ITG_SEED");
  EXPECT_EQ(c.seed, 41u);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{41, 42, 43}));
  EXPECT_EQ(d.seed, 3u);
  ::setenv("ITG_SEED", "x1", 1);
  EXPECT_THROW(ExperimentConfig::from(kv), ConfigError);
  ::unsetenv("ITG_SEED");
}

// ---- sweep ----

TEST(Sweep, ExpertSaturatesEverySplit) {
  auto cfg = small_config();
  const auto factory = make_policy_factory("expert", nullptr, toy().stats->idf_ptr(), toy().sim, cfg.decode);
  const auto r = run_interactivity_sweep(cfg, factory, toy().test, *toy().sim, toy().stats->idf_ptr());
  ASSERT_EQ(r.reports.size(), 4u);
  for (const auto& rep : r.reports) {
    EXPECT_DOUBLE_EQ(rep.aggregate.final_score, 1.0);
    EXPECT_DOUBLE_EQ(rep.aggregate.mean_T, 1.0);
    EXPECT_DOUBLE_EQ(rep.aggregate.bleu1, 1.0);
    EXPECT_EQ(rep.sessions, 12u);
  }
}

// Holds for users without positional constraints. Adjacent/contiguous users
// re-anchor on repeated words ("the") when the partial draft is realigned.
class IdentitySplits : public ::testing::TestWithParam<const char*> {};

TEST_P(IdentitySplits, SplitInvariant) {
  auto cfg = small_config();
  cfg.test_heuristics = GetParam();
  const auto factory = make_policy_factory("identity", nullptr, nullptr, toy().sim, cfg.decode);
  const auto r = run_interactivity_sweep(cfg, factory, toy().test, *toy().sim, toy().stats->idf_ptr());
  for (std::size_t i = 1; i < r.reports.size(); ++i) {
    ASSERT_EQ(r.sessions[i].size(), r.sessions[0].size());
    for (std::size_t k = 0; k < r.sessions[0].size(); ++k) {
      const auto &a = r.sessions[0][k].values, &b = r.sessions[i][k].values;
      EXPECT_EQ(a.bleu1, b.bleu1);
      EXPECT_EQ(a.token_f1, b.token_f1);
      EXPECT_EQ(a.chrf, b.chrf);
      EXPECT_EQ(a.final_score, b.final_score);
      EXPECT_EQ(r.sessions[i][k].user_edits, 6u);
    }
    EXPECT_EQ(r.reports[i].aggregate.final_score, r.reports[0].aggregate.final_score);
    EXPECT_DOUBLE_EQ(r.reports[i].aggregate.mean_T, static_cast<double>(cfg.splits[i]));
  }
  EXPECT_EQ(r.delta(1, 3).value(), 0.0);
  EXPECT_FALSE(r.delta(1, 5).has_value());
}

INSTANTIATE_TEST_SUITE_P(Sweep, IdentitySplits, ::testing::Values("unrestricted", "idf"));

TEST(Sweep, ReportAggregatesAndInterval) {
  auto cfg = small_config();
  cfg.seeds = {0, 1, 2};
  const auto stats = toy().stats;
  const auto pol = std::make_shared<const LogLinearEditPolicy>(stats);
  const auto factory = make_policy_factory("untrained", pol, nullptr, toy().sim, cfg.decode);
  std::vector<SessionResult> sessions;
  const auto goals = first_goals(5);
  const auto rep = evaluate(factory, goals, cfg.session(3, cfg.test_heuristics, stats->idf_ptr()), cfg.seeds,
                            *toy().sim, &sessions);
  ASSERT_EQ(rep.per_goal.size(), 5u);
  ASSERT_EQ(rep.per_seed.size(), 3u);
  double mean = 0;
  for (const auto& g : rep.per_goal) mean += g.final_score / 5;
  EXPECT_NEAR(rep.aggregate.final_score, mean, 1e-12);
  for (const auto& s : sessions) {
    for (const double v : {s.values.bleu1, s.values.token_f1, s.values.chrf, s.values.final_score}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  // t interval over per-seed means.
  double m = 0, ss = 0;
  for (const auto& s : rep.per_seed) m += s.final_score / 3;
  for (const auto& s : rep.per_seed) ss += (s.final_score - m) * (s.final_score - m);
  EXPECT_NEAR(rep.ci95.final_score, 4.303 * std::sqrt(ss / 2) / std::sqrt(3.0), 1e-12);
}

TEST(Sweep, ParallelMatchesSerialAndReruns) {
  auto cfg = small_config();
  const auto pol = std::make_shared<const LogLinearEditPolicy>(toy().stats);
  const auto factory = make_policy_factory("untrained", pol, nullptr, toy().sim, cfg.decode);
  const auto a = run_interactivity_sweep(cfg, factory, toy().test, *toy().sim, toy().stats->idf_ptr());
  cfg.workers = 4;
  const auto b = run_interactivity_sweep(cfg, factory, toy().test, *toy().sim, toy().stats->idf_ptr());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].aggregate.final_score, b.reports[i].aggregate.final_score);
    EXPECT_EQ(a.reports[i].aggregate.chrf, b.reports[i].aggregate.chrf);
  }
}

TEST(Sweep, LedgerViolationIsReported) {
  auto cfg = small_config();
  auto base = cfg.session(3, "unrestricted", nullptr);
  base.horizon = 2;  // the third episode never happens
  const auto factory = make_policy_factory("identity", nullptr, nullptr, toy().sim, cfg.decode);
  const auto goals = first_goals(2);
  EXPECT_THROW(evaluate(factory, goals, base, cfg.seeds, *toy().sim), BudgetLedgerMismatch);
}

TEST(Sweep, CsvAndSvgOutputs) {
  auto cfg = small_config();
  const auto factory = make_policy_factory("identity", nullptr, nullptr, toy().sim, cfg.decode);
  const auto r = run_interactivity_sweep(cfg, factory, toy().test, *toy().sim, toy().stats->idf_ptr());
  std::stringstream csv, summary, svg;
  write_sweep_csv(csv, cfg, r);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "episodes,budget,seed,goal,metric,value");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4u * 2 * 6 * 5);  // splits x seeds x goals x (3 metrics + T + final_score)
  write_summary_csv(summary, r.reports, cfg.metrics);
  std::getline(summary, line);
  EXPECT_EQ(line, "episodes,budget,metric,mean,ci95,sessions");
  write_sweep_svg(svg, r.reports, cfg.metrics, "identity");
  const std::string s = svg.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  std::size_t lines = 0;
  for (auto p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 3u);
}

// ---- ablation ----

TEST(Ablation, NearExpertPrefersUnrestrictedUser) {
  auto cfg = small_config();
  cfg.policy = "near_expert";
  cfg.max_goals = 0;
  cfg.ablate_test_heuristics = {"adj+contig", "contiguous", "adjacent", "unrestricted"};
  const auto rows = run_ablation(cfg, toy().train, toy().test, toy().sim);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].test_heuristics, "adj+contig");
  EXPECT_EQ(rows[3].test_heuristics, "unrestricted");
  for (const auto& r : rows) {
    EXPECT_EQ(r.report.budget, 12u);
    EXPECT_EQ(r.report.episodes, 4u);
  }
  EXPECT_GE(rows[3].report.aggregate.final_score, rows[0].report.aggregate.final_score);
}

TEST(Ablation, NoiseAxisRowsShareSeedsAndReproduce) {
  auto cfg = small_config();
  cfg.policy = "dagger";
  cfg.max_goals = 3;
  cfg.dagger.iterations = 2;
  cfg.dagger.warmup = 0;
  cfg.dagger.states_per_iteration = 4;
  cfg.dagger.fit_steps = 4;
  cfg.ablate_noise = {0.0, 0.1, 0.2, 0.3};
  cfg.ablate_lambda = {0.9};
  cfg.ablate_test_heuristics = {"unrestricted"};
  const auto rows = run_ablation(cfg, toy().train, toy().test, toy().sim);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].noise, cfg.ablate_noise[i]);
    EXPECT_EQ(rows[i].report.seeds, rows[0].report.seeds);
  }
  cfg.workers = 2;
  const auto again = run_ablation(cfg, toy().train, toy().test, toy().sim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(again[i].report.aggregate.final_score, rows[i].report.aggregate.final_score);
    EXPECT_EQ(again[i].report.aggregate.chrf, rows[i].report.aggregate.chrf);
  }
  std::stringstream csv;
  write_ablation_csv(csv, rows, cfg.metrics);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("noise,train_heuristics,lambda,test_heuristics,episodes,budget,bleu1,bleu1_ci95", 0), 0u);
}

// ---- repl and replay ----

namespace {

std::shared_ptr<const EditPolicyAgent> stochastic_agent() {
  std::mt19937_64 rng(5);
  auto p = std::make_shared<LogLinearEditPolicy>(toy().stats);
  std::vector<double> w(LogLinearEditPolicy::kDim);
  for (auto& v : w) v = std::normal_distribution<double>(0, 1)(rng);
  p->set_weights(w);
  DecodeConfig d;
  d.stop_threshold = 0.6;
  return std::make_shared<const EditPolicyAgent>(p, d, "random-loglinear");
}

SessionConfig repl_config() {
  SessionConfig c;
  c.budget = 100;
  c.horizon = 8;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(Repl, CommandParsing) {
  EXPECT_EQ(parse_repl_command("ins 1 NASA").edit, Edit::ins(1, "NASA"));
  EXPECT_EQ(parse_repl_command("  del 3 ").edit, Edit::del(3));
  EXPECT_EQ(parse_repl_command("sub 2 x").edit, Edit::sub(2, "x"));
  EXPECT_EQ(parse_repl_command("done").kind, ReplCommand::Kind::Done);
  EXPECT_EQ(parse_repl_command("quit").kind, ReplCommand::Kind::Quit);
  for (const char* bad : {"", "ins", "ins 0 a", "ins x a", "del", "del 1 2", "frobnicate", "ins -1 a"}) {
    EXPECT_THROW(parse_repl_command(bad), std::invalid_argument) << bad;
  }
}

TEST(Repl, InsertOnBlankDraftAndQuit) {
  std::istringstream in("ins 1 NASA\nshow\nnonsense\ndel 5\ndone\nquit\n");
  std::ostringstream out;
  const IdentityPolicy identity;
  const auto trace = repl_session(in, out, std::nullopt, identity, repl_config(), *toy().sim);
  const std::string o = out.str();
  EXPECT_NE(o.find("draft: NASA"), std::string::npos);
  EXPECT_NE(o.find("? unknown command 'nonsense'"), std::string::npos);
  EXPECT_NE(o.find("agent: NASA"), std::string::npos);
  ASSERT_EQ(trace.turns.size(), 2u);
  EXPECT_EQ(trace.turns[0].draft.to_text(), "NASA");
  EXPECT_EQ(trace.turns[0].edits, std::vector<Edit>{Edit::ins(1, "NASA")});
  EXPECT_FALSE(trace.has_goal);
  EXPECT_EQ(trace.status, SessionStatus::StoppedHorizon);

  std::stringstream jsonl;
  write_trace(jsonl, trace);
  const auto back = read_trace(jsonl);
  EXPECT_FALSE(back.has_goal);
  ASSERT_EQ(back.turns.size(), 2u);
  EXPECT_EQ(back.final_draft.to_text(), "NASA");
}

TEST(Repl, EndOfInputEndsSession) {
  std::istringstream in("ins 1 a\n");
  std::ostringstream out;
  const IdentityPolicy identity;
  const auto trace = repl_session(in, out, doc("a b"), identity, repl_config(), *toy().sim);
  EXPECT_TRUE(trace.turns.empty());
  EXPECT_NE(trace.status, SessionStatus::Running);
}

TEST(Replay, HumanTraceReproducesAgentResponses) {
  const auto agent = stochastic_agent();
  std::istringstream in(
      "ins 1 the\nins 2 cat\ndone\nins 1 my\ndone\nshow\ndel 1\ndone\nquit\n");
  std::ostringstream out;
  const auto trace = repl_session(in, out, doc("the cat sat on the mat and the dog ran ."), *agent, repl_config(),
                                  *toy().sim);
  ASSERT_EQ(trace.turns.size(), 6u);
  std::stringstream jsonl;
  write_trace(jsonl, trace);
  const auto loaded = read_trace(jsonl);
  const auto rep = replay_trace(loaded, agent.get(), *toy().sim);
  EXPECT_TRUE(rep.ok()) << (rep.problems.empty() ? "" : rep.problems.front());

  auto tampered = loaded;
  tampered.turns[1].draft = doc("something else");
  tampered.turns[1].edits_recorded = false;
  const auto bad = replay_trace(tampered, agent.get(), *toy().sim);
  EXPECT_FALSE(bad.agent_ok);
}

TEST(Replay, SimulatedTracesReplayWithTheSimulator) {
  const auto agent = stochastic_agent();
  SessionConfig c;
  c.budget = 6;
  c.episodes = 3;
  c.user.heuristics = HeuristicSet::parse("idf+adj+contig");
  c.user.idf_table = toy().stats->idf_ptr();
  for (std::size_t g = 0; g < 5; ++g) {
    c.seed = g;
    const auto trace = run_session(toy().test[g], *agent, c, *toy().sim);
    std::stringstream jsonl;
    write_trace(jsonl, trace);
    const auto loaded = read_trace(jsonl);
    ReplayOptions opt;
    opt.resimulate_user = true;
    opt.idf = toy().stats->idf_ptr();
    const auto rep = replay_trace(loaded, agent.get(), *toy().sim, opt);
    EXPECT_TRUE(rep.ok()) << (rep.problems.empty() ? "" : rep.problems.front());
    EXPECT_TRUE(replay_trace(loaded, nullptr, *toy().sim).ok());
  }
}
