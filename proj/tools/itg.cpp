#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "itg/corpus.hpp"
#include "itg/corpus_stats.hpp"
#include "itg/experiment.hpp"
#include "itg/repl.hpp"
#include "itg/tokenizer.hpp"
#include "itg/trace_io.hpp"

namespace fs = std::filesystem;
using namespace itg;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<double> stop_threshold;
  std::optional<std::size_t> max_edits, top_k;
  std::optional<std::string> policy, checkpoint;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "key = value experiment file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override a config key (key=value), repeatable");
  app->add_option("--policy", c.policy, "identity|expert|near_expert|untrained|loglinear|dagger");
  app->add_option("--checkpoint", c.checkpoint, "log-linear weights (JSON)");
  app->add_option("--stop-threshold", c.stop_threshold, "decoder stop threshold alpha")->check(CLI::Range(0.0, 1.0));
  app->add_option("--max-edits", c.max_edits, "decoder edit cap per turn");
  app->add_option("--top-k", c.top_k, "decoder beam over edit candidates");
}

ExperimentConfig build_config(const Common& c) {
  KeyValueConfig kv;
  if (!c.config.empty()) kv = KeyValueConfig::load(c.config);
  const fs::path base = c.config.empty() ? fs::path() : fs::path(c.config).parent_path();
  std::set<std::string> from_file;
  for (const auto& [k, v] : kv.values()) from_file.insert(k);
  const auto set = [&](const std::string& k, std::string v) {
    kv.set(k, std::move(v));
    from_file.erase(k);
  };
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.policy) set("policy", *c.policy);
  if (c.checkpoint) set("checkpoint", *c.checkpoint);
  if (c.stop_threshold) set("stop_threshold", std::to_string(*c.stop_threshold));
  if (c.max_edits) set("max_edits", std::to_string(*c.max_edits));
  if (c.top_k) set("top_k", std::to_string(*c.top_k));
  ExperimentConfig cfg = ExperimentConfig::from(kv);
  const std::pair<const char*, fs::path*> paths[] = {
      {"corpus", &cfg.corpus}, {"test_goals", &cfg.test_goals}, {"checkpoint", &cfg.checkpoint}, {"output_dir", &cfg.output_dir}};
  for (const auto& [key, p] : paths) {
    if (from_file.count(key) && !p->empty() && p->is_relative()) *p = base / *p;
  }
  return cfg;
}

std::shared_ptr<const CorpusStats> corpus_stats(const ExperimentConfig& cfg) {
  if (cfg.corpus.empty()) return nullptr;
  return std::make_shared<const CorpusStats>(CorpusStats::build(read_sentences(cfg.corpus, cfg.capacity)));
}

void log_curve(const CurvePoint& p, std::size_t total) {
  if (p.iteration % 10 == 0 || p.iteration + 1 == total) {
    std::cerr << "iter " << std::setw(4) << p.iteration << "  beta " << std::fixed << std::setprecision(3) << p.beta
              << "  loss " << std::setprecision(4) << p.loss << "  score " << p.mean_score << "  |D| " << p.dataset_size
              << '\n';
  }
}

DaggerResult train(const ExperimentConfig& cfg, std::shared_ptr<const CorpusStats> stats) {
  if (!stats) throw ConfigError("training needs 'corpus'");
  const auto train_docs = read_sentences(cfg.corpus, cfg.capacity);
  const DaggerConfig d = cfg.dagger_config(stats->idf_ptr());
  std::cerr << "training on " << train_docs.size() << " sentences, " << d.iterations << " iterations\n";
  return dagger_train(LogLinearEditPolicy(stats), d, train_docs, *make_similarity(cfg.similarity),
                      [&](const CurvePoint& p, const std::vector<DatasetEntry>&) { log_curve(p, d.iterations); });
}

// Log-linear weights for the policies that need them; trains `dagger` when no
// checkpoint is given.
std::shared_ptr<const LogLinearEditPolicy> resolve_weights(const ExperimentConfig& cfg,
                                                           std::shared_ptr<const CorpusStats> stats) {
  if (cfg.policy == "loglinear" || (cfg.policy == "dagger" && !cfg.checkpoint.empty())) {
    if (cfg.checkpoint.empty()) throw ConfigError("policy 'loglinear' needs 'checkpoint'");
    return std::make_shared<const LogLinearEditPolicy>(LogLinearEditPolicy::load(cfg.checkpoint));
  }
  if (cfg.policy == "dagger") return std::make_shared<const LogLinearEditPolicy>(train(cfg, stats).policy);
  if (cfg.policy == "untrained") {
    if (!stats) throw ConfigError("policy 'untrained' needs 'corpus'");
    return std::make_shared<const LogLinearEditPolicy>(stats);
  }
  return nullptr;
}

std::shared_ptr<const IdfTable> idf_of(std::shared_ptr<const CorpusStats> stats,
                                       std::shared_ptr<const LogLinearEditPolicy> weights) {
  if (stats) return stats->idf_ptr();
  if (weights) return weights->stats().idf_ptr();
  return nullptr;
}

std::vector<Document> test_goals(const ExperimentConfig& cfg) {
  if (cfg.test_goals.empty()) throw ConfigError("'test_goals' is required");
  return read_sentences(cfg.test_goals, cfg.capacity);
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& f) {
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  f(out);
  std::cerr << "wrote " << p.string() << '\n';
}

void print_reports(std::span<const MetricReport> reports, std::span<const std::string> metrics,
                   const std::string& first_col = "episodes") {
  std::cout << std::left << std::setw(16) << first_col;
  for (const auto& m : metrics) std::cout << std::setw(20) << m;
  std::cout << std::setw(10) << "T" << "final\n";
  for (const auto& r : reports) {
    std::cout << std::setw(16) << (first_col == "episodes" ? std::to_string(r.episodes) : r.label);
    for (const auto& m : metrics) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << r.aggregate.get(m) << " +- " << r.ci95.get(m);
      std::cout << std::setw(20) << cell.str();
    }
    std::cout << std::fixed << std::setprecision(2) << std::setw(10) << r.aggregate.mean_T << std::setprecision(3)
              << r.aggregate.final_score << '\n';
  }
}

int cmd_ingest(const std::string& input, const std::string& out_dir, IngestOptions opt) {
  const CorpusSplit s = ingest_corpus(fs::path(input), opt);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_sentences(dir / "train.txt", s.train);
  write_sentences(dir / "valid.txt", s.valid);
  write_sentences(dir / "test.txt", s.test);
  write_file(dir / "manifest.tsv", [&](std::ostream& o) { write_manifest(o, s); });
  std::cout << "lines " << s.stats.lines << "  blank " << s.stats.blank << "  too_long " << s.stats.too_long
            << "  duplicates " << s.stats.duplicates << "\ntrain " << s.train.size() << "  valid " << s.valid.size()
            << "  test " << s.test.size() << '\n';
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const DaggerResult r = train(cfg, corpus_stats(cfg));
  const fs::path ckpt = !out.empty() ? fs::path(out) : !cfg.checkpoint.empty() ? cfg.checkpoint : cfg.output_dir / "policy.json";
  if (!ckpt.parent_path().empty()) fs::create_directories(ckpt.parent_path());
  r.policy.save(ckpt);
  std::cerr << "wrote " << ckpt.string() << '\n';
  write_file(cfg.output_dir / "learning_curve.csv", [&](std::ostream& o) { write_learning_curve(o, r.curve); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "trained " << r.curve.size() << " iterations in " << std::fixed << std::setprecision(1) << secs
            << " s; dataset " << r.dataset.size() << " states\n";
  return 0;
}

int cmd_sweep(ExperimentConfig cfg) {
  const auto stats = corpus_stats(cfg);
  const auto weights = resolve_weights(cfg, stats);
  const auto idf = idf_of(stats, weights);
  const auto sim = make_similarity(cfg.similarity);
  const auto goals = test_goals(cfg);
  const auto factory = make_policy_factory(cfg.policy, weights, idf, sim, cfg.decode);
  const SweepResult r = run_interactivity_sweep(cfg, factory, goals, *sim, idf);
  write_file(cfg.output_dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, cfg, r); });
  write_file(cfg.output_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, r.reports, cfg.metrics); });
  write_file(cfg.output_dir / "sweep.svg", [&](std::ostream& o) { write_sweep_svg(o, r.reports, cfg.metrics, cfg.policy); });
  print_reports(r.reports, cfg.metrics);
  const std::size_t lo = *std::min_element(cfg.splits.begin(), cfg.splits.end());
  const std::size_t hi = *std::max_element(cfg.splits.begin(), cfg.splits.end());
  if (lo != hi) {
    for (const auto& m : cfg.metrics) {
      std::cout << "delta " << m << " (M=" << hi << " - M=" << lo << "): " << std::showpos << std::setprecision(4)
                << *r.delta(lo, hi, m) << std::noshowpos << '\n';
    }
  }
  return 0;
}

int cmd_ablate(const ExperimentConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("ablation needs 'corpus'");
  const auto train_docs = read_sentences(cfg.corpus, cfg.capacity);
  const auto rows = run_ablation(cfg, train_docs, test_goals(cfg), make_similarity(cfg.similarity));
  write_file(cfg.output_dir / "ablation.csv", [&](std::ostream& o) { write_ablation_csv(o, rows, cfg.metrics); });
  write_ablation_csv(std::cout, rows, cfg.metrics);
  return 0;
}

std::shared_ptr<const Policy> single_policy(const ExperimentConfig& cfg, const std::optional<Document>& goal,
                                            std::shared_ptr<const IdfTable>* idf_out = nullptr) {
  const auto stats = corpus_stats(cfg);
  const auto weights = resolve_weights(cfg, stats);
  const auto idf = idf_of(stats, weights);
  if (idf_out) *idf_out = idf;
  if (!goal && (cfg.policy == "expert" || cfg.policy == "near_expert")) {
    throw ConfigError("policy '" + cfg.policy + "' needs a goal");
  }
  return make_policy_factory(cfg.policy, weights, idf, make_similarity(cfg.similarity), cfg.decode)(
      goal.value_or(Document(cfg.capacity)));
}

int cmd_repl(const ExperimentConfig& cfg, const std::optional<std::string>& goal_text, const std::string& trace_out) {
  std::optional<Document> goal;
  if (goal_text) goal = make_document(*goal_text, WhitespaceTokenizer{}, cfg.capacity);
  const auto policy = single_policy(cfg, goal);
  SessionConfig s = cfg.session(1, "unrestricted", nullptr);
  s.budget = std::numeric_limits<std::size_t>::max() / 2;  // the person is not rationed
  s.seed = cfg.seed;
  const SessionTrace t = repl_session(std::cin, std::cout, goal, *policy, s, *make_similarity(cfg.similarity));
  if (!trace_out.empty()) write_file(trace_out, [&](std::ostream& o) { write_trace(o, t); });
  return 0;
}

int cmd_replay(ExperimentConfig cfg, const std::string& trace_path, bool check_agent, bool resimulate) {
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot read " + trace_path);
  const SessionTrace t = read_trace(in);
  const auto sim = make_similarity(cfg.similarity);
  ReplayOptions opt;
  opt.resimulate_user = resimulate;
  std::shared_ptr<const Policy> policy;
  if (check_agent || resimulate) {
    std::shared_ptr<const IdfTable> idf;
    policy = single_policy(cfg, t.has_goal ? std::optional<Document>(t.goal) : std::nullopt, &idf);
    opt.idf = idf;
  }
  const ReplayReport r = replay_trace(t, policy.get(), *sim, opt);
  std::cout << "turns " << t.turns.size() << "  status " << to_string(t.status) << "  final '" << t.final_draft.to_text()
            << "'\nstructure " << (r.structure_ok ? "ok" : "MISMATCH");
  if (policy) std::cout << "  agent " << (r.agent_ok ? "ok" : "MISMATCH") << "  final " << (r.final_ok ? "ok" : "MISMATCH");
  if (resimulate) std::cout << "  user " << (r.user_ok ? "ok" : "MISMATCH");
  std::cout << '\n';
  for (const auto& p : r.problems) std::cout << "  " << p << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"itg: interactive text generation experiments"};
  app.require_subcommand(1);

  std::string ingest_in, ingest_out = "data/corpus";
  IngestOptions iopt;
  auto* ingest = app.add_subcommand("ingest", "filter, dedupe and split a sentence-per-line corpus");
  ingest->add_option("input", ingest_in, "raw corpus")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--out", ingest_out, "output directory");
  ingest->add_option("--seed", iopt.seed);
  ingest->add_option("--max-tokens", iopt.max_tokens);
  ingest->add_option("--valid-fraction", iopt.valid_fraction)->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--test-fraction", iopt.test_fraction)->check(CLI::Range(0.0, 1.0));

  Common train_c, sweep_c, ablate_c, repl_c, replay_c;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "DAgger training of the log-linear edit policy");
  add_common(train_cmd, train_c);
  train_cmd->add_option("-o,--out", train_out, "checkpoint path");

  auto* sweep = app.add_subcommand("sweep", "interactivity sweep over budget splits");
  add_common(sweep, sweep_c);
  auto* ablate = app.add_subcommand("ablate", "noise / heuristics / annealing ablation");
  add_common(ablate, ablate_c);

  std::optional<std::string> goal;
  std::string trace_out;
  auto* repl = app.add_subcommand("repl", "edit alongside the agent in the terminal");
  add_common(repl, repl_c);
  repl->add_option("--goal", goal, "hidden goal text; omit for an open-ended session");
  repl->add_option("--trace", trace_out, "write the session as JSON Lines");

  std::string trace_in;
  bool check_agent = false, resimulate = false;
  auto* replay = app.add_subcommand("replay", "check and re-execute a recorded session");
  add_common(replay, replay_c);
  replay->add_option("trace", trace_in, "JSON Lines trace")->required()->check(CLI::ExistingFile);
  replay->add_flag("--agent", check_agent, "re-run the policy and compare agent drafts");
  replay->add_flag("--resimulate", resimulate, "re-run the simulated user too");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*ingest) return cmd_ingest(ingest_in, ingest_out, iopt);
    if (*train_cmd) {
      auto cfg = build_config(train_c);
      cfg.validate();
      return cmd_train(cfg, train_out);
    }
    if (*sweep) {
      auto cfg = build_config(sweep_c);
      cfg.validate();
      return cmd_sweep(cfg);
    }
    if (*ablate) {
      auto cfg = build_config(ablate_c);
      cfg.validate();
      return cmd_ablate(cfg);
    }
    if (*repl) return cmd_repl(build_config(repl_c), goal, trace_out);
    if (*replay) return cmd_replay(build_config(replay_c), trace_in, check_agent, resimulate);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
