#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "itg/imitation.hpp"
#include "test_support.hpp"
#include "toy_policies.hpp"

using namespace itg;
using itg::testing::doc;

namespace {

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Average of surrogate_term over every ordering and every k.
double enumerated_surrogate(const EditPolicy& pi, const Alignment& a, const Document& u, const PolicyState& s) {
  const std::size_t M = a.num_edits();
  std::vector<std::size_t> sigma(M);
  std::iota(sigma.begin(), sigma.end(), 0);
  double total = 0;
  std::size_t count = 0;
  do {
    for (std::size_t k = 1; k <= M + 1; ++k) {
      total += surrogate_term(pi, objective_target(a, u, sigma, k), s);
      ++count;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total / static_cast<double>(count);
}

// E_sigma log P_sigma, by enumeration.
double mean_path_log_likelihood(const EditPolicy& pi, const Alignment& a, const Document& u, const PolicyState& s) {
  std::vector<std::size_t> sigma(a.num_edits());
  std::iota(sigma.begin(), sigma.end(), 0);
  double total = 0;
  std::size_t count = 0;
  do {
    Document cur = u;
    double lp = 0;
    for (const auto& e : extract_edit_sequence(a, sigma, u)) {
      lp += pi.log_prob(cur, s, EditAction::make(e));
      cur = apply(cur, e, Actor::Agent);
    }
    total += lp + pi.log_prob(cur, s, EditAction::stop());
    ++count;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total / static_cast<double>(count);
}

std::shared_ptr<const CorpusStats> toy_stats() {
  const std::vector<Document> corpus{doc("the dog ran in the park ."), doc("the cat sat on the mat ."),
                                     doc("a dog sat on a log ."), doc("the big dog ran home .")};
  return std::make_shared<const CorpusStats>(CorpusStats::build(corpus));
}

DaggerConfig tiny_dagger(double lambda) {
  DaggerConfig c;
  c.lambda = lambda;
  c.warmup = 0;
  c.iterations = 3;
  c.states_per_iteration = 6;
  c.fit_steps = 6;
  c.noise = 0.3;
  c.seed = 11;
  c.session.horizon = 4;
  c.session.budget = 2;
  c.session.episodes = 1;
  return c;
}

}  // namespace

TEST(Objective, PendingCountTable) {
  EXPECT_EQ(n_k(3, 1), 3u);
  EXPECT_EQ(n_k(3, 2), 2u);
  EXPECT_EQ(n_k(3, 3), 1u);
  EXPECT_EQ(n_k(3, 4), 1u);
  EXPECT_EQ(n_k(0, 1), 1u);
  EXPECT_THROW(n_k(3, 5), std::out_of_range);
  EXPECT_THROW(n_k(3, 0), std::out_of_range);
}

TEST(Objective, TargetWeightsAndActions) {
  const ExactSimilarity sim;
  const Document u = doc("the cat");
  const Alignment a = align(u, doc("a big cat ran"), sim);
  // Exact matching never substitutes here: two gaps outscore a mismatch.
  ASSERT_EQ(a.num_edits(), 4u);
  const std::vector<std::size_t> sigma{3, 0, 2, 1};
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto t = objective_target(a, u, sigma, k);
    EXPECT_DOUBLE_EQ(t.weight, 5.0 / static_cast<double>(n_k(4, k)));
    EXPECT_EQ(t.actions.size(), n_k(4, k));
    const auto seq = extract_edit_sequence(a, sigma, u);
    EXPECT_EQ(t.x, apply_sequence(u, std::span(seq).first(k - 1), Actor::Agent));
    // The next ordered edit is always among the targets.
    if (k <= 4) {
      EXPECT_NE(std::find(t.actions.begin(), t.actions.end(), EditAction::make(seq[k - 1])), t.actions.end());
      for (const auto& act : t.actions) EXPECT_TRUE(is_valid(t.x, act.edit()));
    } else {
      EXPECT_TRUE(t.actions[0].is_stop());
      EXPECT_EQ(t.x.to_text(), "a big cat ran");
    }
  }
  EXPECT_THROW(objective_target(a, u, std::vector<std::size_t>{0, 0, 1, 2}, 1), InvalidPermutation);
}

TEST(Objective, AtGoalOnlyStopIsTrained) {
  const ExactSimilarity sim;
  const Document g = doc("the dog sat");
  const auto stats = toy_stats();
  std::mt19937_64 wrng(1);
  LogLinearEditPolicy pi(stats);
  std::vector<double> w(LogLinearEditPolicy::kDim);
  for (auto& v : w) v = std::normal_distribution<double>(0, 0.5)(wrng);
  pi.set_weights(w);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto s = sample_objective(g, g, PolicyState{}, pi, rng, sim);
    ASSERT_EQ(s.target.actions.size(), 1u);
    EXPECT_TRUE(s.target.actions[0].is_stop());
    EXPECT_DOUBLE_EQ(s.target.weight, 1.0);
    EXPECT_NEAR(s.loss, -std::log(pi.stop_probability(g, {})), 1e-12);
  }
}

TEST(Objective, SurrogateEqualsMeanPathLogLikelihoodAndBoundsExact) {
  const ExactSimilarity sim;
  const auto vocab = itg::testing::small_vocab(4);
  std::mt19937_64 rng(5);
  int checked = 0;
  while (checked < 200) {
    const Document u = itg::testing::random_doc(rng, vocab, 3);
    const Document g = itg::testing::random_doc(rng, vocab, 3);
    const Alignment a = align(u, g, sim);
    if (a.num_edits() > 3) continue;
    const toy::HashedEditPolicy pi(vocab, rng(), 2.0);
    const PolicyState s;
    const double sur = enumerated_surrogate(pi, a, u, s);
    const double jensen = mean_path_log_likelihood(pi, a, u, s);
    const double exact = toy::exact_restricted_log_likelihood(pi, a, u, s);
    EXPECT_NEAR(sur, jensen, 1e-9);
    EXPECT_LE(sur, exact - log_factorial(a.num_edits()) + 1e-9);
    ++checked;
  }
}

TEST(Objective, SampledLossMatchesEnumeration) {
  const ExactSimilarity sim;
  const auto stats = toy_stats();
  LogLinearEditPolicy pi(stats);
  std::mt19937_64 wrng(9);
  std::vector<double> w(LogLinearEditPolicy::kDim);
  for (auto& v : w) v = std::normal_distribution<double>(0, 0.5)(wrng);
  pi.set_weights(w);
  const Document u = doc("the cat on mat");
  const Document g = doc("the dog sat on the mat");
  const Alignment a = align(u, g, sim);
  ASSERT_LE(a.num_edits(), 4u);
  const double want = -enumerated_surrogate(pi, a, u, {});

  Rng rng(4);
  const int n = 20000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double l = sample_objective(g, u, {}, pi, rng, sim).loss;
    sum += l;
    sq += l * l;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, want, 4 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(Objective, SampledGradientMatchesLoss) {
  const ExactSimilarity sim;
  LogLinearEditPolicy pi(toy_stats());
  const Document u = doc("the cat");
  const Document g = doc("the dog sat");
  Rng r1(8), r2(8);
  auto s = sample_objective(g, u, {}, pi, r1, sim);
  auto w = std::vector<double>(pi.weights().begin(), pi.weights().end());
  w[0] += 1e-6;
  pi.set_weights(w);
  const auto s2 = sample_objective(g, u, {}, pi, r2, sim);
  EXPECT_NEAR((s2.loss - s.loss) / 1e-6, s.grad[0], 1e-4);
}

TEST(NoisyTrajectory, ZeroNoiseFollowsAlignmentOrdering) {
  const ExactSimilarity sim;
  const auto vocab = itg::testing::small_vocab(6);
  std::mt19937_64 gen(3);
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const Document u = itg::testing::random_doc(gen, vocab, 6);
    const Document g = itg::testing::random_doc(gen, vocab, 6);
    const auto t = sample_noisy_trajectory(g, u, 0.0, rng, sim, nullptr);
    const Alignment a = align(u, g, sim);
    EXPECT_EQ(t.edits.size(), a.num_edits());
    EXPECT_EQ(t.edits, extract_edit_sequence(a, t.sigma, u));
    EXPECT_TRUE(std::none_of(t.random.begin(), t.random.end(), [](bool b) { return b; }));
    EXPECT_LE(t.prefix, t.edits.size());
    EXPECT_EQ(t.prefix_draft, apply_sequence(u, std::span(t.edits).first(t.prefix)));
  }
}

TEST(NoisyTrajectory, RandomFractionMatchesNoiseLevel) {
  const ExactSimilarity sim;
  const auto stats = toy_stats();
  const UnigramSampler words(*stats);
  std::mt19937_64 gen(4);
  Rng rng(4);
  const std::vector<Token> vocab(stats->vocabulary().begin(), stats->vocabulary().end());
  std::size_t steps = 0, random = 0;
  while (steps < 20000) {
    const Document u = itg::testing::random_doc(gen, vocab, 8);
    const Document g = itg::testing::random_doc(gen, vocab, 8);
    const auto t = sample_noisy_trajectory(g, u, 0.3, rng, sim, &words);
    EXPECT_EQ(apply_sequence(u, t.edits), g);
    EXPECT_FALSE(t.capped);
    steps += t.edits.size();
    random += static_cast<std::size_t>(std::count(t.random.begin(), t.random.end(), true));
  }
  EXPECT_NEAR(static_cast<double>(random) / static_cast<double>(steps), 0.30, 0.02);
}

TEST(NoisyTrajectory, RejectsBadArguments) {
  const ExactSimilarity sim;
  Rng rng(1);
  EXPECT_THROW(sample_noisy_trajectory(doc("a"), doc("b"), 1.0, rng, sim, nullptr), std::invalid_argument);
  EXPECT_THROW(sample_noisy_trajectory(doc("a"), doc("b"), 0.3, rng, sim, nullptr), std::invalid_argument);
}

TEST(DraftNll, UniformExpertAndProduct) {
  const Document g = doc("the dog sat");
  const UniformDraftPolicy uni({"the", "dog", "sat", "cat", "on"});
  EXPECT_NEAR(nll_draft_policy(g, {}, uni), 3 * std::log(5.0), 1e-12);
  EXPECT_DOUBLE_EQ(nll_draft_policy(g, {}, ExpertDraftPolicy(g)), 0.0);
  EXPECT_EQ(nll_draft_policy(g, {}, ExpertDraftPolicy(doc("the cat sat"))), std::numeric_limits<double>::infinity());

  // A position-dependent policy: product of per-token conditionals.
  struct Halving final : DraftTokenPolicy {
    double prob(const Token&, std::span<const Token> prefix, const PolicyState&) const override {
      return 1.0 / static_cast<double>(prefix.size() + 2);
    }
  };
  EXPECT_NEAR(nll_draft_policy(g, {}, Halving{}), -std::log(1.0 / 2 * 1.0 / 3 * 1.0 / 4), 1e-12);
}

TEST(Dagger, BetaSchedule) {
  std::vector<double> got;
  for (std::size_t t = 0; t < 5; ++t) got.push_back(dagger_beta(0.5, 2, t));
  EXPECT_EQ(got, (std::vector<double>{1, 1, 1, 0.5, 0.25}));
  EXPECT_DOUBLE_EQ(dagger_beta(1.0, 0, 100), 1.0);
}

TEST(Dagger, LambdaOneIsPureExpertRollIn) {
  const ExactSimilarity sim;
  const std::vector<Document> goals{doc("the dog sat on the mat ."), doc("a cat ran home .")};
  const auto r = dagger_train(LogLinearEditPolicy(toy_stats()), tiny_dagger(1.0), goals, sim);
  ASSERT_EQ(r.dataset.size(), 18u);
  for (const auto& e : r.dataset) {
    EXPECT_TRUE(e.expert_acted);
    // The expert completes the goal on its first turn, so every session
    // contributes one state.
    EXPECT_EQ(e.state.h, 1u);
  }
  ASSERT_EQ(r.curve.size(), 3u);
  for (const auto& p : r.curve) {
    EXPECT_DOUBLE_EQ(p.beta, 1.0);
    EXPECT_DOUBLE_EQ(p.mean_score, 1.0);
    EXPECT_TRUE(std::isfinite(p.loss));
  }
}

TEST(Dagger, DatasetIsAppendOnly) {
  const ExactSimilarity sim;
  const std::vector<Document> goals{doc("the dog sat on the mat ."), doc("a cat ran home .")};
  auto cfg = tiny_dagger(0.3);
  std::vector<std::vector<std::string>> snapshots;
  const auto key = [](const DatasetEntry& e) {
    return e.goal.to_text() + "|" + e.state.user.to_text() + "|" + std::to_string(e.iteration) + "|" +
           std::to_string(e.state.h);
  };
  dagger_train(LogLinearEditPolicy(toy_stats()), cfg, goals, sim, [&](const CurvePoint& p, const std::vector<DatasetEntry>& d) {
    EXPECT_EQ(p.dataset_size, d.size());
    std::vector<std::string> keys;
    for (const auto& e : d) keys.push_back(key(e));
    snapshots.push_back(std::move(keys));
  });
  ASSERT_EQ(snapshots.size(), 3u);
  for (std::size_t t = 1; t < snapshots.size(); ++t) {
    ASSERT_EQ(snapshots[t].size(), snapshots[t - 1].size() + cfg.states_per_iteration);
    EXPECT_TRUE(std::equal(snapshots[t - 1].begin(), snapshots[t - 1].end(), snapshots[t].begin()));
  }
}

TEST(Dagger, ParallelWorkersMatchSerial) {
  const ExactSimilarity sim;
  const std::vector<Document> goals{doc("the dog sat on the mat ."), doc("a cat ran home .")};
  auto cfg = tiny_dagger(0.5);
  cfg.workers = 3;
  const auto a = dagger_train(LogLinearEditPolicy(toy_stats()), cfg, goals, sim);
  const auto b = dagger_train(LogLinearEditPolicy(toy_stats()), cfg, goals, sim);
  EXPECT_EQ(std::vector<double>(a.policy.weights().begin(), a.policy.weights().end()),
            std::vector<double>(b.policy.weights().begin(), b.policy.weights().end()));
}

TEST(Dagger, Errors) {
  const ExactSimilarity sim;
  const std::vector<Document> none;
  EXPECT_THROW(dagger_train(LogLinearEditPolicy(toy_stats()), tiny_dagger(0.5), none, sim), EmptyGoalSampler);

  const std::vector<Document> goals{doc("the dog sat on the mat .")};
  auto cfg = tiny_dagger(0.5);
  cfg.step_size = 1e308;
  EXPECT_THROW(dagger_train(LogLinearEditPolicy(toy_stats()), cfg, goals, sim), DivergedLoss);

  const std::vector<Document> unknown{doc("zebra")};
  EXPECT_THROW(dagger_train(LogLinearEditPolicy(toy_stats()), tiny_dagger(0.5), unknown, sim), std::invalid_argument);
  cfg = tiny_dagger(0.5);
  cfg.lambda = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Dagger, LearningCurveCsv) {
  std::ostringstream out;
  const std::vector<CurvePoint> c{{0, 1.0, 2.5, 0.75, 10}};
  write_learning_curve(out, c);
  EXPECT_EQ(out.str(), "iteration,beta,loss,mean_score,dataset_size\n0,1,2.5,0.75,10\n");
}
