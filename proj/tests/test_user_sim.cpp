#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "itg/alignment.hpp"
#include "itg/user_sim.hpp"
#include "test_support.hpp"

using namespace itg;
using itg::testing::doc;

namespace {

std::shared_ptr<const IdfTable> idf_from(std::unordered_map<Token, std::size_t> df, std::size_t n) {
  return std::make_shared<const IdfTable>(std::move(df), n);
}

UserSimConfig config(std::size_t n, std::string_view heuristics, std::shared_ptr<const IdfTable> idf = nullptr) {
  UserSimConfig cfg;
  cfg.edits_per_episode = n;
  cfg.heuristics = HeuristicSet::parse(heuristics);
  cfg.idf_table = std::move(idf);
  cfg.rng_seed = 17;
  return cfg;
}

// Greedy oracle: realign after every edit and take the highest-IDF first edit.
Document greedy_idf_rollout(Document draft, const Document& goal, std::size_t n, const IdfTable& idf,
                            const SimilarityProvider& sim) {
  for (std::size_t k = 0; k < n && !(draft == goal); ++k) {
    auto fe = first_edits(draft, goal, sim);
    const auto best = std::max_element(fe.begin(), fe.end(), [&](const Edit& a, const Edit& b) {
      return idf.idf(a.word) < idf.idf(b.word);
    });
    draft = apply(draft, *best);
  }
  return draft;
}

}  // namespace

TEST(Idf, FormulaValues) {
  const std::vector<Document> corpus{doc("the cat"), doc("the dog"), doc("the bird")};
  const IdfTable t = IdfTable::build(corpus);
  EXPECT_DOUBLE_EQ(t.idf("the"), 1.0);
  EXPECT_NEAR(t.idf("unseen"), std::log(4.0) + 1.0, 1e-12);
  EXPECT_NEAR(t.idf("unseen"), 2.386294361, 1e-9);
  EXPECT_DOUBLE_EQ(t.max_idf(), t.idf("unseen"));
  EXPECT_NEAR(t.idf("cat"), std::log(4.0 / 2.0) + 1.0, 1e-12);
}

TEST(Idf, EmptyCorpusIsAnError) {
  EXPECT_THROW(IdfTable::build(std::span<const Document>{}), EmptyCorpus);
}

TEST(Idf, CountsEachDocumentOnce) {
  const std::vector<Document> corpus{doc("a a a"), doc("b")};
  EXPECT_EQ(IdfTable::build(corpus).doc_frequency("a"), 1u);
}

TEST(Idf, MonotoneInDocumentFrequency) {
  std::mt19937_64 rng(3);
  const auto vocab = itg::testing::small_vocab(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Document> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back(itg::testing::random_doc(rng, vocab, 6));
    const IdfTable t = IdfTable::build(corpus);
    for (const auto& a : vocab) {
      EXPECT_GE(t.idf(a), 0.0);
      EXPECT_LE(t.doc_frequency(a), t.corpus_size());
      for (const auto& b : vocab) {
        if (t.doc_frequency(a) < t.doc_frequency(b)) EXPECT_GT(t.idf(a), t.idf(b));
      }
    }
  }
}

TEST(Idf, TsvRoundTrip) {
  const std::vector<Document> corpus{doc("the cat"), doc("the dog"), doc("a bird")};
  const IdfTable t = IdfTable::build(corpus);
  std::stringstream ss;
  t.write_tsv(ss);
  const IdfTable back = IdfTable::read_tsv(ss);
  EXPECT_EQ(back.corpus_size(), 3u);
  for (const auto& w : {"the", "cat", "a", "zzz"}) EXPECT_DOUBLE_EQ(back.idf(w), t.idf(w));
}

TEST(Heuristics, ParseNamedSets) {
  EXPECT_EQ(HeuristicSet::parse("unrestricted"), HeuristicSet{});
  const auto h = HeuristicSet::parse("adj+contig");
  EXPECT_TRUE(h.adjacent && h.contiguous && !h.ranking_idf && !h.complete_words);
  EXPECT_EQ(HeuristicSet::parse(h.to_string()), h);
  EXPECT_THROW(HeuristicSet::parse("telepathy"), std::invalid_argument);
}

TEST(UserSimConfig, IdfTablePresentIffRanking) {
  EXPECT_THROW(config(1, "idf").validate(), std::invalid_argument);
  EXPECT_THROW(config(1, "adj", idf_from({}, 1)).validate(), std::invalid_argument);
  EXPECT_THROW(config(0, "unrestricted").validate(), std::invalid_argument);
  EXPECT_NO_THROW(config(1, "idf", idf_from({}, 1)).validate());
}

TEST(ProposeEdits, IdfRankingInsertsMostInformativeFirst) {
  const TrigramSimilarity sim;
  const auto idf = idf_from({{"NASA", 0}, {"Monday", 1}, {"launches", 2}, {"spacecraft", 3}}, 10);
  const Document goal = doc("NASA launches spacecraft Monday");
  const auto edits = propose_edits(Document{}, goal, config(2, "idf", idf), sim);
  EXPECT_EQ(edits, (std::vector<Edit>{Edit::ins(1, "NASA"), Edit::ins(2, "Monday")}));
  EXPECT_EQ(apply_sequence(Document{}, edits), greedy_idf_rollout(Document{}, goal, 2, *idf, sim));
  EXPECT_EQ(apply_sequence(Document{}, edits).to_text(), "NASA Monday");
}

TEST(ProposeEdits, IdfRankingAgreesWithGreedyOracleOnInsertOnlyCases) {
  const ExactSimilarity sim;
  std::mt19937_64 rng(8);
  std::vector<Token> vocab;
  std::unordered_map<Token, std::size_t> df;
  for (int i = 0; i < 30; ++i) {
    vocab.push_back("w" + std::to_string(i));
    df[vocab.back()] = static_cast<std::size_t>(i);
  }
  const auto idf = idf_from(df, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Token> words = vocab;
    std::shuffle(words.begin(), words.end(), rng);
    words.resize(1 + rng() % 10);
    const Document goal(words);
    // Draft: a random subsequence of the goal.
    std::vector<Token> kept;
    for (const auto& w : words) if (rng() % 2) kept.push_back(w);
    const Document draft(kept);
    if (draft == goal) continue;
    const std::size_t n = 1 + rng() % 4;
    const auto edits = propose_edits(draft, goal, config(n, "idf", idf), sim);
    EXPECT_EQ(apply_sequence(draft, edits), greedy_idf_rollout(draft, goal, n, *idf, sim));
  }
}

TEST(ProposeEdits, BudgetCoveringDistanceReachesGoal) {
  const TrigramSimilarity sim;
  std::mt19937_64 rng(21);
  const auto vocab = itg::testing::small_vocab(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Document draft = itg::testing::random_doc(rng, vocab, 8);
    const Document goal = itg::testing::random_doc(rng, vocab, 8);
    if (draft == goal) continue;
    for (const char* h : {"unrestricted", "adj", "contig", "adj+contig"}) {
      const auto edits = propose_edits(draft, goal, config(64, h), sim);
      EXPECT_EQ(edits.size(), align(draft, goal, sim).num_edits());
      EXPECT_EQ(apply_sequence(draft, edits), goal) << h;
    }
  }
}

TEST(ProposeEdits, ContiguousEditsFormOneBlock) {
  const ExactSimilarity sim;
  const Document draft = doc("a");
  const Document goal = doc("a b c d");
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = config(2, "contig");
    cfg.rng_seed = seed;
    const auto out = apply_sequence(draft, propose_edits(draft, goal, cfg, sim)).to_text();
    EXPECT_TRUE(out == "a b c" || out == "a c d") << out;
  }
  const auto idf = idf_from({{"b", 0}, {"c", 1}, {"d", 2}}, 5);
  const auto edits = propose_edits(draft, goal, config(2, "idf+contig", idf), sim);
  EXPECT_EQ(edits, (std::vector<Edit>{Edit::ins(2, "b"), Edit::ins(3, "c")}));
}

TEST(ProposeEdits, WithoutContiguityBlocksCanSplit) {
  const ExactSimilarity sim;
  const auto idf = idf_from({{"b", 0}, {"d", 1}, {"c", 2}}, 5);
  const auto edits = propose_edits(doc("a"), doc("a b c d"), config(2, "idf", idf), sim);
  EXPECT_EQ(apply_sequence(doc("a"), edits).to_text(), "a b d");
}

TEST(ProposeEdits, AdjacencyStartsAtTheFrontOfABlankDraft) {
  const ExactSimilarity sim;
  const auto idf = idf_from({{"d", 0}, {"c", 1}, {"b", 2}, {"a", 3}}, 5);
  const auto edits = propose_edits(Document{}, doc("a b c d"), config(2, "idf+adj", idf), sim);
  EXPECT_EQ(apply_sequence(Document{}, edits).to_text(), "a b");
}

TEST(ProposeEdits, AdjacencyFollowsMatches) {
  const ExactSimilarity sim;
  const auto idf = idf_from({{"z", 0}, {"q", 3}}, 5);
  // z is the most informative but sits two slots away from any match.
  const auto edits = propose_edits(doc("a b"), doc("a q b y z"), config(1, "idf+adj", idf), sim);
  ASSERT_EQ(edits.size(), 1u);
  EXPECT_NE(edits[0].word, "z");
}

TEST(ProposeEdits, StarvedContiguityRelaxesToKeepBudget) {
  const ExactSimilarity sim;
  // b and d are separated by the match c, so no two-edit block exists.
  const auto edits = propose_edits(doc("a c e"), doc("a b c d e"), config(2, "adj+contig"), sim);
  EXPECT_EQ(edits.size(), 2u);
  EXPECT_EQ(apply_sequence(doc("a c e"), edits).to_text(), "a b c d e");
}

TEST(ProposeEdits, CompleteWordsKeepsSubwordPiecesTogether) {
  const ExactSimilarity sim;
  const auto idf = idf_from({{"##craft", 0}, {"lands", 1}, {"space", 4}}, 5);
  const Document goal(std::vector<Token>{"space", "##craft", "lands"});
  const auto split = propose_edits(Document{}, goal, config(2, "idf", idf), sim);
  EXPECT_EQ(apply_sequence(Document{}, split).to_text(), "##craft lands");
  const auto whole = propose_edits(Document{}, goal, config(2, "idf+words", idf), sim);
  EXPECT_EQ(apply_sequence(Document{}, whole).to_text(), "space ##craft");
}

TEST(ProposeEdits, EditTypePriorityOnTies) {
  const ExactSimilarity sim;
  // One insertion, one deletion, no ranking: the insertion comes first.
  const auto edits = propose_edits(doc("a x"), doc("y a"), config(1, "unrestricted"), sim);
  ASSERT_EQ(edits.size(), 1u);
  EXPECT_EQ(edits[0].op, Op::Ins);
}

TEST(ProposeEdits, AlreadyAtGoal) {
  const TrigramSimilarity sim;
  EXPECT_THROW(propose_edits(doc("a b"), doc("a b"), config(1, "unrestricted"), sim), AlreadyAtGoal);
}

TEST(ProposeEdits, DeterministicUnderSeed) {
  const TrigramSimilarity sim;
  const Document draft = doc("the cat sat");
  const Document goal = doc("a dog ran on the mat today");
  const auto cfg = config(3, "unrestricted");
  EXPECT_EQ(propose_edits(draft, goal, cfg, sim), propose_edits(draft, goal, cfg, sim));
}

TEST(ProposeEdits, BudgetExactAndGoalDirected) {
  const TrigramSimilarity sim;
  std::mt19937_64 rng(77);
  const auto vocab = itg::testing::small_vocab(16);
  const std::vector<Document> corpus{doc("the cat sat"), doc("the dog ran"), doc("a big red bus")};
  const auto idf = std::make_shared<const IdfTable>(IdfTable::build(corpus));
  for (int trial = 0; trial < 300; ++trial) {
    const Document draft = itg::testing::random_doc(rng, vocab, 10);
    const Document goal = itg::testing::random_doc(rng, vocab, 10);
    if (draft == goal) continue;
    const std::size_t n = 1 + rng() % 4;
    const std::size_t m = align(draft, goal, sim).num_edits();
    for (const char* h : {"idf", "idf+adj", "idf+contig", "idf+adj+contig", "adj+contig"}) {
      auto cfg = config(n, h, HeuristicSet::parse(h).ranking_idf ? idf : nullptr);
      const UserTurn turn = user_step(draft, goal, cfg, sim);
      EXPECT_EQ(turn.edits.size(), std::min(n, m)) << h;
      // Every applied edit comes off the optimal alignment toward the goal.
      EXPECT_LE(align(turn.draft, goal, sim).num_edits(), m - turn.edits.size()) << h;
    }
  }
}

TEST(UserStep, SingleInsertOnBlank) {
  const TrigramSimilarity sim;
  const UserTurn t = user_step(Document{}, doc("a"), config(1, "unrestricted"), sim);
  EXPECT_EQ(t.draft.to_text(), "a");
  EXPECT_EQ(t.edits, (std::vector<Edit>{Edit::ins(1, "a")}));
  EXPECT_EQ(t.draft.mark(0), Mark::UserInserted);
}

TEST(UserStep, UserMarksPersistAcrossUserTurns) {
  const TrigramSimilarity sim;
  std::mt19937_64 rng(4);
  const auto vocab = itg::testing::small_vocab(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Document goal = itg::testing::random_doc(rng, vocab, 10);
    Document draft = itg::testing::random_doc(rng, vocab, 10);
    std::size_t marked_before = 0;
    while (!(draft == goal)) {
      const UserTurn t = user_step(draft, goal, config(2, "unrestricted"), sim);
      std::size_t marked = 0;
      for (std::size_t i = 0; i < t.draft.size(); ++i) marked += t.draft.mark(i) == Mark::UserInserted;
      std::size_t deleted_marked = 0;
      // Deletions of user-marked tokens are the only way to lose a mark.
      Document cur = draft;
      for (const auto& e : t.edits) {
        if (e.op == Op::Del && cur.mark(e.location - 1) == Mark::UserInserted) ++deleted_marked;
        cur = apply(cur, e, Actor::User);
      }
      EXPECT_GE(marked + deleted_marked, marked_before);
      marked_before = marked;
      draft = t.draft;
    }
  }
}

TEST(ProposeEdits, FullDraftShrinksBeforeGrowing) {
  const ExactSimilarity sim;
  std::mt19937_64 rng(12);
  const auto vocab = itg::testing::small_vocab(8);
  for (int trial = 0; trial < 300; ++trial) {
    Document draft = itg::testing::random_doc(rng, vocab, 6, 6);
    while (!draft.full()) draft = apply(draft, Edit::ins(draft.size() + 1, vocab[rng() % vocab.size()]));
    const Document goal = itg::testing::random_doc(rng, vocab, 6, 6);
    if (align(draft, goal, sim).num_edits() == 0) continue;
    for (const char* h : {"unrestricted", "adj+contig"}) {
      UserSimConfig cfg;
      cfg.edits_per_episode = 1 + rng() % 4;
      cfg.heuristics = HeuristicSet::parse(h);
      const auto turn = user_step(draft, goal, cfg, sim);
      EXPECT_LE(turn.draft.size(), 6u);
      EXPECT_EQ(turn.edits.size(), std::min(cfg.edits_per_episode, align(draft, goal, sim).num_edits()));
    }
  }
}
