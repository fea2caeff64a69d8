#include "itg/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

namespace itg {

std::size_t n_k(std::size_t M, std::size_t k) {
  if (k < 1 || k > M + 1) throw std::out_of_range("k must lie in [1, M + 1]");
  return k <= M ? M - k + 1 : 1;
}

ObjectiveTarget objective_target(const Alignment& a, const Document& u_h, std::span<const std::size_t> sigma,
                                 std::size_t k) {
  const std::size_t M = a.num_edits();
  if (sigma.size() != M) throw InvalidPermutation("ordering has the wrong length");
  std::vector<bool> seen(M, false);
  for (const auto i : sigma) {
    if (i >= M || seen[i]) throw InvalidPermutation("ordering is not a permutation of the edit set");
    seen[i] = true;
  }
  ObjectiveTarget t;
  t.k = k;
  t.M = M;
  t.weight = static_cast<double>(M + 1) / static_cast<double>(n_k(M, k));

  const auto done = sigma.first(k - 1);
  std::vector<Edit> prefix;
  prefix.reserve(k - 1);
  for (std::size_t j = 0; j + 1 < k; ++j) prefix.push_back(edit_for(a.ops[sigma[j]], location_after(a, sigma[j], sigma.first(j))));
  t.x = apply_sequence(u_h, prefix, Actor::Agent);
  if (k == M + 1) {
    t.actions.push_back(EditAction::stop());
  } else {
    for (std::size_t j = k - 1; j < M; ++j) {
      t.actions.push_back(EditAction::make(edit_for(a.ops[sigma[j]], location_after(a, sigma[j], done))));
    }
  }
  return t;
}

double surrogate_term(const EditPolicy& policy, const ObjectiveTarget& t, const PolicyState& s) {
  double sum = 0;
  for (const auto& a : t.actions) sum += policy.log_prob(t.x, s, a);
  return t.weight * sum;
}

namespace {

Edit random_edit(const Document& x, Rng& rng, const UnigramSampler& words) {
  std::vector<Op> ops;
  if (!x.full()) ops.push_back(Op::Ins);
  if (!x.empty()) {
    ops.push_back(Op::Del);
    ops.push_back(Op::Sub);
  }
  const Op op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
  const std::size_t last = op == Op::Ins ? x.size() + 1 : x.size();
  const std::size_t l = std::uniform_int_distribution<std::size_t>(1, last)(rng);
  if (op == Op::Del) return Edit::del(l);
  return {l, op, words(rng)};
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

NoisyTrajectory sample_noisy_trajectory(const Document& goal, const Document& u_h, double noise, Rng& rng,
                                        const SimilarityProvider& sim, const UnigramSampler* words, std::size_t cap) {
  if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("noise level must lie in [0, 1)");
  if (noise > 0.0 && !words) throw std::invalid_argument("noisy trajectories need a word sampler");
  if (cap == 0) cap = 4 * u_h.capacity();

  NoisyTrajectory t;
  Document x = u_h;
  std::vector<Document> drafts{x};
  Alignment a = align(x, goal, sim);
  std::vector<std::size_t> order = shuffled(a.num_edits(), rng);
  t.sigma = order;
  std::vector<std::size_t> done;
  std::bernoulli_distribution coin(noise);

  while (!(x == goal)) {
    const bool allowed = t.edits.size() < cap;
    if (!allowed && noise > 0.0) t.capped = true;
    Edit e;
    bool noisy = coin(rng) && allowed && (!x.full() || !x.empty());
    if (noisy) {
      e = random_edit(x, rng, *words);
    } else {
      if (done.size() == order.size()) throw std::logic_error("alignment exhausted before reaching the goal");
      if (x.full() && a.ops[order[done.size()]].kind == AlignKind::Ins) {
        // A full draft needs a deletion or substitution first; pull the next one forward.
        const auto it = std::find_if(order.begin() + static_cast<std::ptrdiff_t>(done.size()), order.end(),
                                     [&](std::size_t j) { return a.ops[j].kind != AlignKind::Ins; });
        std::rotate(order.begin() + static_cast<std::ptrdiff_t>(done.size()), it, it + 1);
      }
      const std::size_t i = order[done.size()];
      e = edit_for(a.ops[i], location_after(a, i, done));
      done.push_back(i);
    }
    x = apply(x, e, Actor::Agent);
    t.edits.push_back(e);
    t.random.push_back(noisy);
    drafts.push_back(x);
    if (noisy) {
      a = align(x, goal, sim);
      order = shuffled(a.num_edits(), rng);
      done.clear();
    }
  }
  t.prefix = std::uniform_int_distribution<std::size_t>(0, t.edits.size())(rng);
  t.prefix_draft = drafts[t.prefix];
  return t;
}

ObjectiveSample sample_objective(const Document& goal, const Document& u_h, const PolicyState& state,
                                 const LogLinearEditPolicy& policy, Rng& rng, const SimilarityProvider& sim,
                                 double noise, const UnigramSampler* words) {
  ObjectiveSample out;
  if (noise == 0.0) {
    const Alignment a = align(u_h, goal, sim);
    const auto sigma = shuffled(a.num_edits(), rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, a.num_edits() + 1)(rng);
    out.target = objective_target(a, u_h, sigma, k);
  } else {
    const NoisyTrajectory traj = sample_noisy_trajectory(goal, u_h, noise, rng, sim, words);
    const Alignment a = align(traj.prefix_draft, goal, sim);
    const std::size_t K = traj.edits.size();
    ObjectiveTarget& t = out.target;
    t.x = traj.prefix_draft;
    t.k = traj.prefix + 1;
    t.M = K;
    if (a.num_edits() == 0) {
      t.actions.push_back(EditAction::stop());
      t.weight = static_cast<double>(K + 1);
    } else {
      for (auto& e : first_edit_candidates(a)) t.actions.push_back(EditAction::make(std::move(e)));
      t.weight = static_cast<double>(K + 1) / static_cast<double>(a.num_edits());
    }
  }
  std::vector<double> g(LogLinearEditPolicy::kDim, 0.0);
  out.loss = -policy.weighted_log_likelihood(out.target.x, state, out.target.actions, out.target.weight, &g);
  for (auto& v : g) v = -v;
  out.grad = std::move(g);
  return out;
}

UniformDraftPolicy::UniformDraftPolicy(std::vector<Token> vocabulary) : vocab_(std::move(vocabulary)) {
  std::sort(vocab_.begin(), vocab_.end());
  vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  if (vocab_.empty()) throw EmptyCorpus("uniform draft policy needs a vocabulary");
}

double UniformDraftPolicy::prob(const Token& next, std::span<const Token>, const PolicyState&) const {
  return std::binary_search(vocab_.begin(), vocab_.end(), next) ? 1.0 / static_cast<double>(vocab_.size()) : 0.0;
}

double ExpertDraftPolicy::prob(const Token& next, std::span<const Token> prefix, const PolicyState&) const {
  if (prefix.size() >= goal_.size()) return 0.0;
  if (!std::equal(prefix.begin(), prefix.end(), goal_.tokens().begin())) return 0.0;
  return next == goal_[prefix.size()] ? 1.0 : 0.0;
}

double nll_draft_policy(const Document& goal, const PolicyState& state, const DraftTokenPolicy& policy) {
  double nll = 0.0;
  const auto g = goal.tokens();
  for (std::size_t i = 0; i < g.size(); ++i) nll -= std::log(policy.prob(g[i], g.first(i), state));
  return nll + 0.0;
}

void DaggerConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("annealing rate must lie in (0, 1]");
  if (states_per_iteration == 0) throw std::invalid_argument("states per iteration must be positive");
  if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("noise level must lie in [0, 1)");
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be positive");
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  session.validate();
  decode.validate();
}

double dagger_beta(double lambda, std::size_t warmup, std::size_t t) {
  return t <= warmup ? 1.0 : std::pow(lambda, static_cast<double>(t - warmup));
}

namespace {

struct Rollout {
  std::vector<DatasetEntry> states;
  double final_score = 0.0;
};

Rollout roll_in(const Document& goal, const DaggerConfig& cfg, const SimilarityProvider& sim, const Policy& learner,
                double beta, std::size_t iteration, std::uint64_t seed) {
  SessionConfig sc = cfg.session;
  sc.seed = seed;
  Session s(goal, sc, sim, "dagger");
  const ExpertPolicy expert(goal);
  Rollout r;
  while (s.begin_round()) {
    Rng rng(mix_seed(seed, s.round()));
    const bool use_expert = std::bernoulli_distribution(beta)(rng);
    r.states.push_back({goal, s.state(), iteration, use_expert});
    s.agent_move(use_expert ? expert.act(s.state(), rng) : learner.act(s.state(), rng));
  }
  r.final_score = s.trace().final_score;
  return r;
}

}  // namespace

DaggerResult dagger_train(LogLinearEditPolicy policy, const DaggerConfig& cfg, std::span<const Document> goals,
                          const SimilarityProvider& sim, const DaggerObserver& observer) {
  cfg.validate();
  if (goals.empty()) throw EmptyGoalSampler("DAgger needs at least one training goal");
  for (const auto& g : goals) {
    for (const auto& w : g.tokens()) {
      if (!policy.stats().known(w)) throw std::invalid_argument("training goal word '" + w + "' is outside the policy vocabulary");
    }
  }
  const UnigramSampler words(policy.stats());
  Rng rng(mix_seed(cfg.seed, 0x6461676765ull));
  std::uniform_int_distribution<std::size_t> pick_goal(0, goals.size() - 1);
  DaggerResult result{policy, {}, {}};
  auto& D = result.dataset;
  const std::size_t fit_steps = cfg.fit_steps ? cfg.fit_steps : cfg.states_per_iteration;
  std::size_t session_index = 0;

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    const double beta = dagger_beta(cfg.lambda, cfg.warmup, t);
    const auto snapshot = std::make_shared<const LogLinearEditPolicy>(result.policy);
    const EditPolicyAgent learner(snapshot, cfg.decode, "learner");

    // Roll-in: sessions run in parallel batches and are appended in order.
    std::size_t collected = 0;
    double score_sum = 0.0;
    std::size_t sessions = 0;
    while (collected < cfg.states_per_iteration) {
      std::vector<std::future<Rollout>> batch;
      for (std::size_t w = 0; w < cfg.workers; ++w) {
        const Document& goal = goals[pick_goal(rng)];
        const std::uint64_t seed = mix_seed(cfg.seed, t, session_index++);
        batch.push_back(std::async(cfg.workers > 1 ? std::launch::async : std::launch::deferred,
                                   [&, goal_ptr = &goal, seed] { return roll_in(*goal_ptr, cfg, sim, learner, beta, t, seed); }));
      }
      for (auto& f : batch) {
        Rollout r = f.get();
        if (collected >= cfg.states_per_iteration) continue;
        score_sum += r.final_score;
        ++sessions;
        for (auto& e : r.states) {
          if (collected == cfg.states_per_iteration) break;
          D.push_back(std::move(e));
          ++collected;
        }
      }
    }

    // Fit on the aggregate.
    std::uniform_int_distribution<std::size_t> pick_state(0, D.size() - 1);
    double loss_sum = 0.0;
    auto& w = result.policy.mutable_weights();
    for (std::size_t step = 0; step < fit_steps; ++step) {
      const DatasetEntry& e = D[pick_state(rng)];
      ObjectiveSample s = sample_objective(e.goal, e.state.user, e.state, result.policy, rng, sim, cfg.noise, &words);
      if (!std::isfinite(s.loss)) {
        throw DivergedLoss("non-finite loss at iteration " + std::to_string(t) + ", step " + std::to_string(step));
      }
      double norm = 0.0;
      for (const double g : s.grad) norm += g * g;
      norm = std::sqrt(norm);
      const double scale = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg.step_size * scale * s.grad[j];
      loss_sum += s.loss;
    }
    for (const double v : w) {
      if (!std::isfinite(v)) throw DivergedLoss("non-finite weight at iteration " + std::to_string(t));
    }

    CurvePoint p{t, beta, loss_sum / static_cast<double>(fit_steps),
                 sessions ? score_sum / static_cast<double>(sessions) : 0.0, D.size()};
    result.curve.push_back(p);
    if (observer) observer(p, D);
  }
  return result;
}

void write_learning_curve(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "iteration,beta,loss,mean_score,dataset_size\n";
  out.precision(10);
  for (const auto& p : curve) {
    out << p.iteration << ',' << p.beta << ',' << p.loss << ',' << p.mean_score << ',' << p.dataset_size << '\n';
  }
}

}  // namespace itg
