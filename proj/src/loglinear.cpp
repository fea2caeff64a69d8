#include "itg/loglinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>


namespace itg {

namespace {

using Policy = LogLinearEditPolicy;

// Log probabilities are scaled down so features sit roughly in [-1, 1].
constexpr double kScale = 0.1;
// Scaled log probability below which a transition counts as unusual (p < 0.01).
constexpr double kRareTransition = kScale * -4.6;

bool is_punct(std::string_view w) { return w.size() == 1 && std::string_view(".,!?;:").find(w[0]) != std::string_view::npos; }

// Morphological neighbours such as "launch" / "launches".
bool shared_stem(std::string_view a, std::string_view b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i >= 3 || (i == n && n > 0);
}

std::size_t op_slot(Op o) { return static_cast<std::size_t>(o); }

void softmax(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0;
  for (auto& x : v) z += (x = std::exp(x - m));
  for (auto& x : v) x /= z;
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

struct WordInfo {
  std::size_t id;
  double uni;
  bool user;
  bool in_x;
  std::size_t bucket;
  bool punct;
};

// Per-(x, state) feature evaluation. Location, op and word heads are filled
// lazily so scoring one action stays cheap.
class Scorer {
 public:
  struct OpDist {
    std::vector<Op> ops;
    std::vector<std::array<double, Policy::kOpBase>> f;
    std::vector<double> p;
  };
  struct WordDist {
    std::vector<std::size_t> words;  // indices into support
    std::vector<std::array<double, Policy::kWordBase>> f;
    std::vector<double> p;
  };

  Scorer(const Policy& pol, const Document& x, const PolicyState& s) : pol_(pol), st_(pol.stats()), x_(x), s_(s) {
    n_ = x.size();
    const double tau = pol.temperature();
    const auto w = pol.weights();

    build_support();
    ids_.resize(n_ + 2);
    ids_[0] = CorpusStats::kBos;
    for (std::size_t i = 0; i < n_; ++i) ids_[i + 1] = st_.id(x[i]);
    ids_[n_ + 1] = CorpusStats::kEos;

    trans_.resize(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) trans_[i] = lp(ids_[i], ids_[i + 1]);

    ins_ok_ = !x.full() && !support_.empty();
    best_ins_.assign(n_ + 2, 0.0);
    del_gain_.assign(n_ + 2, 0.0);
    best_sub_.assign(n_ + 2, 0.0);
    sub_ok_.assign(n_ + 2, false);
    for (std::size_t l = 1; l <= n_ + 1; ++l) {
      const std::size_t left = ids_[l - 1];
      if (ins_ok_) {
        const std::size_t right = ids_[l];
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& wi : info_) best = std::max(best, lp(left, wi.id) + lp(wi.id, right));
        best_ins_[l] = best - trans_[l - 1];
      }
      if (l > n_) break;
      const std::size_t right = ids_[l + 1];
      del_gain_[l] = lp(left, right) - trans_[l - 1] - trans_[l];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < support_.size(); ++k) {
        if (support_[k] == x[l - 1]) continue;
        sub_ok_[l] = true;
        best = std::max(best, lp(left, info_[k].id) + lp(info_[k].id, right));
      }
      if (sub_ok_[l]) best_sub_[l] = best - trans_[l - 1] - trans_[l];
    }

    // Stop head.
    f_stop_.fill(0.0);
    f_stop_[0] = 1.0;
    // Share of user-typed words (with multiplicity) missing from x.
    if (!s.user_words.empty()) {
      std::size_t want = 0, missing = 0;
      for (const auto& [word, count] : s.user_words) {
        const auto have = static_cast<std::size_t>(std::count(x.tokens().begin(), x.tokens().end(), word));
        want += count;
        missing += count > have ? count - have : 0;
      }
      f_stop_[1] = static_cast<double>(missing) / static_cast<double>(want);
    }
    f_stop_[2] = *std::min_element(trans_.begin(), trans_.end());
    double mean = 0;
    for (const double t : trans_) mean += t;
    f_stop_[3] = mean / static_cast<double>(trans_.size());
    double max_ins = 0, max_del = 0;
    bool any_ins = false, any_del = false;
    for (std::size_t l = 1; l <= n_ + 1; ++l) {
      if (ins_ok_) {
        max_ins = any_ins ? std::max(max_ins, best_ins_[l]) : best_ins_[l];
        any_ins = true;
      }
      if (l <= n_) {
        max_del = any_del ? std::max(max_del, del_gain_[l]) : del_gain_[l];
        any_del = true;
      }
    }
    f_stop_[4] = max_ins;
    f_stop_[5] = max_del;
    f_stop_[6] = std::log1p(static_cast<double>(n_)) / 4.0;
    // Content only: provenance flags correlate with progress on training
    // trajectories but not on the learner's own drafts.
    for (std::size_t i = 1; i < n_; ++i) {
      if (x[i] == x[i - 1]) f_stop_[7] = 1.0;
    }
    std::size_t rare = 0;
    for (const double t : trans_) rare += t < kRareTransition;
    f_stop_[8] = static_cast<double>(rare) / static_cast<double>(trans_.size());
    f_stop_[9] = n_ && is_punct(x[n_ - 1]) ? 1.0 : 0.0;
    double z = 0;
    for (std::size_t j = 0; j < Policy::kStopDim; ++j) z += w[Policy::kStopOffset + j] * f_stop_[j];
    z /= tau;

    // Location head over l = 1..n, plus n + 1 when insertion is possible.
    const std::size_t nloc = n_ + (ins_ok_ ? 1 : 0);
    f_loc_.resize(nloc);
    p_loc_.resize(nloc);
    for (std::size_t i = 0; i < nloc; ++i) {
      const std::size_t l = i + 1;
      auto& f = f_loc_[i];
      f.fill(0.0);
      const bool tok = l <= n_;
      f[0] = l == n_ + 1;
      f[1] = l == 1;
      f[2] = ins_ok_ ? best_ins_[l] : 0.0;
      f[3] = tok ? del_gain_[l] : 0.0;
      f[4] = tok ? best_sub_[l] : 0.0;
      f[5] = tok && x.mark(l - 1) == Mark::UserInserted;
      f[6] = tok && x.mark(l - 1) == Mark::AgentInserted;
      f[7] = l >= 2 && x.mark(l - 2) == Mark::UserInserted;
      f[8] = tok && repeated(l);
      f[9] = trans_[l - 1];
      f[10] = tok && s.user_inserted(x[l - 1]);
      double v = 0;
      for (std::size_t j = 0; j < Policy::kLocDim; ++j) v += w[Policy::kLocOffset + j] * f[j];
      p_loc_[i] = v / tau;
    }
    if (nloc == 0) {
      p_stop_ = 1.0;
      no_edits_ = true;
    } else {
      softmax(p_loc_);
      p_stop_ = sigmoid(z);
    }
    ops_.resize(nloc);
    words_.resize(nloc * 3);
  }

  double p_stop() const { return p_stop_; }
  bool no_edits() const { return no_edits_; }
  std::size_t num_locations() const { return p_loc_.size(); }
  double p_loc(std::size_t l) const { return p_loc_[l - 1]; }
  const std::vector<Token>& support() const { return support_; }

  std::optional<std::size_t> support_index(const Token& w) const {
    const auto it = support_index_.find(w);
    if (it == support_index_.end()) return std::nullopt;
    return it->second;
  }

  const OpDist& ops_at(std::size_t l) {
    auto& slot = ops_[l - 1];
    if (slot) return *slot;
    OpDist d;
    if (ins_ok_) d.ops.push_back(Op::Ins);
    if (l <= n_) {
      d.ops.push_back(Op::Del);
      if (sub_ok_[l]) d.ops.push_back(Op::Sub);
    }
    std::array<double, Policy::kOpBase> base{};
    const bool tok = l <= n_;
    base[0] = 1.0;
    base[1] = ins_ok_ ? best_ins_[l] : 0.0;
    base[2] = tok ? del_gain_[l] : 0.0;
    base[3] = tok ? best_sub_[l] : 0.0;
    base[4] = tok && x_.mark(l - 1) == Mark::UserInserted;
    base[5] = tok && repeated(l);
    base[6] = l == n_ + 1;
    const auto w = pol_.weights();
    for (const Op o : d.ops) {
      d.f.push_back(base);
      double v = 0;
      for (std::size_t j = 0; j < Policy::kOpBase; ++j) v += w[Policy::kOpOffset + op_slot(o) * Policy::kOpBase + j] * base[j];
      d.p.push_back(v / pol_.temperature());
    }
    softmax(d.p);
    slot = std::move(d);
    return *slot;
  }

  const WordDist& words_at(std::size_t l, Op o) {
    auto& slot = words_[(l - 1) * 3 + op_slot(o)];
    if (slot) return *slot;
    WordDist d;
    const std::size_t left = ids_[l - 1];
    const std::size_t right = o == Op::Ins ? ids_[l] : ids_[l + 1];
    const std::size_t off = Policy::kWordOffset + (o == Op::Sub ? Policy::kWordBase : 0);
    const auto w = pol_.weights();
    for (std::size_t k = 0; k < support_.size(); ++k) {
      if (o == Op::Sub && support_[k] == x_[l - 1]) continue;
      const WordInfo& wi = info_[k];
      std::array<double, Policy::kWordBase> f{};
      f[0] = lp(left, wi.id);
      f[1] = lp(wi.id, right);
      f[2] = kScale * wi.uni;
      f[3] = wi.user;
      f[4] = wi.in_x;
      const bool near_left = l >= 2 && x_[l - 2] == support_[k];
      const bool near_right = o == Op::Ins ? (l <= n_ && x_[l - 1] == support_[k]) : (l + 1 <= n_ && x_[l] == support_[k]);
      f[5] = near_left || near_right;
      f[6 + wi.bucket] = 1.0;
      f[10] = o == Op::Sub && shared_stem(x_[l - 1], support_[k]);
      f[11] = wi.punct;
      double v = 0;
      for (std::size_t j = 0; j < Policy::kWordBase; ++j) v += w[off + j] * f[j];
      d.words.push_back(k);
      d.f.push_back(f);
      d.p.push_back(v / pol_.temperature());
    }
    softmax(d.p);
    slot = std::move(d);
    return *slot;
  }

  // log pi(a) and, optionally, weight * grad log pi(a) added to grad.
  double log_prob(const EditAction& a, double weight, std::vector<double>* grad) {
    const double tau = pol_.temperature();
    if (a.is_stop()) {
      if (no_edits_) return 0.0;
      if (grad) add(*grad, Policy::kStopOffset, f_stop_, weight * (1.0 - p_stop_) / tau);
      return std::log(p_stop_);
    }
    const Edit& e = a.edit();
    if (no_edits_ || e.location < 1 || e.location > num_locations()) throw std::domain_error("edit outside policy support: " + to_string(e));
    const std::size_t l = e.location;
    const auto& od = ops_at(l);
    const auto oit = std::find(od.ops.begin(), od.ops.end(), e.op);
    if (oit == od.ops.end()) throw std::domain_error("edit outside policy support: " + to_string(e));
    const std::size_t oi = static_cast<std::size_t>(oit - od.ops.begin());

    double lp_total = std::log1p(-p_stop_) + std::log(p_loc_[l - 1]) + std::log(od.p[oi]);
    std::size_t wi = 0;
    const WordDist* wd = nullptr;
    if (e.op != Op::Del) {
      wd = &words_at(l, e.op);
      const auto k = support_index(e.word);
      const auto wit = k ? std::find(wd->words.begin(), wd->words.end(), *k) : wd->words.end();
      if (wit == wd->words.end()) throw std::domain_error("edit outside policy support: " + to_string(e));
      wi = static_cast<std::size_t>(wit - wd->words.begin());
      lp_total += std::log(wd->p[wi]);
    }
    if (grad) {
      const double c = weight / tau;
      add(*grad, Policy::kStopOffset, f_stop_, -c * p_stop_);
      add(*grad, Policy::kLocOffset, f_loc_[l - 1], c);
      for (std::size_t i = 0; i < f_loc_.size(); ++i) add(*grad, Policy::kLocOffset, f_loc_[i], -c * p_loc_[i]);
      add(*grad, Policy::kOpOffset + op_slot(e.op) * Policy::kOpBase, od.f[oi], c);
      for (std::size_t i = 0; i < od.ops.size(); ++i) {
        add(*grad, Policy::kOpOffset + op_slot(od.ops[i]) * Policy::kOpBase, od.f[i], -c * od.p[i]);
      }
      if (wd) {
        const std::size_t off = Policy::kWordOffset + (e.op == Op::Sub ? Policy::kWordBase : 0);
        add(*grad, off, wd->f[wi], c);
        for (std::size_t i = 0; i < wd->words.size(); ++i) add(*grad, off, wd->f[i], -c * wd->p[i]);
      }
    }
    return lp_total;
  }

 private:
  double lp(std::size_t a, std::size_t b) const { return kScale * st_.log_prob(a, b); }

  bool repeated(std::size_t l) const {
    return (l >= 2 && x_[l - 2] == x_[l - 1]) || (l < n_ && x_[l] == x_[l - 1]);
  }

  template <std::size_t N>
  static void add(std::vector<double>& g, std::size_t off, const std::array<double, N>& f, double c) {
    for (std::size_t j = 0; j < N; ++j) g[off + j] += c * f[j];
  }

  void build_support() {
    support_ = st_.vocabulary();
    for (const auto& [w, c] : s_.user_words) {
      (void)c;
      support_.push_back(w);
    }
    for (const auto& t : x_.tokens()) support_.push_back(t);
    std::sort(support_.begin(), support_.end());
    support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
    std::unordered_map<std::string_view, bool> in_x;
    for (const auto& t : x_.tokens()) in_x[t] = true;
    const double max_idf = st_.idf().max_idf();
    info_.reserve(support_.size());
    for (std::size_t k = 0; k < support_.size(); ++k) {
      const Token& w = support_[k];
      support_index_[w] = k;
      const std::size_t id = st_.id(w);
      const double ratio = st_.idf().idf(w) / max_idf;
      info_.push_back({id, st_.unigram_log_prob(id), s_.user_inserted(w), in_x.count(w) > 0,
                       std::min<std::size_t>(3, static_cast<std::size_t>(4.0 * ratio)), is_punct(w)});
    }
  }

  const Policy& pol_;
  const CorpusStats& st_;
  const Document& x_;
  const PolicyState& s_;
  std::size_t n_ = 0;
  std::vector<Token> support_;
  std::unordered_map<Token, std::size_t> support_index_;
  std::vector<WordInfo> info_;
  std::vector<std::size_t> ids_;
  std::vector<double> trans_;
  bool ins_ok_ = false;
  std::vector<double> best_ins_, del_gain_, best_sub_;
  std::vector<bool> sub_ok_;
  std::array<double, Policy::kStopDim> f_stop_{};
  double p_stop_ = 1.0;
  bool no_edits_ = false;
  std::vector<std::array<double, Policy::kLocDim>> f_loc_;
  std::vector<double> p_loc_;
  std::vector<std::optional<OpDist>> ops_;
  std::vector<std::optional<WordDist>> words_;
};

}  // namespace

LogLinearEditPolicy::LogLinearEditPolicy(std::shared_ptr<const CorpusStats> stats, double temperature)
    : stats_(std::move(stats)), temperature_(temperature), weights_(kDim, 0.0) {
  if (!stats_) throw std::invalid_argument("log-linear policy needs corpus statistics");
  if (!(temperature_ > 0)) throw std::invalid_argument("temperature must be positive");
}

void LogLinearEditPolicy::set_weights(std::vector<double> w) {
  if (w.size() != kDim) throw std::invalid_argument("expected " + std::to_string(kDim) + " weights");
  weights_ = std::move(w);
}

ActionDistribution LogLinearEditPolicy::distribution(const Document& x, const PolicyState& s) const {
  Scorer sc(*this, x, s);
  ActionDistribution d;
  d.stop = sc.p_stop();
  if (sc.no_edits()) return d;
  const double go = 1.0 - d.stop;
  for (std::size_t l = 1; l <= sc.num_locations(); ++l) {
    const double pl = go * sc.p_loc(l);
    const auto& od = sc.ops_at(l);
    for (std::size_t i = 0; i < od.ops.size(); ++i) {
      const double po = pl * od.p[i];
      if (od.ops[i] == Op::Del) {
        d.edits.push_back(Edit::del(l));
        d.probs.push_back(po);
        continue;
      }
      const auto& wd = sc.words_at(l, od.ops[i]);
      for (std::size_t k = 0; k < wd.words.size(); ++k) {
        d.edits.push_back({l, od.ops[i], sc.support()[wd.words[k]]});
        d.probs.push_back(po * wd.p[k]);
      }
    }
  }
  return d;
}

double LogLinearEditPolicy::stop_probability(const Document& x, const PolicyState& s) const {
  return Scorer(*this, x, s).p_stop();
}

double LogLinearEditPolicy::log_prob(const Document& x, const PolicyState& s, const EditAction& a) const {
  try {
    return Scorer(*this, x, s).log_prob(a, 0.0, nullptr);
  } catch (const std::domain_error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double LogLinearEditPolicy::weighted_log_likelihood(const Document& x, const PolicyState& s,
                                                    std::span<const EditAction> actions, double weight,
                                                    std::vector<double>* grad) const {
  if (grad && grad->size() != kDim) grad->assign(kDim, 0.0);
  Scorer sc(*this, x, s);
  double total = 0;
  for (const auto& a : actions) total += sc.log_prob(a, weight, grad);
  return weight * total;
}

std::string LogLinearEditPolicy::to_json() const {
  using nlohmann::json;
  json uni = json::object();
  for (const auto& [w, c] : stats_->unigram_counts()) uni[w] = c;
  json bi = json::array();
  for (const auto& [p, c] : stats_->bigram_counts()) bi.push_back(json::array({p.first, p.second, c}));
  json df = json::object();
  for (const auto& [w, c] : stats_->idf().doc_frequencies()) df[w] = c;
  json j{{"format", std::string(kFeatureVersion)},
         {"temperature", temperature_},
         {"weights", weights_},
         {"stats", {{"unigrams", uni}, {"bigrams", bi}, {"idf", {{"corpus_size", stats_->idf().corpus_size()}, {"df", df}}}}}};
  return j.dump(1);
}

LogLinearEditPolicy LogLinearEditPolicy::from_json(std::string_view text) {
  using nlohmann::json;
  const json j = json::parse(text);
  if (j.at("format").get<std::string>() != kFeatureVersion) {
    throw std::runtime_error("checkpoint feature map '" + j.at("format").get<std::string>() + "' is not " +
                             std::string(kFeatureVersion));
  }
  const json& st = j.at("stats");
  std::map<Token, std::size_t> uni;
  for (const auto& [w, c] : st.at("unigrams").items()) uni[w] = c.get<std::size_t>();
  std::map<std::pair<Token, Token>, std::size_t> bi;
  for (const auto& row : st.at("bigrams")) bi[{row.at(0).get<Token>(), row.at(1).get<Token>()}] = row.at(2).get<std::size_t>();
  std::unordered_map<Token, std::size_t> df;
  for (const auto& [w, c] : st.at("idf").at("df").items()) df[w] = c.get<std::size_t>();
  auto stats = std::make_shared<const CorpusStats>(std::move(uni), std::move(bi),
                                                   IdfTable(std::move(df), st.at("idf").at("corpus_size").get<std::size_t>()));
  LogLinearEditPolicy p(std::move(stats), j.at("temperature").get<double>());
  p.set_weights(j.at("weights").get<std::vector<double>>());
  return p;
}

void LogLinearEditPolicy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << to_json() << '\n';
}

LogLinearEditPolicy LogLinearEditPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace itg
