#pragma once

// Theorem-sequence prediction: features, a trainable interpolated
// unigram/bigram model, beam decoding, sequence union and matching degree.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/error.hpp"
#include "fgeo/knowledge_base.hpp"
#include "fgeo/problem.hpp"
#include "fgeo/rational.hpp"

namespace fgeo {

inline constexpr int kEndToken = 0;

struct FeatureVector {
  std::map<std::string, int> counts;     // every predicate head in the CDL, nested ones included
  std::map<std::string, int> relations;  // declared non-measure relations only
  bool goal_value = true;
  std::string goal_head;

  // Bucket identity: goal type, goal head and the relation bag.
  std::string signature() const {
    std::string out = goal_value ? "V|" : "R|";
    out += goal_head + "|";
    bool first = true;
    for (const auto& [h, n] : relations) {
      if (!first) out += ',';
      first = false;
      out += h + ":" + std::to_string(n);
    }
    return out;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

namespace detail {

inline void count_heads(const Term& t, const KnowledgeBase& kb, FeatureVector& fv) {
  if (!t.is_predicate()) return;
  ++fv.counts[t.head];
  const auto* s = kb.schema(t.head);
  if (s && !s->measure) ++fv.relations[t.head];
  for (const auto& a : t.args) count_heads(a, kb, fv);
}

}  // namespace detail

inline FeatureVector extract_features(const ProblemInstance& problem, const KnowledgeBase& kb) {
  FeatureVector fv;
  for (const auto& t : problem.all_conditions()) detail::count_heads(t, kb, fv);
  detail::count_heads(problem.goal.source, kb, fv);
  fv.goal_value = problem.goal.is_value();
  const Term& target = problem.goal.target;
  if (target.is_predicate()) {
    fv.goal_head = target.head;
  } else if (target.is_variable()) {
    fv.goal_head = "#variable";
  } else {
    fv.goal_head = "#number";
  }
  return fv;
}

struct Beam {
  std::vector<int> seq;
  double score = 0;  // summed natural-log probability
};

struct Prediction {
  std::vector<Beam> beams;
  std::vector<int> union_seq;
};

// Ranked sequences concatenated, first occurrence kept.
inline std::vector<int> union_sequences(const std::vector<Beam>& beams) {
  std::vector<int> out;
  std::set<int> seen;
  for (const auto& b : beams) {
    for (int c : b.seq) {
      if (seen.insert(c).second) out.push_back(c);
    }
  }
  return out;
}

// Share of annotated positions whose theorem appears anywhere in `predicted`.
inline Rational matching_degree(const std::vector<int>& predicted, const std::vector<int>& annotated) {
  if (annotated.empty()) throw EmptyAnnotation("annotated sequence is empty");
  const std::set<int> have(predicted.begin(), predicted.end());
  std::int64_t hit = 0;
  for (int c : annotated) hit += have.count(c) ? 1 : 0;
  return Rational(hit, static_cast<std::int64_t>(annotated.size()));
}

struct Bucket {
  FeatureVector features;         // relations, goal type and head of the bucket
  std::map<int, std::int64_t> counts;  // token -> occurrences (end token once per sequence)
  std::int64_t total = 0;
};

// P(y_n | y_{n-1}, bucket) = lambda * unigram(y_n | bucket) + (1 - lambda) * bigram(y_n | y_{n-1}),
// both add-alpha smoothed over the vocabulary (theorem codes plus the end token).
class SeqModel {
 public:
  static constexpr int kFormatVersion = 1;

  double alpha = 0.1;
  double lambda = 0.5;
  std::vector<int> codes;  // theorem codes, ascending
  std::map<std::string, Bucket> buckets;
  std::map<int, std::map<int, std::int64_t>> bigram;
  std::map<int, std::int64_t> bigram_totals;
  double train_nll = 0;
  double valid_nll = 0;

  std::size_t vocab_size() const { return codes.size() + 1; }

  std::vector<int> vocabulary() const {
    std::vector<int> v{kEndToken};
    v.insert(v.end(), codes.begin(), codes.end());
    return v;
  }

  // The training bucket used for a problem: its own signature if seen in
  // training, else the nearest one (relation-bag L1 distance, goal mismatch
  // weighted heavily; ties to the smaller signature).
  const Bucket* bucket_for(const FeatureVector& fv) const {
    if (buckets.empty()) return nullptr;
    auto it = buckets.find(fv.signature());
    if (it != buckets.end()) return &it->second;
    const Bucket* best = nullptr;
    long best_d = std::numeric_limits<long>::max();
    for (const auto& [sig, b] : buckets) {
      long d = 0;
      if (b.features.goal_value != fv.goal_value) d += 100;
      if (b.features.goal_head != fv.goal_head) d += 10;
      std::set<std::string> heads;
      for (const auto& [h, n] : b.features.relations) heads.insert(h);
      for (const auto& [h, n] : fv.relations) heads.insert(h);
      for (const auto& h : heads) {
        auto x = b.features.relations.find(h);
        auto y = fv.relations.find(h);
        const long nx = x == b.features.relations.end() ? 0 : x->second;
        const long ny = y == fv.relations.end() ? 0 : y->second;
        d += std::labs(nx - ny);
      }
      if (d < best_d) {
        best_d = d;
        best = &b;
      }
    }
    return best;
  }

  double prob(int token, int prev, const Bucket* bucket) const {
    const double v = static_cast<double>(vocab_size());
    double uni = 1.0 / v;
    if (bucket) {
      auto c = bucket->counts.find(token);
      const double n = c == bucket->counts.end() ? 0.0 : static_cast<double>(c->second);
      uni = (n + alpha) / (static_cast<double>(bucket->total) + alpha * v);
    }
    double n = 0, total = 0;
    if (auto row = bigram.find(prev); row != bigram.end()) {
      if (auto c = row->second.find(token); c != row->second.end()) n = static_cast<double>(c->second);
      total = static_cast<double>(bigram_totals.at(prev));
    }
    const double bi = (n + alpha) / (total + alpha * v);
    return lambda * uni + (1 - lambda) * bi;
  }

  double log_prob(int token, int prev, const Bucket* bucket) const { return std::log(prob(token, prev, bucket)); }

  // Mean over problems of the mean per-sequence loss, each sequence loss being
  // -(1/N) sum log P(y_i | y_{i-1}, bucket) over its N theorems.
  double nll(const std::vector<ProblemInstance>& problems, const KnowledgeBase& kb) const {
    double sum = 0;
    std::size_t counted = 0;
    for (const auto& p : problems) {
      if (p.annotated_sequences.empty()) continue;
      const Bucket* b = bucket_for(extract_features(p, kb));
      double per_problem = 0;
      for (const auto& seq : p.annotated_sequences) per_problem += sequence_nll(seq, b);
      sum += per_problem / static_cast<double>(p.annotated_sequences.size());
      ++counted;
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
  }

  double sequence_nll(const std::vector<int>& seq, const Bucket* b) const {
    if (seq.empty()) return 0;
    double s = 0;
    int prev = kEndToken;
    for (int c : seq) {
      s -= log_prob(c, prev, b);
      prev = c;
    }
    return s / static_cast<double>(seq.size());
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["alpha"] = alpha;
    j["lambda"] = lambda;
    j["codes"] = codes;
    j["train_nll"] = train_nll;
    j["valid_nll"] = valid_nll;
    nlohmann::json bs = nlohmann::json::array();
    for (const auto& [sig, b] : buckets) {
      nlohmann::json counts = nlohmann::json::object();
      for (const auto& [t, n] : b.counts) counts[std::to_string(t)] = n;
      bs.push_back({{"signature", sig},
                    {"goal_value", b.features.goal_value},
                    {"goal_head", b.features.goal_head},
                    {"relations", b.features.relations},
                    {"counts", counts}});
    }
    j["buckets"] = bs;
    nlohmann::json bg = nlohmann::json::object();
    for (const auto& [prev, row] : bigram) {
      nlohmann::json r = nlohmann::json::object();
      for (const auto& [t, n] : row) r[std::to_string(t)] = n;
      bg[std::to_string(prev)] = r;
    }
    j["bigram"] = bg;
    return j;
  }

  static SeqModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format_version").get<int>() != kFormatVersion) throw SchemaError("unsupported model format_version");
      SeqModel m;
      m.alpha = j.at("alpha").get<double>();
      m.lambda = j.at("lambda").get<double>();
      m.codes = j.at("codes").get<std::vector<int>>();
      m.train_nll = j.value("train_nll", 0.0);
      m.valid_nll = j.value("valid_nll", 0.0);
      for (const auto& b : j.at("buckets")) {
        Bucket bucket;
        bucket.features.goal_value = b.at("goal_value").get<bool>();
        bucket.features.goal_head = b.at("goal_head").get<std::string>();
        bucket.features.relations = b.at("relations").get<std::map<std::string, int>>();
        for (const auto& [t, n] : b.at("counts").items()) {
          bucket.counts[std::stoi(t)] = n.get<std::int64_t>();
          bucket.total += n.get<std::int64_t>();
        }
        m.buckets.emplace(b.at("signature").get<std::string>(), std::move(bucket));
      }
      for (const auto& [prev, row] : j.at("bigram").items()) {
        for (const auto& [t, n] : row.items()) {
          m.bigram[std::stoi(prev)][std::stoi(t)] = n.get<std::int64_t>();
          m.bigram_totals[std::stoi(prev)] += n.get<std::int64_t>();
        }
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed model: ") + e.what());
    } catch (const std::invalid_argument&) {
      throw SchemaError("malformed model: non-numeric token key");
    }
  }

  friend bool operator==(const SeqModel& a, const SeqModel& b) { return a.to_json() == b.to_json(); }
};

struct TrainOptions {
  double alpha = 0.1;
  std::optional<double> lambda;  // fixed; otherwise picked from `grid` on the validation split
  std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

// Count tables only; lambda left at its default.
inline SeqModel count_model(const std::vector<ProblemInstance>& train, const KnowledgeBase& kb, double alpha) {
  SeqModel m;
  m.alpha = alpha;
  m.codes = kb.codes();
  std::sort(m.codes.begin(), m.codes.end());
  bool any = false;
  for (const auto& p : train) {
    if (p.annotated_sequences.empty()) continue;
    const FeatureVector fv = extract_features(p, kb);
    Bucket& b = m.buckets[fv.signature()];
    b.features.relations = fv.relations;
    b.features.goal_value = fv.goal_value;
    b.features.goal_head = fv.goal_head;
    for (const auto& seq : p.annotated_sequences) {
      if (seq.empty()) continue;
      any = true;
      int prev = kEndToken;
      for (int c : seq) {
        ++b.counts[c];
        ++b.total;
        ++m.bigram[prev][c];
        ++m.bigram_totals[prev];
        prev = c;
      }
      ++b.counts[kEndToken];
      ++b.total;
      ++m.bigram[prev][kEndToken];
      ++m.bigram_totals[prev];
    }
  }
  if (!any) throw EmptyTrainingSet("no annotated sequences in the training split");
  return m;
}

inline SeqModel train_predictor(const std::vector<ProblemInstance>& train, const std::vector<ProblemInstance>& valid,
                                const KnowledgeBase& kb, const TrainOptions& opt = {}) {
  if (!(opt.alpha > 0)) throw SchemaError("alpha must be positive");
  SeqModel m = count_model(train, kb, opt.alpha);
  if (opt.lambda) {
    if (*opt.lambda < 0 || *opt.lambda > 1) throw SchemaError("lambda must lie in [0,1]");
    m.lambda = *opt.lambda;
  } else {
    double best = std::numeric_limits<double>::infinity();
    double best_lambda = opt.grid.empty() ? 0.5 : opt.grid.front();
    const auto& select_on = valid.empty() ? train : valid;
    for (double l : opt.grid) {
      m.lambda = l;
      const double v = m.nll(select_on, kb);
      if (v < best) {
        best = v;
        best_lambda = l;
      }
    }
    m.lambda = best_lambda;
  }
  m.train_nll = m.nll(train, kb);
  m.valid_nll = m.nll(valid, kb);
  return m;
}

// NLL of the model that puts probability 1/V on every token.
inline double uniform_nll(std::size_t vocab_size) { return std::log(static_cast<double>(vocab_size)); }

namespace detail {

inline bool beam_before(const Beam& a, const Beam& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.seq < b.seq;
}

}  // namespace detail

// Top-k beam search. A prefix finishes on the end token (not allowed as the
// first token) or when it reaches max_len.
inline std::vector<Beam> beam_decode(const SeqModel& model, const FeatureVector& features, std::size_t k,
                                     std::size_t max_len) {
  if (k < 1 || max_len < 1) throw SchemaError("beam size and max length must be at least 1");
  const Bucket* bucket = model.bucket_for(features);
  std::vector<Beam> live{Beam{}};
  std::vector<Beam> finished;
  for (std::size_t step = 1; step <= max_len && !live.empty(); ++step) {
    std::vector<Beam> next;
    for (const auto& h : live) {
      const int prev = h.seq.empty() ? kEndToken : h.seq.back();
      for (int t : model.vocabulary()) {
        if (t == kEndToken && step == 1) continue;
        const double s = h.score + model.log_prob(t, prev, bucket);
        if (t == kEndToken) {
          finished.push_back(Beam{h.seq, s});
          continue;
        }
        Beam nh{h.seq, s};
        nh.seq.push_back(t);
        if (step == max_len) {
          finished.push_back(std::move(nh));
        } else {
          next.push_back(std::move(nh));
        }
      }
    }
    std::sort(next.begin(), next.end(), detail::beam_before);
    if (next.size() > k) next.resize(k);
    live = std::move(next);
    std::sort(finished.begin(), finished.end(), detail::beam_before);
    // Scores only decrease with length, so no live prefix can overtake the
    // k-th finished sequence once it falls below it.
    if (finished.size() >= k && !live.empty() && live.front().score < finished[k - 1].score) break;
  }
  std::sort(finished.begin(), finished.end(), detail::beam_before);
  if (finished.size() > k) finished.resize(k);
  for (std::size_t i = 0; finished.size() < k && i < live.size(); ++i) finished.push_back(live[i]);
  return finished;
}

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual Prediction predict(const ProblemInstance& problem) const = 0;
};

// Emits the problem's first annotated sequence.
class OraclePredictor : public Predictor {
 public:
  std::string name() const override { return "oracle"; }
  Prediction predict(const ProblemInstance& problem) const override {
    if (problem.annotated_sequences.empty() || problem.annotated_sequences.front().empty()) {
      throw MissingAnnotation("problem " + std::to_string(problem.id) + " has no annotated sequence");
    }
    Prediction p;
    p.beams.push_back(Beam{problem.annotated_sequences.front(), 0});
    p.union_seq = union_sequences(p.beams);
    return p;
  }
};

// The L most frequent training theorems, L the rounded mean sequence length.
class FrequencyPredictor : public Predictor {
 public:
  explicit FrequencyPredictor(const std::vector<ProblemInstance>& train) {
    std::map<int, std::int64_t> freq;
    std::int64_t total_len = 0, seqs = 0;
    for (const auto& p : train) {
      for (const auto& s : p.annotated_sequences) {
        for (int c : s) ++freq[c];
        total_len += static_cast<std::int64_t>(s.size());
        ++seqs;
      }
    }
    if (seqs == 0) throw EmptyTrainingSet("no annotated sequences in the training split");
    std::vector<std::pair<int, std::int64_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const auto len = static_cast<std::size_t>(std::llround(static_cast<double>(total_len) / static_cast<double>(seqs)));
    for (std::size_t i = 0; i < ranked.size() && i < std::max<std::size_t>(len, 1); ++i) seq_.push_back(ranked[i].first);
  }
  std::string name() const override { return "freq"; }
  Prediction predict(const ProblemInstance&) const override {
    Prediction p;
    p.beams.push_back(Beam{seq_, 0});
    p.union_seq = seq_;
    return p;
  }
  const std::vector<int>& sequence() const { return seq_; }

 private:
  std::vector<int> seq_;
};

class ModelPredictor : public Predictor {
 public:
  ModelPredictor(std::shared_ptr<const SeqModel> model, const KnowledgeBase& kb, std::size_t k = 5,
                 std::size_t max_len = 20)
      : model_(std::move(model)), kb_(&kb), k_(k), max_len_(max_len) {}
  std::string name() const override { return "model"; }
  Prediction predict(const ProblemInstance& problem) const override {
    Prediction p;
    p.beams = beam_decode(*model_, extract_features(problem, *kb_), k_, max_len_);
    p.union_seq = union_sequences(p.beams);
    return p;
  }
  const SeqModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SeqModel> model_;
  const KnowledgeBase* kb_;
  std::size_t k_;
  std::size_t max_len_;
};

// The same sequence for every problem.
class FixedPredictor : public Predictor {
 public:
  explicit FixedPredictor(std::vector<int> seq, std::string label = "fixed")
      : seq_(std::move(seq)), label_(std::move(label)) {}
  std::string name() const override { return label_; }
  Prediction predict(const ProblemInstance&) const override {
    Prediction p;
    p.beams.push_back(Beam{seq_, 0});
    p.union_seq = union_sequences(p.beams);
    return p;
  }

 private:
  std::vector<int> seq_;
  std::string label_;
};

class EmptyPredictor : public Predictor {
 public:
  std::string name() const override { return "empty"; }
  Prediction predict(const ProblemInstance&) const override { return {}; }
};

struct PredictorScore {
  int problem_id = 0;
  Rational degree;
};

struct PredictorEvaluation {
  Rational average;   // percent
  Rational complete;  // percent
  std::vector<PredictorScore> per_problem;
};

// Matching degree against each problem's first annotated sequence.
inline PredictorEvaluation evaluate_predictor(const Predictor& predictor, const std::vector<ProblemInstance>& test) {
  PredictorEvaluation out;
  Rational sum, full;
  std::int64_t n = 0;
  for (const auto& p : test) {
    if (p.annotated_sequences.empty()) continue;
    const Rational d = matching_degree(predictor.predict(p).union_seq, p.annotated_sequences.front());
    out.per_problem.push_back({p.id, d});
    sum += d;
    if (d == Rational(1)) full += Rational(1);
    ++n;
  }
  if (n > 0) {
    out.average = sum * Rational(100) / Rational(n);
    out.complete = full * Rational(100) / Rational(n);
  }
  return out;
}

}  // namespace fgeo
