#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cograph/checkpoint.hpp"
#include "cograph/config.hpp"
#include "cograph/encoder.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/metrics.hpp"
#include "cograph/rng.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

enum class SplitTag { Train, Validation, Test };

// Episodic view of a graph collection. A document with several labels is
// indexed once per label; episode sampling still never places one graph in
// both support and query of the same episode.
struct LabeledGraphSet {
  struct Item {
    const HeweGraph* graph = nullptr;
    std::string doc_id;
    std::string label;
  };

  std::vector<Item> items;
  std::map<std::string, std::vector<std::size_t>> class_index;  // label -> item ids
  SplitTag split = SplitTag::Train;

  void add(const HeweGraph* graph, std::string doc_id, std::string label);
  // Class names (sorted) whose item count is >= n.
  std::vector<std::string> classes_with_at_least(std::size_t n) const;
};

// Instance-level class split: about `val_ratio` of each class's items move to
// the validation part; the rest stay in the training part.
std::pair<LabeledGraphSet, LabeledGraphSet> split_validation(
    const LabeledGraphSet& data, double val_ratio, std::uint64_t seed);

enum class EpisodeStrategy { Random, OnTop };
EpisodeStrategy parse_strategy(const std::string& name);
std::string strategy_name(EpisodeStrategy s);

// Class ids are episode-local: position in `classes`.
struct Episode {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> support;  // [C][K] item indices
  std::vector<std::vector<std::size_t>> query;    // [C][<=L]
};

Episode sample_episode(const LabeledGraphSet& data, std::size_t C, std::size_t K,
                       std::size_t L, EpisodeStrategy strategy, Rng& rng);

// Row weights of length 2·d applied to (g_q ⊙ p_c ∥ p_c ⊙ p_c): a learned
// per-dimension match between query and prototype plus a prototype-energy
// term; at init the weights encode the negated squared prototype distance.
struct PredictorParams {
  Tensor wc;

  static PredictorParams init(std::size_t out_dim, double radius, Rng& rng);
  static PredictorParams zeros(std::size_t out_dim);
  std::vector<Tensor> parameters() const { return {wc}; }
  std::size_t out_dim() const { return wc.size() / 2; }

  void save_into(Checkpoint& ckpt) const;
  static PredictorParams from_checkpoint(const Checkpoint& ckpt);
};

// p_c = mean of the class's support embeddings.
std::vector<Tensor> compute_prototypes(
    const std::vector<std::vector<Tensor>>& support_by_class);

// Raw scores s_c = wc · (g_q ⊙ p_c ∥ p_c ⊙ p_c), shape [C].
Tensor query_scores(const Tensor& g_q, const std::vector<Tensor>& prototypes,
                    const PredictorParams& predictor);

struct Prediction {
  std::vector<double> probabilities;  // softmax over raw scores
  std::vector<double> sigmoids;       // per-class diagnostic view
  std::size_t predicted = 0;          // argmax, lowest index on ties
};

Prediction predict(const Tensor& g_q, const std::vector<Tensor>& prototypes,
                   const PredictorParams& predictor);

// Mean cross-entropy of the true class over all query items.
Tensor episode_loss(const LabeledGraphSet& data, const Episode& episode,
                    const EncoderParams& encoder, const PredictorParams& predictor);

struct FewshotConfig {
  std::size_t C = 5;
  std::size_t K = 5;
  std::size_t L = 15;
  std::size_t episode_batch = 64;
  std::size_t epochs = 300;
  double lr = 0.001;
  std::size_t val_episodes = 200;
  double val_ratio = 0.3;  // 7:3 train/validation carve-out
  EpisodeStrategy strategy = EpisodeStrategy::Random;
  std::uint64_t seed = 7;

  static FewshotConfig from_kv(const KvConfig& kv);
  void validate() const;
};

struct TrainLogEntry {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_acc = 0.0;
  bool is_best = false;
};

struct TrainResult {
  Checkpoint best;  // encoder.* plus predictor.wc at the best validation epoch
  std::vector<TrainLogEntry> log;
  double best_val_acc = 0.0;
  std::size_t best_epoch = 0;
};

// Optimizes encoder and predictor in place; returns the best checkpoint by
// validation accuracy. Pass epochs = 0 to snapshot the inputs untouched.
TrainResult train_fewshot(const LabeledGraphSet& data, const FewshotConfig& cfg,
                          EncoderParams& encoder, PredictorParams& predictor);

// Maps a query embedding to an episode-local class. The episode and item
// index let test doubles recover the gold label; real classifiers only need
// the embedding and prototypes.
using QueryClassifier = std::function<std::size_t(
    const Tensor& g_q, const std::vector<Tensor>& prototypes,
    const Episode& episode, std::size_t item)>;

struct EpisodeRecord {
  MacroMetrics metrics;
  std::size_t n_queries = 0;
};

struct EvalReport {
  std::vector<EpisodeRecord> episodes;
  MacroMetrics mean;
  MacroMetrics stderr_;  // standard error of the per-episode means
};

EvalReport evaluate_with(const LabeledGraphSet& data, const FewshotConfig& cfg,
                         std::size_t n_episodes, const EncoderParams& encoder,
                         const QueryClassifier& classify);
EvalReport evaluate(const LabeledGraphSet& data, const FewshotConfig& cfg,
                    std::size_t n_episodes, const EncoderParams& encoder,
                    const PredictorParams& predictor);

}  // namespace cograph
