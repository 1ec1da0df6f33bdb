#include "cograph/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cograph/errors.hpp"
#include "cograph/optim.hpp"

namespace cograph {

void LabeledGraphSet::add(const HeweGraph* graph, std::string doc_id,
                          std::string label) {
  if (graph == nullptr) throw Error("LabeledGraphSet: null graph");
  if (label.empty()) throw DataError("LabeledGraphSet: empty label for " + doc_id);
  class_index[label].push_back(items.size());
  items.push_back({graph, std::move(doc_id), std::move(label)});
}

std::vector<std::string> LabeledGraphSet::classes_with_at_least(std::size_t n) const {
  std::vector<std::string> out;
  for (const auto& [label, ids] : class_index) {
    if (ids.size() >= n) out.push_back(label);
  }
  return out;
}

std::pair<LabeledGraphSet, LabeledGraphSet> split_validation(
    const LabeledGraphSet& data, double val_ratio, std::uint64_t seed) {
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw ConfigError("split_validation: val_ratio must lie in [0, 1)");
  }
  LabeledGraphSet train, val;
  train.split = SplitTag::Train;
  val.split = SplitTag::Validation;

  std::size_t class_rank = 0;
  for (const auto& [label, ids] : data.class_index) {
    const std::size_t n_val = static_cast<std::size_t>(
        val_ratio * static_cast<double>(ids.size()));
    Rng rng(derive_seed(seed, "valsplit", class_rank++));
    const std::vector<std::size_t> picks = rng.sample_indices(ids.size(), n_val);
    std::set<std::size_t> val_local(picks.begin(), picks.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const LabeledGraphSet::Item& item = data.items[ids[i]];
      (val_local.count(i) != 0 ? val : train).add(item.graph, item.doc_id, item.label);
    }
  }
  return {train, val};
}

EpisodeStrategy parse_strategy(const std::string& name) {
  if (name == "random") return EpisodeStrategy::Random;
  if (name == "on_top") return EpisodeStrategy::OnTop;
  throw ConfigError("unknown episode strategy '" + name +
                    "' (expected random or on_top)");
}

std::string strategy_name(EpisodeStrategy s) {
  return s == EpisodeStrategy::Random ? "random" : "on_top";
}

Episode sample_episode(const LabeledGraphSet& data, std::size_t C, std::size_t K,
                       std::size_t L, EpisodeStrategy strategy, Rng& rng) {
  if (C == 0 || K == 0 || L == 0) {
    throw DomainError("sample_episode: C, K and L must be positive");
  }
  const std::vector<std::string> eligible = data.classes_with_at_least(K + 1);
  if (eligible.size() < C) {
    throw DataError("sample_episode: need " + std::to_string(C) +
                    " classes with >= " + std::to_string(K + 1) +
                    " instances, only " + std::to_string(eligible.size()) +
                    " eligible");
  }

  Episode ep;
  if (strategy == EpisodeStrategy::Random) {
    for (std::size_t i : rng.sample_indices(eligible.size(), C)) {
      ep.classes.push_back(eligible[i]);
    }
  } else {
    // Most frequent first; ties resolved by name so the choice is stable.
    std::vector<std::string> ranked = eligible;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const std::string& a, const std::string& b) {
                       return data.class_index.at(a).size() >
                              data.class_index.at(b).size();
                     });
    ep.classes.assign(ranked.begin(), ranked.begin() + static_cast<long>(C));
  }

  // One graph appears at most once per episode, even when indexed under
  // several labels.
  std::set<const HeweGraph*> used;
  for (const std::string& cls : ep.classes) {
    const std::vector<std::size_t>& ids = data.class_index.at(cls);
    std::vector<std::size_t> available;
    for (std::size_t id : ids) {
      if (used.count(data.items[id].graph) == 0) available.push_back(id);
    }
    if (available.size() < K + 1) {
      throw DataError("sample_episode: class " + cls + " has only " +
                      std::to_string(available.size()) +
                      " free instances, need " + std::to_string(K + 1));
    }
    const std::size_t take = std::min(K + L, available.size());
    std::vector<std::size_t> support, query;
    std::size_t drawn = 0;
    for (std::size_t i : rng.sample_indices(available.size(), take)) {
      (drawn++ < K ? support : query).push_back(available[i]);
      used.insert(data.items[available[i]].graph);
    }
    ep.support.push_back(std::move(support));
    ep.query.push_back(std::move(query));
  }
  return ep;
}

PredictorParams PredictorParams::init(std::size_t out_dim, double radius, Rng& rng) {
  // Start at the prototype-distance solution (first half 1, second half -1/2
  // makes the scores equal -||g_q - p||^2 / 2 up to a per-query constant that
  // softmax ignores), jittered so training can break symmetry in either half.
  PredictorParams p;
  std::vector<double> w(2 * out_dim);
  for (std::size_t k = 0; k < out_dim; ++k)
    w[k] = 1.0 + rng.uniform(-radius, radius);
  for (std::size_t k = out_dim; k < 2 * out_dim; ++k)
    w[k] = -0.5 + rng.uniform(-radius, radius);
  const std::size_t n = w.size();
  p.wc = Tensor::param({n}, std::move(w));
  return p;
}

PredictorParams PredictorParams::zeros(std::size_t out_dim) {
  PredictorParams p;
  p.wc = Tensor::zeros_param({2 * out_dim});
  return p;
}

void PredictorParams::save_into(Checkpoint& ckpt) const {
  ckpt.put("predictor.wc", wc);
}

PredictorParams PredictorParams::from_checkpoint(const Checkpoint& ckpt) {
  PredictorParams p;
  p.wc = ckpt.take_param("predictor.wc");
  return p;
}

std::vector<Tensor> compute_prototypes(
    const std::vector<std::vector<Tensor>>& support_by_class) {
  std::vector<Tensor> protos;
  for (std::size_t c = 0; c < support_by_class.size(); ++c) {
    if (support_by_class[c].empty()) {
      throw DomainError("compute_prototypes: class " + std::to_string(c) +
                        " has no support embeddings");
    }
    protos.push_back(mean_rows(stack_rows(support_by_class[c])));
  }
  return protos;
}

Tensor query_scores(const Tensor& g_q, const std::vector<Tensor>& prototypes,
                    const PredictorParams& predictor) {
  if (prototypes.empty()) throw DomainError("query_scores: no prototypes");
  if (predictor.wc.size() != 2 * g_q.size()) {
    throw ShapeError("query_scores: predictor expects dim " +
                     std::to_string(predictor.wc.size() / 2) + ", query has " +
                     std::to_string(g_q.size()));
  }
  // The first half of wc weights the per-dimension query/prototype match,
  // the second half the prototype energy. A row acting on the plain
  // concatenation (g_q ∥ p) cannot rank classes by query: its g_q term is
  // shared by all classes and cancels under softmax. With (g_q ⊙ p ∥ p ⊙ p)
  // the weights can express the negated squared distance to each prototype
  // (-2·g_q·p + |p|², the |g_q|² part being class-constant), so a shared
  // offset direction in the embeddings cancels out of the score differences.
  std::vector<Tensor> scores;
  for (const Tensor& p : prototypes) {
    scores.push_back(dot(predictor.wc, concat(mul(g_q, p), mul(p, p))));
  }
  return stack_scalars(scores);
}

Prediction predict(const Tensor& g_q, const std::vector<Tensor>& prototypes,
                   const PredictorParams& predictor) {
  const Tensor scores = query_scores(g_q, prototypes, predictor);
  const std::vector<double>& s = scores.values();

  Prediction out;
  double hi = s[0];
  for (double v : s) hi = std::max(hi, v);
  double z = 0.0;
  for (double v : s) z += std::exp(v - hi);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.probabilities.push_back(std::exp(s[i] - hi) / z);
    out.sigmoids.push_back(1.0 / (1.0 + std::exp(-s[i])));
    if (s[i] > s[out.predicted]) out.predicted = i;
  }
  return out;
}

namespace {

// Support embeddings per class, items in ascending id order so prototype
// summation order is canonical.
std::vector<std::vector<Tensor>> encode_support(const LabeledGraphSet& data,
                                                const Episode& ep,
                                                const EncoderParams& encoder) {
  std::vector<std::vector<Tensor>> by_class;
  for (const std::vector<std::size_t>& ids : ep.support) {
    std::vector<std::size_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::vector<Tensor> embs;
    for (std::size_t id : sorted) {
      embs.push_back(encode(*data.items[id].graph, encoder).g);
    }
    by_class.push_back(std::move(embs));
  }
  return by_class;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

Tensor episode_loss(const LabeledGraphSet& data, const Episode& episode,
                    const EncoderParams& encoder, const PredictorParams& predictor) {
  const std::vector<Tensor> protos =
      compute_prototypes(encode_support(data, episode, encoder));

  std::vector<Tensor> losses;
  for (std::size_t c = 0; c < episode.classes.size(); ++c) {
    std::vector<std::size_t> sorted = episode.query[c];
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t id : sorted) {
      const Tensor g_q = encode(*data.items[id].graph, encoder).g;
      const Tensor scores = query_scores(g_q, protos, predictor);
      losses.push_back(sub(logsumexp(scores), pick_index(scores, c)));
    }
  }
  if (losses.empty()) throw DataError("episode_loss: episode has no query items");
  return mul_scalar(sum(stack_scalars(losses)),
                    1.0 / static_cast<double>(losses.size()));
}

FewshotConfig FewshotConfig::from_kv(const KvConfig& kv) {
  FewshotConfig c;
  auto sz = [&](const char* key, std::size_t dflt) {
    const std::int64_t v = kv.get_int(key, static_cast<std::int64_t>(dflt));
    if (v < 0) throw ConfigError(std::string("fewshot: ") + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.C = sz("C", c.C);
  c.K = sz("K", c.K);
  c.L = sz("L", c.L);
  c.episode_batch = sz("episode_batch", c.episode_batch);
  c.epochs = sz("fewshot_epochs", c.epochs);
  c.lr = kv.get_double("fewshot_lr", c.lr);
  c.val_episodes = sz("val_episodes", c.val_episodes);
  c.val_ratio = kv.get_double("val_ratio", c.val_ratio);
  c.strategy = parse_strategy(kv.get_string("strategy", strategy_name(c.strategy)));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.validate();
  return c;
}

void FewshotConfig::validate() const {
  if (C == 0 || K == 0 || L == 0) {
    throw ConfigError("fewshot: C, K and L must be positive");
  }
  if (episode_batch == 0) throw ConfigError("fewshot: episode_batch must be positive");
  if (!(lr > 0.0)) throw ConfigError("fewshot: fewshot_lr must be positive");
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw ConfigError("fewshot: val_ratio must lie in [0, 1)");
  }
}

namespace {

double validation_accuracy(const LabeledGraphSet& val, const FewshotConfig& cfg,
                           std::size_t epoch, const EncoderParams& encoder,
                           const PredictorParams& predictor) {
  std::vector<double> accs;
  for (std::size_t i = 0; i < cfg.val_episodes; ++i) {
    Rng rng(derive_seed(cfg.seed, "val-episode", epoch, i));
    const Episode ep = sample_episode(val, cfg.C, cfg.K, cfg.L, cfg.strategy, rng);
    const std::vector<Tensor> protos =
        compute_prototypes(encode_support(val, ep, encoder));
    std::size_t correct = 0, total = 0;
    for (std::size_t c = 0; c < ep.classes.size(); ++c) {
      for (std::size_t id : ep.query[c]) {
        const Tensor g_q = encode(*val.items[id].graph, encoder).g;
        if (predict(g_q, protos, predictor).predicted == c) ++correct;
        ++total;
      }
    }
    accs.push_back(total > 0 ? static_cast<double>(correct) /
                                   static_cast<double>(total)
                             : 0.0);
  }
  return mean_of(accs);
}

Checkpoint snapshot(const EncoderParams& encoder, const PredictorParams& predictor) {
  Checkpoint ckpt;
  encoder.save_into(ckpt);
  predictor.save_into(ckpt);
  return ckpt;
}

}  // namespace

TrainResult train_fewshot(const LabeledGraphSet& data, const FewshotConfig& cfg,
                          EncoderParams& encoder, PredictorParams& predictor) {
  cfg.validate();
  auto [train_part, val_part] =
      split_validation(data, cfg.val_ratio, derive_seed(cfg.seed, "valsplit"));
  if (train_part.classes_with_at_least(cfg.K + 1).size() < cfg.C) {
    throw DataError("train_fewshot: training part lacks " + std::to_string(cfg.C) +
                    " classes with >= " + std::to_string(cfg.K + 1) + " instances");
  }
  const bool have_val =
      cfg.val_episodes > 0 &&
      val_part.classes_with_at_least(cfg.K + 1).size() >= cfg.C;

  std::vector<Tensor> params = encoder.parameters();
  for (const Tensor& t : predictor.parameters()) params.push_back(t);
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  Adam opt(params, adam_cfg);

  TrainResult result;
  result.best = snapshot(encoder, predictor);
  result.best_val_acc =
      have_val ? validation_accuracy(val_part, cfg, 0, encoder, predictor) : 0.0;
  result.best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Tensor> episode_losses;
    for (std::size_t b = 0; b < cfg.episode_batch; ++b) {
      Rng rng(derive_seed(cfg.seed, "train-episode", epoch, b));
      const Episode ep =
          sample_episode(train_part, cfg.C, cfg.K, cfg.L, cfg.strategy, rng);
      episode_losses.push_back(episode_loss(train_part, ep, encoder, predictor));
    }
    const Tensor loss =
        mul_scalar(sum(stack_scalars(episode_losses)),
                   1.0 / static_cast<double>(episode_losses.size()));
    if (!std::isfinite(loss.item())) {
      throw Error("train_fewshot: non-finite loss at epoch " + std::to_string(epoch));
    }
    backward(loss);
    opt.step();

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.loss = loss.item();
    entry.val_acc =
        have_val ? validation_accuracy(val_part, cfg, epoch, encoder, predictor) : 0.0;
    entry.is_best = have_val ? entry.val_acc > result.best_val_acc
                             : epoch == cfg.epochs;
    if (entry.is_best) {
      result.best = snapshot(encoder, predictor);
      result.best_val_acc = entry.val_acc;
      result.best_epoch = epoch;
    }
    result.log.push_back(entry);
  }
  return result;
}

EvalReport evaluate_with(const LabeledGraphSet& data, const FewshotConfig& cfg,
                         std::size_t n_episodes, const EncoderParams& encoder,
                         const QueryClassifier& classify) {
  if (n_episodes == 0) throw DomainError("evaluate: n_episodes must be positive");
  EvalReport report;
  std::vector<double> accs, precs, recs, f1s;
  std::vector<int> local_classes;
  for (std::size_t c = 0; c < cfg.C; ++c) local_classes.push_back(static_cast<int>(c));

  for (std::size_t i = 0; i < n_episodes; ++i) {
    Rng rng(derive_seed(cfg.seed, "eval-episode", i));
    const Episode ep = sample_episode(data, cfg.C, cfg.K, cfg.L, cfg.strategy, rng);
    const std::vector<Tensor> protos =
        compute_prototypes(encode_support(data, ep, encoder));

    std::vector<int> preds, golds;
    for (std::size_t c = 0; c < ep.classes.size(); ++c) {
      std::vector<std::size_t> sorted = ep.query[c];
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t id : sorted) {
        const Tensor g_q = encode(*data.items[id].graph, encoder).g;
        preds.push_back(static_cast<int>(classify(g_q, protos, ep, id)));
        golds.push_back(static_cast<int>(c));
      }
    }
    EpisodeRecord rec;
    rec.metrics = macro_metrics(preds, golds, local_classes);
    rec.n_queries = preds.size();
    accs.push_back(rec.metrics.acc);
    precs.push_back(rec.metrics.precision);
    recs.push_back(rec.metrics.recall);
    f1s.push_back(rec.metrics.f1);
    report.episodes.push_back(rec);
  }

  report.mean = {mean_of(accs), mean_of(precs), mean_of(recs), mean_of(f1s)};
  report.stderr_ = {stderr_of(accs), stderr_of(precs), stderr_of(recs),
                    stderr_of(f1s)};
  return report;
}

EvalReport evaluate(const LabeledGraphSet& data, const FewshotConfig& cfg,
                    std::size_t n_episodes, const EncoderParams& encoder,
                    const PredictorParams& predictor) {
  return evaluate_with(
      data, cfg, n_episodes, encoder,
      [&](const Tensor& g_q, const std::vector<Tensor>& protos, const Episode&,
          std::size_t) { return predict(g_q, protos, predictor).predicted; });
}

}  // namespace cograph
