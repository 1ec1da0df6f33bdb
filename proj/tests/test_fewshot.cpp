#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cograph/encoder.hpp"
#include "cograph/errors.hpp"
#include "cograph/fewshot.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/rng.hpp"
#include "doctest.h"
#include "support/fd.hpp"

using namespace cograph;

namespace {

// Star graphs over distinct word features: cheap but structurally valid.
HeweGraph tiny_graph(std::uint32_t first_word_feature, std::size_t n_words) {
  HeweGraph g;
  g.n = 1 + n_words;
  g.central = 0;
  g.roles.assign(g.n, NodeRole::Word);
  g.roles[0] = NodeRole::Ehr;
  g.feature_ids.push_back(0);
  for (std::size_t w = 0; w < n_words; ++w) {
    g.feature_ids.push_back(first_word_feature + static_cast<std::uint32_t>(w));
    g.edges.emplace_back(0, static_cast<std::uint32_t>(w + 1));
  }
  g.validate();
  return g;
}

// A pool of graphs per class; class k draws words from its own feature band,
// so classes are separable by construction.
struct Fixture {
  std::vector<HeweGraph> graphs;
  LabeledGraphSet data;
  std::size_t vocab = 0;

  Fixture(const std::vector<std::pair<std::string, std::size_t>>& class_sizes,
          std::uint64_t seed = 5, std::size_t words_per_graph = 3,
          std::size_t band = 6) {
    Rng rng(seed);
    std::size_t total = 0;
    for (const auto& [cls, n] : class_sizes) {
      (void)cls;
      total += n;
    }
    graphs.reserve(total);  // stable addresses for LabeledGraphSet pointers
    std::size_t cls_idx = 0, doc = 0;
    for (const auto& [cls, n] : class_sizes) {
      for (std::size_t i = 0; i < n; ++i, ++doc) {
        const std::uint32_t base =
            1 + static_cast<std::uint32_t>(cls_idx * band + rng.below(band - words_per_graph + 1));
        graphs.push_back(tiny_graph(base, words_per_graph));
        data.add(&graphs.back(), "d" + std::to_string(doc), cls);
      }
      ++cls_idx;
    }
    vocab = 1 + class_sizes.size() * band;
  }
};

EncoderParams toy_encoder(std::size_t vocab, std::uint64_t seed, std::size_t d = 4) {
  Rng rng(seed);
  EncoderDims dims;
  dims.embed = d;
  dims.hidden0 = 3;
  dims.hidden1 = d;
  EncoderParams enc = EncoderParams::init(vocab, dims, 0.4, rng);
  enc.b0 = Tensor::param({3}, {0.3, 0.4, 0.35});
  enc.b1 = Tensor::param({static_cast<std::size_t>(d)}, std::vector<double>(d, 0.3));
  return enc;
}

Tensor vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor::param({n}, std::move(v));
}

}  // namespace

TEST_CASE("fewshot: episode counts for C=5 K=5 L=15") {
  Fixture fx({{"a", 25}, {"b", 25}, {"c", 25}, {"d", 25}, {"e", 25}, {"f", 25}});
  Rng rng(1);
  const Episode ep = sample_episode(fx.data, 5, 5, 15, EpisodeStrategy::Random, rng);
  REQUIRE(ep.classes.size() == 5);
  CHECK(std::set<std::string>(ep.classes.begin(), ep.classes.end()).size() == 5);
  std::size_t n_support = 0, n_query = 0;
  for (const auto& s : ep.support) n_support += s.size();
  for (const auto& q : ep.query) n_query += q.size();
  CHECK(n_support == 25);
  CHECK(n_query == 75);
}

TEST_CASE("fewshot: class at the K+1 boundary yields one query item") {
  Fixture fx({{"a", 6}, {"b", 6}, {"c", 6}});
  Rng rng(2);
  const Episode ep = sample_episode(fx.data, 3, 5, 15, EpisodeStrategy::Random, rng);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(ep.support[c].size() == 5);
    CHECK(ep.query[c].size() == 1);
  }
}

TEST_CASE("fewshot: on_top picks the most frequent classes") {
  // names deliberately ordered against the counts
  Fixture fx({{"zz", 50}, {"a", 40}, {"mm", 30}, {"q", 20}, {"b", 10}, {"x", 5}});
  Rng rng(3);
  const Episode ep = sample_episode(fx.data, 3, 4, 5, EpisodeStrategy::OnTop, rng);
  const std::set<std::string> got(ep.classes.begin(), ep.classes.end());
  CHECK(got == std::set<std::string>{"zz", "a", "mm"});
  // descending count order
  CHECK(ep.classes[0] == "zz");
  CHECK(ep.classes[1] == "a");
  CHECK(ep.classes[2] == "mm");
}

TEST_CASE("fewshot: sampling errors are descriptive") {
  Fixture fx({{"a", 6}, {"b", 3}});
  Rng rng(4);
  CHECK_THROWS_AS(sample_episode(fx.data, 2, 5, 5, EpisodeStrategy::Random, rng),
                  DataError);
  CHECK_THROWS_WITH_AS(sample_episode(fx.data, 2, 5, 5, EpisodeStrategy::Random, rng),
                       doctest::Contains("only 1 eligible"), DataError);
  CHECK_THROWS_AS(sample_episode(fx.data, 1, 0, 5, EpisodeStrategy::Random, rng),
                  DomainError);
}

TEST_CASE("fewshot: 1000 sampled episodes satisfy the structural properties") {
  Fixture fx({{"a", 25}, {"b", 18}, {"c", 12}, {"d", 9}, {"e", 7}, {"f", 6}});
  std::set<std::string> seen_class_sets;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(derive_seed(99, "episode-prop", s));
    const Episode ep = sample_episode(fx.data, 3, 5, 4, EpisodeStrategy::Random, rng);

    REQUIRE(ep.classes.size() == 3);
    REQUIRE(ep.support.size() == 3);
    REQUIRE(ep.query.size() == 3);
    CHECK(std::set<std::string>(ep.classes.begin(), ep.classes.end()).size() == 3);

    std::set<std::size_t> all_ids;
    std::set<const HeweGraph*> all_graphs;
    std::string key;
    for (std::size_t c = 0; c < 3; ++c) {
      key += ep.classes[c] + "|";
      CHECK(ep.support[c].size() == 5);
      CHECK(ep.query[c].size() >= 1);
      CHECK(ep.query[c].size() <= 4);
      for (std::size_t id : ep.support[c]) {
        CHECK(fx.data.items[id].label == ep.classes[c]);
        CHECK(all_ids.insert(id).second);          // support/query all distinct
        CHECK(all_graphs.insert(fx.data.items[id].graph).second);
      }
      for (std::size_t id : ep.query[c]) {
        CHECK(fx.data.items[id].label == ep.classes[c]);
        CHECK(all_ids.insert(id).second);
        CHECK(all_graphs.insert(fx.data.items[id].graph).second);
      }
    }
    seen_class_sets.insert(key);
  }
  CHECK(seen_class_sets.size() > 5);  // random strategy varies the class subset
}

TEST_CASE("fewshot: a multi-label graph never lands in support and query together") {
  // one shared graph indexed under two labels
  std::vector<HeweGraph> graphs;
  graphs.reserve(20);
  LabeledGraphSet data;
  for (std::size_t i = 0; i < 9; ++i) {
    graphs.push_back(tiny_graph(1 + static_cast<std::uint32_t>(i), 2));
    data.add(&graphs.back(), "a" + std::to_string(i), "a");
  }
  for (std::size_t i = 0; i < 9; ++i) {
    graphs.push_back(tiny_graph(20 + static_cast<std::uint32_t>(i), 2));
    data.add(&graphs.back(), "b" + std::to_string(i), "b");
  }
  graphs.push_back(tiny_graph(40, 2));
  data.add(&graphs.back(), "shared", "a");
  data.add(&graphs.back(), "shared", "b");

  for (std::uint64_t s = 0; s < 300; ++s) {
    Rng rng(derive_seed(123, "dup", s));
    const Episode ep = sample_episode(data, 2, 3, 6, EpisodeStrategy::Random, rng);
    std::set<const HeweGraph*> seen;
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t id : ep.support[c]) CHECK(seen.insert(data.items[id].graph).second);
      for (std::size_t id : ep.query[c]) CHECK(seen.insert(data.items[id].graph).second);
    }
  }
}

TEST_CASE("fewshot: split_validation carves the ratio per class, disjointly") {
  Fixture fx({{"a", 30}, {"b", 20}});
  const auto [train, val] = split_validation(fx.data, 0.3, 77);
  CHECK(train.split == SplitTag::Train);
  CHECK(val.split == SplitTag::Validation);
  CHECK(train.class_index.at("a").size() == 21);
  CHECK(val.class_index.at("a").size() == 9);
  CHECK(train.class_index.at("b").size() == 14);
  CHECK(val.class_index.at("b").size() == 6);

  std::set<std::string> train_docs, val_docs;
  for (const auto& it : train.items) train_docs.insert(it.doc_id);
  for (const auto& it : val.items) val_docs.insert(it.doc_id);
  CHECK(train_docs.size() + val_docs.size() == fx.data.items.size());
  for (const std::string& d : val_docs) CHECK(train_docs.count(d) == 0);

  // deterministic
  const auto [train2, val2] = split_validation(fx.data, 0.3, 77);
  std::set<std::string> val_docs2;
  for (const auto& it : val2.items) val_docs2.insert(it.doc_id);
  CHECK(val_docs == val_docs2);
}

TEST_CASE("fewshot: prototypes") {
  SUBCASE("identical vectors reproduce the vector") {
    const Tensor v = vec({1.0, -2.0, 0.5});
    const auto protos = compute_prototypes({{v, v, v}});
    REQUIRE(protos.size() == 1);
    CHECK(protos[0].values() == std::vector<double>{1.0, -2.0, 0.5});
  }
  SUBCASE("two orthonormal vectors give the midpoint") {
    const auto protos = compute_prototypes({{vec({1, 0}), vec({0, 1})}});
    CHECK(protos[0].values() == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("matches a direct mean on random 5xd input") {
    Rng rng(8);
    std::vector<Tensor> embs;
    std::vector<double> want(7, 0.0);
    for (int i = 0; i < 5; ++i) {
      std::vector<double> row;
      for (int j = 0; j < 7; ++j) row.push_back(rng.uniform(-1, 1));
      for (int j = 0; j < 7; ++j) want[j] += row[j] / 5.0;
      embs.push_back(vec(std::move(row)));
    }
    const auto protos = compute_prototypes({embs});
    for (int j = 0; j < 7; ++j) {
      CHECK(protos[0].values()[j] == doctest::Approx(want[j]).epsilon(1e-15));
    }
  }
  SUBCASE("support-order permutation changes nothing beyond 1e-12") {
    Rng rng(9);
    std::vector<Tensor> embs;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> row;
      for (int j = 0; j < 5; ++j) row.push_back(rng.uniform(-1, 1));
      embs.push_back(vec(std::move(row)));
    }
    std::vector<Tensor> shuffled = {embs[3], embs[0], embs[5], embs[1], embs[4], embs[2]};
    const auto a = compute_prototypes({embs});
    const auto b = compute_prototypes({shuffled});
    for (int j = 0; j < 5; ++j) {
      CHECK(a[0].values()[j] == doctest::Approx(b[0].values()[j]).epsilon(1e-12));
    }
  }
  SUBCASE("empty class is an error") {
    CHECK_THROWS_AS(compute_prototypes({{}}), DomainError);
  }
}

TEST_CASE("fewshot: predict") {
  const std::vector<Tensor> protos = {vec({1, 0}), vec({0, 1}), vec({0.5, 0.5})};
  const Tensor g_q = vec({0.9, 0.1});

  SUBCASE("zero weights give the uniform distribution and class 0") {
    const PredictorParams zero = PredictorParams::zeros(2);
    const Prediction p = predict(g_q, protos, zero);
    REQUIRE(p.probabilities.size() == 3);
    for (double pr : p.probabilities) CHECK(pr == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    for (double sg : p.sigmoids) CHECK(sg == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.predicted == 0);  // tie-break to lowest index
  }
  SUBCASE("C = 1 gives probability one") {
    Rng rng(10);
    const PredictorParams w = PredictorParams::init(2, 0.5, rng);
    const Prediction p = predict(g_q, {protos[0]}, w);
    REQUIRE(p.probabilities.size() == 1);
    CHECK(p.probabilities[0] == 1.0);
    CHECK(p.predicted == 0);
  }
  SUBCASE("softmax and sigmoid agree on the argmax; scaling preserves it") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      Rng rng(derive_seed(31, "argmax", s));
      const PredictorParams w = PredictorParams::init(2, 1.0, rng);
      std::vector<double> gv = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const Tensor g = vec(std::move(gv));
      const Prediction p = predict(g, protos, w);

      std::size_t soft_arg = 0, sig_arg = 0;
      for (std::size_t i = 1; i < 3; ++i) {
        if (p.probabilities[i] > p.probabilities[soft_arg]) soft_arg = i;
        if (p.sigmoids[i] > p.sigmoids[sig_arg]) sig_arg = i;
      }
      CHECK(soft_arg == sig_arg);
      CHECK(p.predicted == soft_arg);

      // uniform positive scaling of the scores is monotone
      PredictorParams scaled = PredictorParams::zeros(2);
      for (std::size_t i = 0; i < 4; ++i) scaled.wc.values()[i] = 3.0 * w.wc.values()[i];
      CHECK(predict(g, protos, scaled).predicted == p.predicted);
    }
  }
  SUBCASE("probabilities depend on the query") {
    Rng rng(11);
    const PredictorParams w = PredictorParams::init(2, 1.0, rng);
    const Prediction a = predict(vec({2.0, -1.0}), protos, w);
    const Prediction b = predict(vec({-1.0, 2.0}), protos, w);
    bool differs = false;
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(a.probabilities[i] - b.probabilities[i]) > 1e-9) differs = true;
    }
    CHECK(differs);
  }
  SUBCASE("shape mismatch throws") {
    const PredictorParams w = PredictorParams::zeros(3);
    CHECK_THROWS_AS(predict(g_q, protos, w), ShapeError);
  }
}

TEST_CASE("fewshot: episode loss equals ln C with zero predictor weights") {
  Fixture fx({{"a", 8}, {"b", 8}, {"c", 8}, {"d", 8}, {"e", 8}});
  const EncoderParams enc = toy_encoder(fx.vocab, 21);
  const PredictorParams zero = PredictorParams::zeros(enc.out_dim());
  Rng rng(12);
  const Episode ep = sample_episode(fx.data, 5, 3, 4, EpisodeStrategy::Random, rng);
  const Tensor loss = episode_loss(fx.data, ep, enc, zero);
  CHECK(std::abs(loss.item() - std::log(5.0)) < 1e-12);
}

TEST_CASE("fewshot: saturated one-hot scores drive the loss to zero") {
  // Hand-built one-item episode: prototypes orthogonal one-hots, query equal
  // to its class prototype, match weights scaled to 50.
  std::vector<HeweGraph> graphs;
  graphs.reserve(4);
  LabeledGraphSet data;
  graphs.push_back(tiny_graph(1, 1));
  data.add(&graphs.back(), "q0", "a");
  graphs.push_back(tiny_graph(2, 1));
  data.add(&graphs.back(), "q1", "a");
  graphs.push_back(tiny_graph(3, 1));
  data.add(&graphs.back(), "q2", "b");
  graphs.push_back(tiny_graph(4, 1));
  data.add(&graphs.back(), "q3", "b");

  // scores via predict on explicit embeddings rather than the encoder
  const std::vector<Tensor> protos = {vec({1, 0}), vec({0, 1})};
  PredictorParams w = PredictorParams::zeros(2);
  w.wc.values() = {50.0, 50.0, 0.0, 0.0};
  const Prediction p = predict(vec({1, 0}), protos, w);
  CHECK(-std::log(p.probabilities[0]) < 1e-3);
  CHECK(p.predicted == 0);
  const Prediction q = predict(vec({0, 1}), protos, w);
  CHECK(-std::log(q.probabilities[1]) < 1e-3);
  CHECK(q.predicted == 1);
}

TEST_CASE("fewshot: episode loss gradient matches finite differences on a toy episode") {
  Fixture fx({{"a", 2}, {"b", 2}}, 7, 2, 4);
  // biases large enough to keep every ReLU strictly active (no kink under
  // the perturbation), weights large enough that the loss is not flat
  Rng erng(22);
  EncoderDims dims;
  dims.embed = 3;
  dims.hidden0 = 3;
  dims.hidden1 = 3;
  EncoderParams enc = EncoderParams::init(fx.vocab, dims, 0.6, erng);
  enc.b0 = Tensor::param({3}, {1.2, 1.25, 1.3});
  enc.b1 = Tensor::param({3}, {4.5, 4.6, 4.55});
  Rng prng(13);
  PredictorParams pred = PredictorParams::init(3, 0.5, prng);
  Rng rng(14);
  const Episode ep = sample_episode(fx.data, 2, 1, 1, EpisodeStrategy::Random, rng);

  std::vector<Tensor> params = enc.parameters();
  params.push_back(pred.wc);
  const fdcheck::FdReport report = fdcheck::fd_check(
      "episode", params, [&] { return episode_loss(fx.data, ep, enc, pred); });
  CHECK_MESSAGE(report.ok(1e-4),
                (report.failures.empty() ? "" : report.failures.front()));
}

TEST_CASE("fewshot: episode-local relabeling does not leak global identity") {
  // Same support/query contents under renamed classes must score identically.
  Fixture fx({{"a", 8}, {"b", 8}, {"c", 8}});
  const EncoderParams enc = toy_encoder(fx.vocab, 23);
  Rng prng(15);
  const PredictorParams pred = PredictorParams::init(enc.out_dim(), 0.5, prng);

  Rng rng(16);
  const Episode ep = sample_episode(fx.data, 3, 3, 3, EpisodeStrategy::Random, rng);
  Episode renamed = ep;
  renamed.classes = {"x", "y", "z"};  // labels are opaque to the loss
  const double a = episode_loss(fx.data, ep, enc, pred).item();
  const double b = episode_loss(fx.data, renamed, enc, pred).item();
  CHECK(a == b);
}

TEST_CASE("fewshot: evaluation with oracle and constant predictors") {
  Fixture fx({{"a", 10}, {"b", 10}, {"c", 10}, {"d", 10}, {"e", 10}});
  const EncoderParams enc = toy_encoder(fx.vocab, 24);
  FewshotConfig cfg;
  cfg.C = 5;
  cfg.K = 4;
  cfg.L = 6;
  cfg.seed = 31;

  SUBCASE("gold-reading oracle scores 100% on every metric") {
    const EvalReport rep = evaluate_with(
        fx.data, cfg, 20, enc,
        [&](const Tensor&, const std::vector<Tensor>&, const Episode& ep,
            std::size_t item) {
          for (std::size_t c = 0; c < ep.query.size(); ++c) {
            for (std::size_t id : ep.query[c]) {
              if (id == item) return c;
            }
          }
          return std::size_t{0};
        });
    CHECK(rep.episodes.size() == 20);
    CHECK(rep.mean.acc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.mean.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.mean.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.mean.f1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.stderr_.acc == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("constant class-0 predictor on balanced 5-way queries scores 20%") {
    const EvalReport rep = evaluate_with(
        fx.data, cfg, 25, enc,
        [](const Tensor&, const std::vector<Tensor>&, const Episode&,
           std::size_t) { return std::size_t{0}; });
    REQUIRE(rep.episodes.size() == 25);
    for (const EpisodeRecord& er : rep.episodes) {
      CHECK(er.metrics.acc == doctest::Approx(0.2).epsilon(1e-12));
      CHECK(er.n_queries == 30);
    }
    CHECK(rep.mean.acc == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rep.stderr_.acc == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fewshot: zero-epoch training snapshots the inputs") {
  Fixture fx({{"a", 30}, {"b", 30}, {"c", 30}, {"d", 30}, {"e", 30}}, 44);
  EncoderParams enc = toy_encoder(fx.vocab, 26);
  Rng prng(17);
  PredictorParams pred = PredictorParams::init(enc.out_dim(), 0.05, prng);

  FewshotConfig cfg;
  cfg.C = 5;
  cfg.K = 3;
  cfg.L = 3;
  cfg.epochs = 0;
  cfg.val_episodes = 0;
  cfg.seed = 51;
  const TrainResult res = train_fewshot(fx.data, cfg, enc, pred);
  CHECK(res.log.empty());
  CHECK(res.best.contains("encoder.w0"));
  CHECK(res.best.contains("predictor.wc"));

  // the untrained predictor already ranks queries by prototype distance, so
  // shared-token classes land above the 20% chance band even with a random
  // encoder
  Fixture test_fx({{"p", 10}, {"q", 10}, {"r", 10}, {"s", 10}, {"t", 10}}, 45, 3, 6);
  EncoderParams enc_eval = toy_encoder(test_fx.vocab, 26);
  const EvalReport rep = evaluate(test_fx.data, cfg, 500, enc_eval, pred);
  CHECK(rep.mean.acc > 0.25);
}

TEST_CASE("fewshot: training reduces loss and lifts accuracy above chance") {
  // classes are large enough that the validation carve-out holds a diverse
  // doc pool; otherwise best-checkpoint selection can latch onto a lucky
  // near-init estimate (the distance-prior init is above chance from epoch 1)
  Fixture fx({{"a", 40}, {"b", 40}, {"c", 40}}, 46, 3, 5);
  EncoderParams enc = toy_encoder(fx.vocab, 27);
  Rng prng(18);
  PredictorParams pred = PredictorParams::init(enc.out_dim(), 0.1, prng);

  FewshotConfig cfg;
  cfg.C = 3;
  cfg.K = 3;
  cfg.L = 4;
  cfg.episode_batch = 4;
  cfg.epochs = 40;
  cfg.lr = 0.01;
  cfg.val_episodes = 16;
  cfg.seed = 52;
  const TrainResult res = train_fewshot(fx.data, cfg, enc, pred);
  REQUIRE(res.log.size() == 40);
  CHECK(res.log.front().loss > res.log.back().loss);
  CHECK(res.best_val_acc > 0.5);

  // evaluation from the best checkpoint beats chance clearly
  const EncoderParams best_enc = EncoderParams::from_checkpoint(res.best);
  const PredictorParams best_pred = PredictorParams::from_checkpoint(res.best);
  const EvalReport rep = evaluate(fx.data, cfg, 40, best_enc, best_pred);
  CHECK(rep.mean.acc > 0.6);
}

TEST_CASE("fewshot: training is deterministic given the seed") {
  Fixture fx({{"a", 24}, {"b", 24}, {"c", 24}}, 47, 3, 5);
  FewshotConfig cfg;
  cfg.C = 3;
  cfg.K = 3;
  cfg.L = 3;
  cfg.episode_batch = 2;
  cfg.epochs = 4;
  cfg.val_episodes = 4;
  cfg.seed = 53;

  auto run = [&]() {
    EncoderParams enc = toy_encoder(fx.vocab, 28);
    Rng prng(19);
    PredictorParams pred = PredictorParams::init(enc.out_dim(), 0.1, prng);
    const TrainResult res = train_fewshot(fx.data, cfg, enc, pred);
    return res.best.serialize();
  };
  CHECK(run() == run());
}

TEST_CASE("fewshot: config parsing and validation") {
  const KvConfig kv = KvConfig::parse_string(
      "C = 4\nK = 2\nL = 7\nepisode_batch = 16\nfewshot_epochs = 12\n"
      "fewshot_lr = 0.01\nval_episodes = 20\nval_ratio = 0.25\n"
      "strategy = on_top\nseed = 5\n");
  const FewshotConfig cfg = FewshotConfig::from_kv(kv);
  CHECK(cfg.C == 4);
  CHECK(cfg.K == 2);
  CHECK(cfg.L == 7);
  CHECK(cfg.episode_batch == 16);
  CHECK(cfg.epochs == 12);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.val_episodes == 20);
  CHECK(cfg.val_ratio == 0.25);
  CHECK(cfg.strategy == EpisodeStrategy::OnTop);
  CHECK(cfg.seed == 5);

  CHECK_THROWS_AS(FewshotConfig::from_kv(KvConfig::parse_string("C = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(FewshotConfig::from_kv(KvConfig::parse_string("strategy = best\n")),
                  ConfigError);
  CHECK_THROWS_AS(parse_strategy("neither"), ConfigError);
  CHECK(strategy_name(EpisodeStrategy::Random) == "random");
}
