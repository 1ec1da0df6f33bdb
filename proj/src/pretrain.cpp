#include "cograph/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cograph/errors.hpp"
#include "cograph/gscl.hpp"
#include "cograph/optim.hpp"
#include "cograph/rng.hpp"

namespace cograph {

AblationMode parse_mode(const std::string& name) {
  if (name == "full") return AblationMode::Full;
  if (name == "no_gscl") return AblationMode::NoGscl;
  if (name == "no_gecl") return AblationMode::NoGecl;
  if (name == "none") return AblationMode::None;
  throw ConfigError("unknown ablation mode '" + name +
                    "' (expected full, no_gscl, no_gecl or none)");
}

std::string mode_name(AblationMode mode) {
  switch (mode) {
    case AblationMode::Full: return "full";
    case AblationMode::NoGscl: return "no_gscl";
    case AblationMode::NoGecl: return "no_gecl";
    case AblationMode::None: return "none";
  }
  throw Error("mode_name: invalid mode");
}

PretrainConfig PretrainConfig::from_kv(const KvConfig& kv) {
  PretrainConfig c;
  c.alpha = kv.get_double("alpha", c.alpha);
  const std::int64_t bs =
      kv.get_int("pretrain_batch_size", static_cast<std::int64_t>(c.batch_size));
  if (bs < 0) throw ConfigError("pretrain: pretrain_batch_size must be non-negative");
  c.batch_size = static_cast<std::size_t>(bs);
  c.lr = kv.get_double("pretrain_lr", c.lr);
  const std::int64_t ep =
      kv.get_int("pretrain_epochs", static_cast<std::int64_t>(c.epochs));
  if (ep < 0) throw ConfigError("pretrain: pretrain_epochs must be non-negative");
  c.epochs = static_cast<std::size_t>(ep);
  c.tau = kv.get_double("tau", c.tau);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.mode = parse_mode(kv.get_string("mode", mode_name(c.mode)));
  c.validate();
  return c;
}

void PretrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("pretrain: alpha must be >= 0");
  if (batch_size < 2) throw ConfigError("pretrain: batch_size must be >= 2");
  if (!(lr >= 0.0)) throw ConfigError("pretrain: learning rate must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("pretrain: tau must be > 0");
}

PretrainInit make_pretrain_init(std::size_t vocab_size, const EncoderDims& dims,
                                std::size_t gru_hidden, double radius,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, "init"));
  PretrainInit init;
  init.encoder = EncoderParams::init(vocab_size, dims, radius, rng);
  // Positive starting biases keep the rectified layers alive: with zero
  // biases and few hidden units, a graph's central embedding can start out
  // exactly zero, which the cosine similarity rejects.
  init.encoder.b0 = Tensor::param({dims.hidden0},
                                  std::vector<double>(dims.hidden0, radius));
  init.encoder.b1 = Tensor::param({dims.hidden1},
                                  std::vector<double>(dims.hidden1, radius));
  init.gru = BiGruParams::init(dims.hidden1, gru_hidden, radius, rng);
  init.scorer = BilinearScorer::init(2 * gru_hidden, dims.hidden1, radius, rng);
  return init;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  return idx;
}

}  // namespace

PretrainResult cotrain(const std::vector<const HeweGraph*>& graphs,
                       const std::vector<GraphSequence>& sequences,
                       PretrainInit init, const PretrainConfig& cfg) {
  cfg.validate();
  if (cfg.mode == AblationMode::None) {
    throw Error("cotrain: mode none performs no pre-training; use run_pretrain");
  }
  if (graphs.empty()) throw DataError("cotrain: empty graph set");

  std::vector<GraphSequence> usable;
  for (const GraphSequence& s : sequences) {
    if (s.length() >= 2) usable.push_back(s);
  }

  const bool want_gecl = cfg.mode != AblationMode::NoGecl;
  const bool want_gscl = cfg.mode != AblationMode::NoGscl;
  PretrainResult result;
  result.gecl_active = want_gecl && usable.size() >= 2;
  if (want_gecl && !result.gecl_active) {
    result.warning = "fewer than 2 sequences of length >= 2 (" +
                     std::to_string(usable.size()) +
                     " usable); training on the sub-graph term only";
  }
  if (!result.gecl_active && !want_gscl) {
    throw DataError("cotrain: mode no_gscl needs >= 2 sequences of length >= 2");
  }

  std::vector<Tensor> params = init.encoder.parameters();
  for (const Tensor& t : init.gru.parameters()) params.push_back(t);
  for (const Tensor& t : init.scorer.parameters()) params.push_back(t);
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  Adam opt(params, adam_cfg);

  // Sequence batches cycle independently of the graph epoch; the order is
  // reshuffled at every wrap-around.
  std::vector<std::size_t> seq_order;
  std::size_t seq_cursor = 0, seq_wraps = 0;
  const auto next_sequence_batch = [&]() {
    const std::size_t take = std::min(cfg.batch_size, usable.size());
    std::vector<GraphSequence> batch;
    for (std::size_t i = 0; i < take; ++i) {
      if (seq_cursor >= seq_order.size()) {
        seq_order = shuffled_indices(usable.size(),
                                     derive_seed(cfg.seed, "seq-order", seq_wraps++));
        seq_cursor = 0;
      }
      batch.push_back(usable[seq_order[seq_cursor++]]);
    }
    return batch;
  };

  std::uint64_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order =
        shuffled_indices(graphs.size(), derive_seed(cfg.seed, "graph-order", epoch));

    double sum_gscl = 0.0, sum_gecl = 0.0, sum_total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size, ++global_step, ++steps) {
      const std::size_t stop = std::min(start + cfg.batch_size, order.size());

      Tensor total;
      double gscl_value = 0.0, gecl_value = 0.0;
      try {
        if (want_gscl) {
          std::vector<const HeweGraph*> batch;
          std::vector<std::uint64_t> seeds;
          for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(graphs[order[i]]);
            seeds.push_back(derive_seed(cfg.seed, "mask", global_step, i - start));
          }
          const Tensor l_gscl =
              gscl_batch_loss(batch, init.encoder, cfg.tau, seeds);
          gscl_value = l_gscl.item();
          total = mul_scalar(l_gscl, cfg.alpha);
        }
        if (result.gecl_active) {
          const Tensor l_gecl = gecl_batch_loss(
              next_sequence_batch(), init.encoder, init.gru, init.scorer);
          gecl_value = l_gecl.item();
          total = total.defined() ? add(total, l_gecl) : l_gecl;
        }
      } catch (const DomainError& e) {
        // Typically a collapsed (zero-norm) sub-graph embedding; report where
        // the run died so the epoch budget or learning rate can be adjusted.
        throw DomainError("cotrain: step failed at epoch " +
                          std::to_string(epoch) + " step " +
                          std::to_string(steps) + ": " + e.what());
      }

      const double total_value = total.item();
      if (!std::isfinite(total_value)) {
        throw Error("cotrain: non-finite loss at epoch " + std::to_string(epoch) +
                    " step " + std::to_string(steps));
      }
      backward(total);
      opt.step();

      sum_gscl += gscl_value;
      sum_gecl += gecl_value;
      sum_total += total_value;
    }

    EpochLoss rec;
    rec.epoch = epoch;
    rec.l_gscl = sum_gscl / static_cast<double>(steps);
    rec.l_gecl = sum_gecl / static_cast<double>(steps);
    rec.l_total = sum_total / static_cast<double>(steps);
    result.losses.push_back(rec);
  }

  init.encoder.save_into(result.checkpoint);
  init.gru.save_into(result.checkpoint);
  init.scorer.save_into(result.checkpoint);
  return result;
}

std::optional<PretrainResult> run_pretrain(
    const std::vector<const HeweGraph*>& graphs,
    const std::vector<GraphSequence>& sequences, PretrainInit init,
    const PretrainConfig& cfg) {
  if (cfg.mode == AblationMode::None) return std::nullopt;
  return cotrain(graphs, sequences, std::move(init), cfg);
}

}  // namespace cograph
