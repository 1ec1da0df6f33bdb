#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cograph/checkpoint.hpp"
#include "cograph/config.hpp"
#include "cograph/encoder.hpp"
#include "cograph/gecl.hpp"
#include "cograph/gru.hpp"
#include "cograph/hewe_graph.hpp"

namespace cograph {

enum class AblationMode { Full, NoGscl, NoGecl, None };
AblationMode parse_mode(const std::string& name);
std::string mode_name(AblationMode mode);

struct PretrainConfig {
  double alpha = 0.5;            // weight of the sub-graph contrastive term
  std::size_t batch_size = 128;  // graphs and sequences per step
  double lr = 0.0001;
  std::size_t epochs = 50;
  double tau = 0.5;  // NT-Xent temperature
  std::uint64_t seed = 7;
  AblationMode mode = AblationMode::Full;

  static PretrainConfig from_kv(const KvConfig& kv);
  void validate() const;
};

// All trainable state of the pre-training stage; constructed once and then
// optimized in place by cotrain.
struct PretrainInit {
  EncoderParams encoder;
  BiGruParams gru;
  BilinearScorer scorer;
};

PretrainInit make_pretrain_init(std::size_t vocab_size, const EncoderDims& dims,
                                std::size_t gru_hidden, double radius,
                                std::uint64_t seed);

struct EpochLoss {
  std::size_t epoch = 0;  // 1-based
  double l_gscl = 0.0;
  double l_gecl = 0.0;
  double l_total = 0.0;
};

struct PretrainResult {
  Checkpoint checkpoint;  // encoder.*, gru.*, scorer.*
  std::vector<EpochLoss> losses;
  bool gecl_active = true;
  std::string warning;  // set when falling back to GSCL-only
};

// Joint loop: per step one graph batch (sub-graph contrastive term) plus one
// sequence batch (evolution term), combined per cfg.mode, one Adam step over
// every parameter. Fewer than two usable sequences drops the evolution term
// with a warning instead of failing.
PretrainResult cotrain(const std::vector<const HeweGraph*>& graphs,
                       const std::vector<GraphSequence>& sequences,
                       PretrainInit init, const PretrainConfig& cfg);

// Mode dispatch: None skips pre-training entirely (random-init downstream).
std::optional<PretrainResult> run_pretrain(
    const std::vector<const HeweGraph*>& graphs,
    const std::vector<GraphSequence>& sequences, PretrainInit init,
    const PretrainConfig& cfg);

}  // namespace cograph
