#pragma once

#include <vector>

#include "cograph/checkpoint.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/rng.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

struct EncoderDims {
  std::size_t embed = 300;
  std::size_t hidden0 = 100;
  std::size_t hidden1 = 300;
};

// Two-layer GCN over the normalized adjacency, shared by both contrastive
// objectives and the few-shot classifier.
struct EncoderParams {
  Tensor table;  // V x embed node-feature embeddings
  Tensor w0, b0;
  Tensor w1, b1;

  static EncoderParams init(std::size_t vocab_size, const EncoderDims& dims,
                            double radius, Rng& rng);

  std::vector<Tensor> parameters() const;
  EncoderDims dims() const;
  std::size_t vocab_size() const { return table.rows(); }
  std::size_t out_dim() const { return w1.cols(); }

  void save_into(Checkpoint& ckpt) const;
  static EncoderParams from_checkpoint(const Checkpoint& ckpt);
};

struct GraphEmbedding {
  Tensor h;  // n x out_dim node embeddings
  Tensor g;  // central row of h
};

GraphEmbedding encode(const HeweGraph& graph, const EncoderParams& params);
// Same propagation with masked nodes cut out of the adjacency (they keep
// their self-connection, so their rows stay defined).
GraphEmbedding encode_masked(const HeweGraph& graph,
                             const std::vector<bool>& masked,
                             const EncoderParams& params);

Tensor pick_central(const Tensor& h, std::size_t central);

}  // namespace cograph
