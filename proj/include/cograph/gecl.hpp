#pragma once

#include <string>
#include <vector>

#include "cograph/encoder.hpp"
#include "cograph/gru.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

// A patient's graphs ordered by seq_index. GECL consumes the prefix
// G_1..G_{T-1} as history and scores candidates against the future G_T.
struct GraphSequence {
  std::string patient_id;
  std::vector<const HeweGraph*> graphs;

  std::size_t length() const { return graphs.size(); }
};

// Context h_{T-1} = concat(forward pass over the prefix, backward state
// aligned to the last prefix position). The future graph stays unseen.
Tensor encode_history(const GraphSequence& seq, const EncoderParams& encoder,
                      const BiGruParams& gru);

struct BilinearScorer {
  Tensor wu;  // flattened 1 x (context_dim * embed_dim)

  static BilinearScorer init(std::size_t context_dim, std::size_t embed_dim,
                             double radius, Rng& rng);
  static BilinearScorer zeros(std::size_t context_dim, std::size_t embed_dim);
  std::vector<Tensor> parameters() const { return {wu}; }

  void save_into(Checkpoint& ckpt) const;
  static BilinearScorer from_checkpoint(const Checkpoint& ckpt);
};

// u = W_u . rowmajor(h (outer) g), evaluated without materializing the
// outer product.
Tensor bilinear_score(const Tensor& h, const Tensor& g,
                      const BilinearScorer& scorer);

// All N contexts scored against all N futures; the diagonal pairs are
// positive. Mean stabilized binary cross-entropy over the N*N pairs.
Tensor gecl_batch_loss(const std::vector<GraphSequence>& sequences,
                       const EncoderParams& encoder, const BiGruParams& gru,
                       const BilinearScorer& scorer);

}  // namespace cograph
