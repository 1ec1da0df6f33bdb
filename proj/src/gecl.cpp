#include "cograph/gecl.hpp"

#include "cograph/errors.hpp"

namespace cograph {

Tensor encode_history(const GraphSequence& seq, const EncoderParams& encoder,
                      const BiGruParams& gru) {
  if (seq.length() < 2) {
    throw DataError("encode_history: patient '" + seq.patient_id +
                    "' needs at least 2 graphs, has " +
                    std::to_string(seq.length()));
  }
  const std::size_t prefix = seq.length() - 1;
  std::vector<Tensor> embs;
  embs.reserve(prefix);
  for (std::size_t t = 0; t < prefix; ++t) {
    embs.push_back(encode(*seq.graphs[t], encoder).g);
  }
  const Tensor zero = Tensor::constant({gru.hidden()},
                                       std::vector<double>(gru.hidden(), 0.0));
  Tensor hf = zero;
  for (std::size_t t = 0; t < prefix; ++t) {
    hf = gru_cell(embs[t], hf, gru.fwd);
  }
  // The backward state aligned to the last prefix position consumes only
  // that element: it is the backward unit's first step from the zero state.
  Tensor hb = gru_cell(embs[prefix - 1], zero, gru.bwd);
  return concat(hf, hb);
}

BilinearScorer BilinearScorer::init(std::size_t context_dim,
                                    std::size_t embed_dim, double radius,
                                    Rng& rng) {
  BilinearScorer s;
  s.wu = Tensor::uniform_param({context_dim * embed_dim}, radius, rng);
  return s;
}

BilinearScorer BilinearScorer::zeros(std::size_t context_dim,
                                     std::size_t embed_dim) {
  BilinearScorer s;
  s.wu = Tensor::zeros_param({context_dim * embed_dim});
  return s;
}

void BilinearScorer::save_into(Checkpoint& ckpt) const {
  ckpt.put("scorer.wu", wu);
}

BilinearScorer BilinearScorer::from_checkpoint(const Checkpoint& ckpt) {
  BilinearScorer s;
  s.wu = ckpt.take_param("scorer.wu");
  return s;
}

Tensor bilinear_score(const Tensor& h, const Tensor& g,
                      const BilinearScorer& scorer) {
  return bilinear_form(scorer.wu, h, g);
}

Tensor gecl_batch_loss(const std::vector<GraphSequence>& sequences,
                       const EncoderParams& encoder, const BiGruParams& gru,
                       const BilinearScorer& scorer) {
  const std::size_t n = sequences.size();
  if (n < 2) {
    throw DataError("gecl_batch_loss: at least 2 sequences required for "
                    "in-batch negatives, got " + std::to_string(n));
  }
  std::string short_ids;
  for (const auto& seq : sequences) {
    if (seq.length() < 2) {
      short_ids += short_ids.empty() ? seq.patient_id : ", " + seq.patient_id;
    }
  }
  if (!short_ids.empty()) {
    throw DataError("gecl_batch_loss: sequences shorter than 2 for patients: " +
                    short_ids);
  }

  std::vector<Tensor> contexts, futures;
  contexts.reserve(n);
  futures.reserve(n);
  for (const auto& seq : sequences) {
    contexts.push_back(encode_history(seq, encoder, gru));
    futures.push_back(encode(*seq.graphs.back(), encoder).g);
  }
  std::vector<Tensor> terms;
  terms.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Tensor u = bilinear_score(contexts[i], futures[j], scorer);
      terms.push_back(
          binary_cross_entropy_with_logits(u, i == j ? 1.0 : 0.0));
    }
  }
  return mul_scalar(sum(stack_scalars(terms)),
                    1.0 / static_cast<double>(n * n));
}

}  // namespace cograph
