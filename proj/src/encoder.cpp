#include "cograph/encoder.hpp"

#include "cograph/errors.hpp"

namespace cograph {

EncoderParams EncoderParams::init(std::size_t vocab_size,
                                  const EncoderDims& dims, double radius,
                                  Rng& rng) {
  if (vocab_size == 0) throw DomainError("encoder: empty vocabulary");
  EncoderParams p;
  p.table = Tensor::uniform_param({vocab_size, dims.embed}, radius, rng);
  p.w0 = Tensor::uniform_param({dims.embed, dims.hidden0}, radius, rng);
  p.b0 = Tensor::zeros_param({dims.hidden0});
  p.w1 = Tensor::uniform_param({dims.hidden0, dims.hidden1}, radius, rng);
  p.b1 = Tensor::zeros_param({dims.hidden1});
  return p;
}

std::vector<Tensor> EncoderParams::parameters() const {
  return {table, w0, b0, w1, b1};
}

EncoderDims EncoderParams::dims() const {
  return {table.cols(), w0.cols(), w1.cols()};
}

void EncoderParams::save_into(Checkpoint& ckpt) const {
  ckpt.put("encoder.table", table);
  ckpt.put("encoder.w0", w0);
  ckpt.put("encoder.b0", b0);
  ckpt.put("encoder.w1", w1);
  ckpt.put("encoder.b1", b1);
}

EncoderParams EncoderParams::from_checkpoint(const Checkpoint& ckpt) {
  EncoderParams p;
  p.table = ckpt.take_param("encoder.table");
  p.w0 = ckpt.take_param("encoder.w0");
  p.b0 = ckpt.take_param("encoder.b0");
  p.w1 = ckpt.take_param("encoder.w1");
  p.b1 = ckpt.take_param("encoder.b1");
  return p;
}

GraphEmbedding encode(const HeweGraph& graph, const EncoderParams& params) {
  return encode_masked(graph, std::vector<bool>(graph.n, false), params);
}

GraphEmbedding encode_masked(const HeweGraph& graph,
                             const std::vector<bool>& masked,
                             const EncoderParams& params) {
  for (std::uint32_t id : graph.feature_ids) {
    if (id >= params.table.rows()) {
      throw ShapeError("encode: feature id " + std::to_string(id) +
                       " outside embedding table of " +
                       std::to_string(params.table.rows()) + " rows");
    }
  }
  Tensor abar =
      Tensor::constant({graph.n, graph.n}, normalized_adjacency(graph, masked));
  Tensor x = embed_rows(params.table, graph.feature_ids);
  Tensor l = relu(matmul(abar, add_row_bias(matmul(x, params.w0), params.b0)));
  Tensor h = relu(matmul(abar, add_row_bias(matmul(l, params.w1), params.b1)));
  return {h, pick_central(h, graph.central)};
}

Tensor pick_central(const Tensor& h, std::size_t central) {
  return pick_row(h, central);
}

}  // namespace cograph
