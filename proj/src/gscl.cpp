#include "cograph/gscl.hpp"

#include "cograph/errors.hpp"

namespace cograph {

SubGraph sample_subgraph(const HeweGraph& g, Rng& rng) {
  const auto neighbors = g.central_word_neighbors();
  if (neighbors.empty()) {
    throw DomainError("sample_subgraph: central node has no word neighbors");
  }
  SubGraph sub;
  sub.base = &g;
  sub.masked.assign(g.n, false);
  const std::size_t k = neighbors.size() / 2;
  if (k > 0) {
    for (std::size_t pick : rng.sample_indices(neighbors.size(), k)) {
      sub.masked[neighbors[pick]] = true;
    }
  }
  return sub;
}

Tensor nt_xent_pair_loss(std::size_t i, std::size_t j,
                         const std::vector<Tensor>& embeddings, double tau) {
  const std::size_t m = embeddings.size();
  if (i == j || i >= m || j >= m) {
    throw DomainError("nt_xent_pair_loss: need distinct indices inside the batch");
  }
  if (!(tau > 0.0)) throw DomainError("nt_xent_pair_loss: tau must be positive");

  Tensor positive;
  std::vector<Tensor> scaled;
  scaled.reserve(m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    if (k == i) continue;
    Tensor s =
        mul_scalar(cosine_similarity(embeddings[i], embeddings[k]), 1.0 / tau);
    if (k == j) positive = s;
    scaled.push_back(s);
  }
  return sub(logsumexp(stack_scalars(scaled)), positive);
}

Tensor gscl_batch_loss(const std::vector<const HeweGraph*>& graphs,
                       const EncoderParams& params, double tau,
                       const std::vector<std::uint64_t>& graph_seeds) {
  const std::size_t n = graphs.size();
  if (n == 0) throw DomainError("gscl_batch_loss: empty batch");
  if (graph_seeds.size() != n) {
    throw DomainError("gscl_batch_loss: one sampling seed per graph required");
  }
  std::vector<Tensor> embeddings;
  embeddings.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(graph_seeds[k]);
    const SubGraph s1 = sample_subgraph(*graphs[k], rng);
    const SubGraph s2 = sample_subgraph(*graphs[k], rng);
    embeddings.push_back(encode_masked(*graphs[k], s1.masked, params).g);
    embeddings.push_back(encode_masked(*graphs[k], s2.masked, params).g);
  }
  std::vector<Tensor> losses;
  losses.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    losses.push_back(nt_xent_pair_loss(2 * k, 2 * k + 1, embeddings, tau));
    losses.push_back(nt_xent_pair_loss(2 * k + 1, 2 * k, embeddings, tau));
  }
  return mul_scalar(sum(stack_scalars(losses)),
                    1.0 / static_cast<double>(2 * n));
}

}  // namespace cograph
