#pragma once

#include <cstdint>
#include <vector>

#include "cograph/encoder.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/rng.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

// A node-masked view of a source graph: masked word neighbors of the central
// node lose all incident edges but stay present (self-connection only).
struct SubGraph {
  const HeweGraph* base = nullptr;
  std::vector<bool> masked;
};

// Uniformly masks floor(deg_EHR / 2) word neighbors of the central node.
SubGraph sample_subgraph(const HeweGraph& g, Rng& rng);

// NT-Xent loss for the ordered pair (i, j) over 2N embeddings: the positive
// similarity against every similarity with k != i, temperature-scaled.
Tensor nt_xent_pair_loss(std::size_t i, std::size_t j,
                         const std::vector<Tensor>& embeddings, double tau);

// Two sub-graphs per source graph (seeded per graph), encoded and reduced
// with the symmetrized pair loss, averaged over all 2N orderings.
Tensor gscl_batch_loss(const std::vector<const HeweGraph*>& graphs,
                       const EncoderParams& params, double tau,
                       const std::vector<std::uint64_t>& graph_seeds);

}  // namespace cograph
