#pragma once

#include <vector>

#include "cograph/checkpoint.hpp"
#include "cograph/rng.hpp"
#include "cograph/tensor.hpp"

namespace cograph {

// One gated recurrent unit: update gate z, reset gate r, candidate state,
// convex combination h' = (1-z)*h + z*candidate.
struct GruCellParams {
  Tensor wz, uz, bz;
  Tensor wr, ur, br;
  Tensor wh, uh, bh;

  static GruCellParams init(std::size_t in_dim, std::size_t hidden,
                            double radius, Rng& rng);
  std::vector<Tensor> parameters() const;
  std::size_t in_dim() const { return wz.rows(); }
  std::size_t hidden() const { return wz.cols(); }
};

Tensor gru_cell(const Tensor& x, const Tensor& h_prev,
                const GruCellParams& p);

struct BiGruParams {
  GruCellParams fwd;
  GruCellParams bwd;

  static BiGruParams init(std::size_t in_dim, std::size_t hidden,
                          double radius, Rng& rng);
  std::vector<Tensor> parameters() const;
  std::size_t hidden() const { return fwd.hidden(); }
  std::size_t context_dim() const { return 2 * fwd.hidden(); }

  void save_into(Checkpoint& ckpt) const;
  static BiGruParams from_checkpoint(const Checkpoint& ckpt);
};

}  // namespace cograph
