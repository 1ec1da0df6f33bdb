#pragma once

#include <cstdint>
#include <vector>

#include "cograph/tensor.hpp"

namespace cograph {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. step() consumes accumulated gradients and
// clears them; parameters without a gradient buffer are treated as having
// zero gradient so the moment estimates still decay.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

  void step();

  const std::vector<Tensor>& params() const { return params_; }
  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps_taken() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
};

}  // namespace cograph
