#pragma once

#include <vector>

#include "stegsan/nn/layers.hpp"

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment gradient descent with bias correction. Buffers
/// (params with a null grad) are skipped.
class Adam {
 public:
  Adam(std::vector<ParamView> params, AdamOptions options);

  void step();
  void zero_grad();
  long steps() const { return t_; }
  const std::vector<ParamView>& params() const { return params_; }

 private:
  std::vector<ParamView> params_;
  AdamOptions opt_;
  std::vector<std::vector<Real>> m_, v_;
  long t_ = 0;
};

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
