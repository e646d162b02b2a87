#include "stegsan/nn/adam.hpp"

#include <cmath>

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {

Adam::Adam(std::vector<ParamView> params, AdamOptions options) : opt_(options) {
  for (auto& p : params) {
    if (!p.grad) continue;
    m_.emplace_back(p.value->size(), Real(0));
    v_.emplace_back(p.value->size(), Real(0));
    params_.push_back(std::move(p));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  const auto b1 = static_cast<Real>(opt_.beta1);
  const auto b2 = static_cast<Real>(opt_.beta2);
  const auto step_size = static_cast<Real>(opt_.learning_rate / c1);
  const auto inv_sqrt_c2 = static_cast<Real>(1.0 / std::sqrt(c2));
  const auto eps = static_cast<Real>(opt_.eps);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& w = *params_[k].value;
    const auto& g = *params_[k].grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (Real(1) - b1) * g[i];
      v[i] = b2 * v[i] + (Real(1) - b2) * g[i] * g[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
    }
  }
}

void Adam::zero_grad() { nn::zero_grad(params_); }

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
