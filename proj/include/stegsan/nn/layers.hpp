#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stegsan/nn/tensor.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::nn {
inline namespace STEGSAN_NN_NS {

/// Named view of a parameter (or a non-trainable buffer when grad is null).
struct ParamView {
  std::string name;
  std::vector<int> shape;
  std::vector<Real>* value = nullptr;
  std::vector<Real>* grad = nullptr;
};

class Layer {
 public:
  virtual ~Layer() = default;

  /// Training-mode forward. Caches whatever backward() needs.
  virtual Tensor forward(const Tensor& x) = 0;
  /// Inference-mode forward. Stateless, so a trained model may be shared
  /// between threads.
  virtual Tensor infer(const Tensor& x) const = 0;
  /// Input gradient for the most recent forward(). Parameter gradients are
  /// accumulated (call zero_grad between steps).
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual void collect(std::vector<ParamView>&, const std::string&) {}
  virtual void init(RngStream&) {}
  virtual std::string describe() const = 0;
};

class Conv2d : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride = 1, int padding = 0);
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<ParamView>& out, const std::string& prefix) override;
  void init(RngStream& rng) override;
  std::string describe() const override;

 private:
  Tensor run(const Tensor& x, std::vector<Real>& col) const;

  int cin_, cout_, k_, stride_, pad_;
  std::vector<Real> weight_, bias_, gweight_, gbias_;
  std::vector<Real> col_;
  Tensor input_shape_;
};

/// Fractionally-strided convolution; output size (in - 1) * stride - 2 * pad + kernel.
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride = 1, int padding = 0);
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<ParamView>& out, const std::string& prefix) override;
  void init(RngStream& rng) override;
  std::string describe() const override;

 private:
  int cin_, cout_, k_, stride_, pad_;
  std::vector<Real> weight_, bias_, gweight_, gbias_;
  Tensor input_;
};

/// Dense layer over (features, N, 1, 1) tensors.
class Linear : public Layer {
 public:
  Linear(int in_features, int out_features);
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<ParamView>& out, const std::string& prefix) override;
  void init(RngStream& rng) override;
  std::string describe() const override;

 private:
  int in_, out_;
  std::vector<Real> weight_, bias_, gweight_, gbias_;
  Tensor input_;
};

/// Per-channel batch normalisation with learned affine and running
/// statistics (momentum 0.1, unbiased running variance).
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels, Real eps = Real(1e-5), Real momentum = Real(0.1));
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  void collect(std::vector<ParamView>& out, const std::string& prefix) override;
  std::string describe() const override;

 private:
  int channels_;
  Real eps_, momentum_;
  std::vector<Real> gamma_, beta_, ggamma_, gbeta_, running_mean_, running_var_;
  Tensor xhat_;
  std::vector<Real> inv_std_;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "ReLU"; }

 private:
  Tensor output_;
};

class LeakyReLU : public Layer {
 public:
  explicit LeakyReLU(Real slope = Real(0.2)) : slope_(slope) {}
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "LeakyReLU"; }

 private:
  Real slope_;
  Tensor input_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "Sigmoid"; }

 private:
  Tensor output_;
};

class Tanh : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "Tanh"; }

 private:
  Tensor output_;
};

/// 2x2 max pooling, stride 2.
class MaxPool2 : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "MaxPool2"; }

 private:
  Tensor run(const Tensor& x, std::vector<std::size_t>* argmax) const;
  std::vector<std::size_t> argmax_;
  Tensor input_shape_;
};

/// (C, N, H, W) -> (C*H*W, N, 1, 1).
class Flatten : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override { return "Flatten"; }

 private:
  int c_ = 0, h_ = 0, w_ = 0;
};

/// (C*H*W, N, 1, 1) -> (C, N, H, W).
class Unflatten : public Layer {
 public:
  Unflatten(int channels, int height, int width) : c_(channels), h_(height), w_(width) {}
  Tensor forward(const Tensor& x) override { return infer(x); }
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& grad_out) override;
  std::string describe() const override;

 private:
  int c_, h_, w_;
};

Tensor flatten_features(const Tensor& x);
Tensor unflatten_features(const Tensor& x, int c, int h, int w);

class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  Sequential& add(Args&&... args) {
    layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
    return *this;
  }

  Tensor forward(const Tensor& x);
  Tensor infer(const Tensor& x) const;
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamView>& out, const std::string& prefix);
  void init(RngStream& rng);
  std::size_t size() const { return layers_.size(); }
  std::string describe() const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

std::size_t parameter_count(const std::vector<ParamView>& params);
void zero_grad(const std::vector<ParamView>& params);
bool all_finite(const std::vector<ParamView>& params);

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::nn
