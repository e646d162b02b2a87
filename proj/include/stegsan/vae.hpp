#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stegsan/dataset.hpp"
#include "stegsan/image.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::suds {
inline namespace STEGSAN_NN_NS {

using nn::Real;
using nn::Tensor;

struct VaeConfig {
  /// Latent feature count n.
  int latent = 128;
  int epochs = 100;
  int batch_size = 128;
  double learning_rate = 1e-4;
  Seed seed{};
  int image_size = 32;
  int channels = 1;
  /// Channels of the first encoder convolution; doubles at each stage.
  int width = 32;
  /// Decode a sampled z instead of the posterior mean at sanitize time.
  bool sample_at_inference = false;

  void validate() const;
};

struct Encoding {
  std::vector<Real> mu;
  std::vector<Real> logvar;
};

/// z = mu + exp(logvar / 2) * eps, elementwise.
std::vector<Real> sample_latent(std::span<const Real> mu, std::span<const Real> logvar,
                                std::span<const Real> eps);

/// KL(N(mu, exp(logvar)) || N(0, I)) = -1/2 sum(1 + logvar - mu^2 - exp(logvar)).
double kl_divergence(std::span<const Real> mu, std::span<const Real> logvar);

/// Mean squared difference on the unit pixel scale. Byte-scale mse() is
/// exactly 255^2 times this. Training uses the per-image sum (this value
/// times c*h*w).
double reconstruction_loss(const ImageTensor& x, const ImageTensor& x_hat);

struct VaeLoss {
  double total = 0;           // reconstruction + kl, per image
  double reconstruction = 0;  // summed squared error per image
  double kl = 0;              // per image
};

/// Convolutional VAE: three stride-2 4x4 convolutions (LeakyReLU) into two
/// linear heads for mu and logvar; the decoder mirrors it with a linear
/// layer and three transposed convolutions, ending in a sigmoid so every
/// reconstruction lies in [0, 1].
class VaeModel {
 public:
  explicit VaeModel(VaeConfig cfg);
  VaeModel(VaeModel&&) = default;
  VaeModel& operator=(VaeModel&&) = default;

  const VaeConfig& config() const { return cfg_; }
  int latent() const { return cfg_.latent; }
  Shape image_shape() const { return {cfg_.channels, cfg_.image_size, cfg_.image_size}; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  Encoding encode(const ImageTensor& x) const;
  ImageTensor decode(std::span<const Real> z) const;
  /// Encode then decode the posterior mean (or a sample drawn from `rng`
  /// when config().sample_at_inference is set).
  ImageTensor sanitize(const ImageTensor& x, RngStream* rng = nullptr) const;
  std::vector<ImageTensor> sanitize_batch(std::span<const ImageTensor* const> xs,
                                          RngStream* rng = nullptr) const;
  std::vector<Encoding> encode_batch(std::span<const ImageTensor* const> xs) const;

  /// Batched inference pieces.
  std::pair<Tensor, Tensor> encode_tensor(const Tensor& x) const;
  Tensor decode_tensor(const Tensor& z) const;

  /// Training-mode forward + backward with fixed noise eps (latent, N).
  /// Gradients accumulate; returns per-image loss terms.
  VaeLoss accumulate_gradients(const Tensor& x, const Tensor& eps);
  VaeLoss evaluate_loss(const Tensor& x, const Tensor& eps);

  std::vector<nn::ParamView> parameters();

 private:
  void require_trained() const;
  void check_input(const Tensor& x) const;

  VaeConfig cfg_;
  nn::Sequential encoder_;
  nn::Linear mu_head_;
  nn::Linear logvar_head_;
  nn::Sequential decoder_;
  bool trained_ = false;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  double reconstruction = 0;
  double kl = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Minimise L = L_r + L_reg over covers with Adam. Throws TrainingError on
/// a non-finite loss.
VaeModel train_suds(const LabeledDataset& train, const VaeConfig& cfg,
                    std::vector<EpochStats>* history = nullptr, const EpochCallback& on_epoch = {});

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::suds
