#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "stegsan/dataset.hpp"
#include "stegsan/image.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::steg {
inline namespace STEGSAN_NN_NS {

using nn::Real;
using nn::Tensor;

/// DDH conditions the container on (cover, secret); UDH adds a
/// cover-agnostic perturbation computed from the secret alone.
enum class DeepMode { ddh, udh };

std::string_view to_string(DeepMode m);
DeepMode parse_deep_mode(std::string_view s);

struct DeepHidingConfig {
  DeepMode mode = DeepMode::udh;
  int image_size = 32;
  int batch_size = 44;
  int channels_cover = 1;
  int channels_secret = 1;
  bool batch_norm = true;
  /// Weight of the secret term in L = d(C, C') + beta * d(S, S').
  double beta = 0.75;
  int epochs = 100;
  double learning_rate = 1e-4;
  Seed seed{};
  /// Base channel width of both networks.
  int width = 16;

  void validate() const;
};

struct DeepLoss {
  double total = 0;
  double cover = 0;   // mean squared unit-scale error, cover vs container
  double secret = 0;  // mean squared unit-scale error, secret vs revealed
};

/// Paired hide/reveal networks.
///
/// Hide network: strided encoder-decoder CNN with batch norm ending in a
/// tanh residual. UDH feeds it the secret only and the container is
/// clip(cover + residual). DDH feeds it cover and secret stacked on the
/// channel axis, and the network carries an identity skip from its cover
/// input: container = clip(cover + residual(cover, secret)).
///
/// Reveal network: plain 3x3 convolution stack with batch norm and a
/// sigmoid output.
class DeepHidingModel {
 public:
  explicit DeepHidingModel(DeepHidingConfig cfg);
  DeepHidingModel(DeepHidingModel&&) = default;
  DeepHidingModel& operator=(DeepHidingModel&&) = default;

  const DeepHidingConfig& config() const { return cfg_; }
  DeepMode mode() const { return cfg_.mode; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  ImageTensor hide(const ImageTensor& cover, const ImageTensor& secret) const;
  ImageTensor reveal(const ImageTensor& container) const;
  /// UDH only: the unclipped residual added to any cover.
  std::vector<Real> perturbation(const ImageTensor& secret) const;

  std::vector<ImageTensor> hide_batch(const std::vector<const ImageTensor*>& covers,
                                      const std::vector<const ImageTensor*>& secrets) const;
  std::vector<ImageTensor> reveal_batch(const std::vector<const ImageTensor*>& containers) const;

  /// Inference-mode residual for a batch (pre-clip).
  Tensor residual(const Tensor& cover, const Tensor& secret) const;

  /// Training-mode forward + backward on one batch. Parameter gradients
  /// are accumulated; returns the loss.
  DeepLoss accumulate_gradients(const Tensor& cover, const Tensor& secret);
  /// Training-mode forward only (batch-norm batch statistics).
  DeepLoss evaluate_loss(const Tensor& cover, const Tensor& secret);

  std::vector<nn::ParamView> parameters();

 private:
  void require_trained() const;
  Tensor hide_input(const Tensor& cover, const Tensor& secret) const;

  DeepHidingConfig cfg_;
  nn::Sequential hide_net_;
  nn::Sequential reveal_net_;
  bool trained_ = false;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0;
  double cover_loss = 0;
  double secret_loss = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Joint training of hide and reveal networks on randomly paired
/// (cover, secret) batches. Throws TrainingError on a non-finite loss.
DeepHidingModel train_deep_hiding(const LabeledDataset& train, const DeepHidingConfig& cfg,
                                  std::vector<EpochStats>* history = nullptr,
                                  const EpochCallback& on_epoch = {});

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::steg
