#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stegsan/dataset.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::experiments {

struct ClassifierConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int channels = 1;
  int image_size = 32;
  Seed seed{};

  void validate() const;
};

/// Ten-way image classifier: two conv/ReLU/max-pool blocks and a dense
/// head, trained with softmax cross-entropy.
class Classifier {
 public:
  explicit Classifier(ClassifierConfig cfg);
  Classifier(Classifier&&) = default;
  Classifier& operator=(Classifier&&) = default;

  const ClassifierConfig& config() const { return cfg_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  std::uint8_t predict(const ImageTensor& x) const;
  std::vector<std::uint8_t> predict_batch(std::span<const ImageTensor* const> xs) const;
  std::vector<std::uint8_t> predict_all(std::span<const ImageTensor> xs) const;
  /// Percentage of `data` classified as its label.
  double accuracy(const LabeledDataset& data) const;

  /// Training-mode forward/backward; returns mean cross-entropy.
  double accumulate_gradients(const nn::Tensor& x, std::span<const std::uint8_t> labels);
  std::vector<nn::ParamView> parameters();

 private:
  ClassifierConfig cfg_;
  nn::Sequential net_;
  bool trained_ = false;
};

Classifier train_classifier(const LabeledDataset& data, const ClassifierConfig& cfg,
                            std::vector<double>* epoch_losses = nullptr);

}  // namespace stegsan::experiments
