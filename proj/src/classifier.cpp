#include "stegsan/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stegsan/error.hpp"
#include "stegsan/nn/adam.hpp"

namespace stegsan::experiments {

using nn::Real;
using nn::Tensor;

void ClassifierConfig::validate() const {
  if (epochs < 0 || batch_size < 1 || !(learning_rate > 0)) {
    throw UsageError("classifier config: epochs >= 0, batch_size >= 1, learning_rate > 0");
  }
  if (channels != 1 && channels != 3) throw UsageError("classifier channels must be 1 or 3");
  if (image_size % 4 != 0) throw UsageError("classifier image_size must be a multiple of 4");
}

Classifier::Classifier(ClassifierConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int side = cfg_.image_size / 4;
  net_.add<nn::Conv2d>(cfg_.channels, 16, 3, 1, 1).add<nn::ReLU>().add<nn::MaxPool2>();
  net_.add<nn::Conv2d>(16, 32, 3, 1, 1).add<nn::ReLU>().add<nn::MaxPool2>();
  net_.add<nn::Flatten>();
  net_.add<nn::Linear>(32 * side * side, 64).add<nn::ReLU>();
  net_.add<nn::Linear>(64, 10);
  RngStream rng(child_seed(cfg_.seed, "weights"));
  net_.init(rng);
}

std::vector<nn::ParamView> Classifier::parameters() {
  std::vector<nn::ParamView> p;
  net_.collect(p, "net.");
  return p;
}

std::vector<std::uint8_t> Classifier::predict_batch(std::span<const ImageTensor* const> xs) const {
  if (!trained_) throw StateError("classifier is untrained");
  const Tensor logits = net_.infer(nn::batch_from_images(xs));
  std::vector<std::uint8_t> out(static_cast<std::size_t>(logits.n));
  for (int i = 0; i < logits.n; ++i) {
    int best = 0;
    for (int k = 1; k < 10; ++k) {
      if (logits.data[static_cast<std::size_t>(k) * logits.n + i] >
          logits.data[static_cast<std::size_t>(best) * logits.n + i]) {
        best = k;
      }
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(best);
  }
  return out;
}

std::uint8_t Classifier::predict(const ImageTensor& x) const {
  const ImageTensor* p = &x;
  return predict_batch(std::span(&p, 1)).front();
}

std::vector<std::uint8_t> Classifier::predict_all(std::span<const ImageTensor> xs) const {
  std::vector<std::uint8_t> out;
  out.reserve(xs.size());
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    std::vector<const ImageTensor*> ptrs;
    for (std::size_t i = start; i < std::min(xs.size(), start + chunk); ++i) ptrs.push_back(&xs[i]);
    const auto p = predict_batch(ptrs);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double Classifier::accuracy(const LabeledDataset& data) const {
  if (data.size() == 0) return 0.0;
  const auto pred = predict_all(data.images);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

double Classifier::accumulate_gradients(const Tensor& x, std::span<const std::uint8_t> labels) {
  const Tensor logits = net_.forward(x);
  const int n = logits.n;
  Tensor grad(10, n, 1, 1);
  double loss = 0;
  for (int i = 0; i < n; ++i) {
    Real mx = logits.data[static_cast<std::size_t>(i)];
    for (int k = 1; k < 10; ++k) mx = std::max(mx, logits.data[static_cast<std::size_t>(k) * n + i]);
    double z = 0;
    for (int k = 0; k < 10; ++k) z += std::exp(static_cast<double>(logits.data[static_cast<std::size_t>(k) * n + i] - mx));
    const int y = labels[static_cast<std::size_t>(i)];
    loss += -(logits.data[static_cast<std::size_t>(y) * n + i] - mx - std::log(z));
    for (int k = 0; k < 10; ++k) {
      const double p = std::exp(static_cast<double>(logits.data[static_cast<std::size_t>(k) * n + i] - mx)) / z;
      grad.data[static_cast<std::size_t>(k) * n + i] = static_cast<Real>((p - (k == y ? 1.0 : 0.0)) / n);
    }
  }
  net_.backward(grad);
  return loss / n;
}

Classifier train_classifier(const LabeledDataset& data, const ClassifierConfig& cfg,
                            std::vector<double>* epoch_losses) {
  cfg.validate();
  if (data.size() == 0) throw UsageError("classifier training set is empty");
  Classifier model(cfg);
  nn::Adam opt(model.parameters(), {.learning_rate = cfg.learning_rate});
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle(child_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    double total = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const ImageTensor*> ptrs;
      std::vector<std::uint8_t> labels;
      for (std::size_t i = start; i < end; ++i) {
        ptrs.push_back(&data.images[order[i]]);
        labels.push_back(data.labels[order[i]]);
      }
      opt.zero_grad();
      const double loss = model.accumulate_gradients(nn::batch_from_images(ptrs), labels);
      if (!std::isfinite(loss)) {
        throw TrainingError("classifier training diverged at epoch " + std::to_string(epoch));
      }
      opt.step();
      total += loss;
      ++batches;
    }
    if (epoch_losses) epoch_losses->push_back(total / static_cast<double>(batches));
  }
  model.mark_trained();
  return model;
}

}  // namespace stegsan::experiments
