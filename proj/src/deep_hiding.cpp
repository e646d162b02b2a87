#include "stegsan/deep_hiding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stegsan/error.hpp"
#include "stegsan/nn/adam.hpp"

namespace stegsan::steg {
inline namespace STEGSAN_NN_NS {
namespace {

void add_norm(nn::Sequential& s, int channels, bool enabled) {
  if (enabled) s.add<nn::BatchNorm>(channels);
}

nn::Sequential build_hide_net(int in_channels, int out_channels, int w, bool bn) {
  nn::Sequential s;
  s.add<nn::Conv2d>(in_channels, w, 3, 1, 1);
  add_norm(s, w, bn);
  s.add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::Conv2d>(w, 2 * w, 4, 2, 1);
  add_norm(s, 2 * w, bn);
  s.add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::Conv2d>(2 * w, 4 * w, 4, 2, 1);
  add_norm(s, 4 * w, bn);
  s.add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::ConvTranspose2d>(4 * w, 2 * w, 4, 2, 1);
  add_norm(s, 2 * w, bn);
  s.add<nn::ReLU>();
  s.add<nn::ConvTranspose2d>(2 * w, w, 4, 2, 1);
  add_norm(s, w, bn);
  s.add<nn::ReLU>();
  s.add<nn::Conv2d>(w, out_channels, 3, 1, 1);
  s.add<nn::Tanh>();
  return s;
}

nn::Sequential build_reveal_net(int in_channels, int out_channels, int w, bool bn) {
  nn::Sequential s;
  s.add<nn::Conv2d>(in_channels, w, 3, 1, 1);
  add_norm(s, w, bn);
  s.add<nn::ReLU>();
  s.add<nn::Conv2d>(w, 2 * w, 3, 1, 1);
  add_norm(s, 2 * w, bn);
  s.add<nn::ReLU>();
  s.add<nn::Conv2d>(2 * w, w, 3, 1, 1);
  add_norm(s, w, bn);
  s.add<nn::ReLU>();
  s.add<nn::Conv2d>(w, out_channels, 3, 1, 1);
  s.add<nn::Sigmoid>();
  return s;
}

double mean_sq_diff(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

void check_batch(const Tensor& t, int channels, int size, const char* what) {
  if (t.c != channels || t.h != size || t.w != size) {
    throw UsageError(std::string(what) + " batch " + t.shape_string() + " does not match model (" +
                     std::to_string(channels) + ",N," + std::to_string(size) + "," +
                     std::to_string(size) + ")");
  }
}

}  // namespace

std::string_view to_string(DeepMode m) { return m == DeepMode::ddh ? "ddh" : "udh"; }

DeepMode parse_deep_mode(std::string_view s) {
  if (s == "ddh") return DeepMode::ddh;
  if (s == "udh") return DeepMode::udh;
  throw UsageError("unknown deep hiding mode '" + std::string(s) + "' (expected ddh|udh)");
}

void DeepHidingConfig::validate() const {
  if (!(beta > 0)) throw UsageError("deep hiding beta must be > 0");
  if (image_size < 4 || image_size % 4 != 0) throw UsageError("deep hiding image_size must be a multiple of 4");
  if (batch_size < 2) throw UsageError("deep hiding batch_size must be >= 2");
  if (channels_cover != 1 && channels_cover != 3) throw UsageError("channels_cover must be 1 or 3");
  if (channels_secret != 1 && channels_secret != 3) throw UsageError("channels_secret must be 1 or 3");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (!(learning_rate > 0)) throw UsageError("learning_rate must be > 0");
  if (width < 1) throw UsageError("width must be >= 1");
}

DeepHidingModel::DeepHidingModel(DeepHidingConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int hide_in = cfg_.mode == DeepMode::udh ? cfg_.channels_secret
                                                 : cfg_.channels_cover + cfg_.channels_secret;
  hide_net_ = build_hide_net(hide_in, cfg_.channels_cover, cfg_.width, cfg_.batch_norm);
  reveal_net_ = build_reveal_net(cfg_.channels_cover, cfg_.channels_secret, cfg_.width, cfg_.batch_norm);
  RngStream rng(child_seed(cfg_.seed, "weights"));
  hide_net_.init(rng);
  reveal_net_.init(rng);
}

std::vector<nn::ParamView> DeepHidingModel::parameters() {
  std::vector<nn::ParamView> p;
  hide_net_.collect(p, "hide.");
  reveal_net_.collect(p, "reveal.");
  return p;
}

void DeepHidingModel::require_trained() const {
  if (!trained_) throw StateError("deep hiding model is untrained");
}

Tensor DeepHidingModel::hide_input(const Tensor& cover, const Tensor& secret) const {
  check_batch(secret, cfg_.channels_secret, cfg_.image_size, "secret");
  if (cfg_.mode == DeepMode::udh) return secret;
  check_batch(cover, cfg_.channels_cover, cfg_.image_size, "cover");
  return nn::concat_channels(cover, secret);
}

Tensor DeepHidingModel::residual(const Tensor& cover, const Tensor& secret) const {
  return hide_net_.infer(hide_input(cover, secret));
}

std::vector<ImageTensor> DeepHidingModel::hide_batch(const std::vector<const ImageTensor*>& covers,
                                                     const std::vector<const ImageTensor*>& secrets) const {
  require_trained();
  if (covers.size() != secrets.size()) throw UsageError("hide_batch: cover/secret count mismatch");
  const Tensor c = nn::batch_from_images(covers);
  const Tensor s = nn::batch_from_images(secrets);
  check_batch(c, cfg_.channels_cover, cfg_.image_size, "cover");
  Tensor pre = residual(c, s);
  for (std::size_t i = 0; i < pre.size(); ++i) pre.data[i] += c.data[i];
  return nn::to_images(pre);
}

std::vector<ImageTensor> DeepHidingModel::reveal_batch(const std::vector<const ImageTensor*>& containers) const {
  require_trained();
  const Tensor x = nn::batch_from_images(containers);
  check_batch(x, cfg_.channels_cover, cfg_.image_size, "container");
  return nn::to_images(reveal_net_.infer(x));
}

ImageTensor DeepHidingModel::hide(const ImageTensor& cover, const ImageTensor& secret) const {
  return hide_batch({&cover}, {&secret}).front();
}

ImageTensor DeepHidingModel::reveal(const ImageTensor& container) const {
  return reveal_batch({&container}).front();
}

std::vector<Real> DeepHidingModel::perturbation(const ImageTensor& secret) const {
  require_trained();
  if (cfg_.mode != DeepMode::udh) throw UsageError("perturbation() is defined for UDH only");
  const ImageTensor* p = &secret;
  return nn::sample_values(hide_net_.infer(nn::batch_from_images(std::span(&p, 1))), 0);
}

DeepLoss DeepHidingModel::evaluate_loss(const Tensor& cover, const Tensor& secret) {
  const Tensor r = hide_net_.forward(hide_input(cover, secret));
  Tensor container = cover;
  for (std::size_t i = 0; i < container.size(); ++i) {
    container.data[i] = std::clamp(cover.data[i] + r.data[i], Real(0), Real(1));
  }
  const Tensor revealed = reveal_net_.forward(container);
  DeepLoss l;
  l.cover = mean_sq_diff(container, cover);
  l.secret = mean_sq_diff(revealed, secret);
  l.total = l.cover + cfg_.beta * l.secret;
  return l;
}

DeepLoss DeepHidingModel::accumulate_gradients(const Tensor& cover, const Tensor& secret) {
  const Tensor r = hide_net_.forward(hide_input(cover, secret));
  Tensor container = cover;
  std::vector<unsigned char> inside(container.size());
  for (std::size_t i = 0; i < container.size(); ++i) {
    const Real pre = cover.data[i] + r.data[i];
    inside[i] = pre > Real(0) && pre < Real(1);
    container.data[i] = std::clamp(pre, Real(0), Real(1));
  }
  const Tensor revealed = reveal_net_.forward(container);

  DeepLoss l;
  l.cover = mean_sq_diff(container, cover);
  l.secret = mean_sq_diff(revealed, secret);
  l.total = l.cover + cfg_.beta * l.secret;

  Tensor d_revealed = revealed;
  const auto ks = static_cast<Real>(2.0 * cfg_.beta / static_cast<double>(revealed.size()));
  for (std::size_t i = 0; i < d_revealed.size(); ++i) {
    d_revealed.data[i] = ks * (revealed.data[i] - secret.data[i]);
  }
  Tensor d_container = reveal_net_.backward(d_revealed);
  const auto kc = static_cast<Real>(2.0 / static_cast<double>(container.size()));
  for (std::size_t i = 0; i < d_container.size(); ++i) {
    const Real g = d_container.data[i] + kc * (container.data[i] - cover.data[i]);
    d_container.data[i] = inside[i] ? g : Real(0);
  }
  hide_net_.backward(d_container);
  return l;
}

DeepHidingModel train_deep_hiding(const LabeledDataset& train, const DeepHidingConfig& cfg,
                                  std::vector<EpochStats>* history, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() < 2) throw UsageError("deep hiding training needs at least 2 images");
  const Shape s = train.shape();
  if (s.height != cfg.image_size || s.width != cfg.image_size || s.channels != cfg.channels_cover ||
      s.channels != cfg.channels_secret) {
    throw UsageError("training images " + to_string(s) + " do not match deep hiding config");
  }
  DeepHidingModel model(cfg);
  nn::Adam opt(model.parameters(), {.learning_rate = cfg.learning_rate});
  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle(child_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    RngStream pairing(child_seed(cfg.seed, "pairing", static_cast<std::uint64_t>(epoch)));

    EpochStats stats{epoch, 0, 0, 0};
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 1 < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      if (end - start < 2) break;
      std::vector<const ImageTensor*> covers, secrets;
      for (std::size_t i = start; i < end; ++i) {
        covers.push_back(&train.images[order[i]]);
        secrets.push_back(&train.images[pairing.index(n)]);
      }
      const Tensor c = nn::batch_from_images(covers);
      const Tensor sec = nn::batch_from_images(secrets);
      opt.zero_grad();
      const DeepLoss l = model.accumulate_gradients(c, sec);
      if (!std::isfinite(l.total)) {
        throw TrainingError(std::string(to_string(cfg.mode)) + " training diverged at epoch " +
                            std::to_string(epoch));
      }
      opt.step();
      stats.loss += l.total;
      stats.cover_loss += l.cover;
      stats.secret_loss += l.secret;
      ++batches;
    }
    if (batches) {
      stats.loss /= static_cast<double>(batches);
      stats.cover_loss /= static_cast<double>(batches);
      stats.secret_loss /= static_cast<double>(batches);
    }
    if (history) history->push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  if (!nn::all_finite(model.parameters())) {
    throw TrainingError(std::string(to_string(cfg.mode)) + " training produced non-finite parameters");
  }
  model.mark_trained();
  return model;
}

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::steg
