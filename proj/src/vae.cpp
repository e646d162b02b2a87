#include "stegsan/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stegsan/error.hpp"
#include "stegsan/metrics.hpp"
#include "stegsan/nn/adam.hpp"

namespace stegsan::suds {
inline namespace STEGSAN_NN_NS {
namespace {

int bottleneck_side(const VaeConfig& cfg) { return cfg.image_size / 8; }
int bottleneck_features(const VaeConfig& cfg) {
  const int side = bottleneck_side(cfg);
  return 4 * cfg.width * side * side;
}

nn::Sequential build_encoder(const VaeConfig& cfg) {
  const int w = cfg.width;
  nn::Sequential s;
  s.add<nn::Conv2d>(cfg.channels, w, 4, 2, 1).add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::Conv2d>(w, 2 * w, 4, 2, 1).add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::Conv2d>(2 * w, 4 * w, 4, 2, 1).add<nn::LeakyReLU>(Real(0.2));
  s.add<nn::Flatten>();
  return s;
}

nn::Sequential build_decoder(const VaeConfig& cfg) {
  const int w = cfg.width;
  const int side = bottleneck_side(cfg);
  nn::Sequential s;
  s.add<nn::Linear>(cfg.latent, bottleneck_features(cfg)).add<nn::ReLU>();
  s.add<nn::Unflatten>(4 * w, side, side);
  s.add<nn::ConvTranspose2d>(4 * w, 2 * w, 4, 2, 1).add<nn::ReLU>();
  s.add<nn::ConvTranspose2d>(2 * w, w, 4, 2, 1).add<nn::ReLU>();
  s.add<nn::ConvTranspose2d>(w, cfg.channels, 4, 2, 1).add<nn::Sigmoid>();
  return s;
}

Tensor reparametrize(const Tensor& mu, const Tensor& logvar, const Tensor& eps) {
  Tensor z = mu;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.data[i] = mu.data[i] + std::exp(logvar.data[i] / 2) * eps.data[i];
  }
  return z;
}

std::vector<Real> column(const Tensor& t, int i) {
  std::vector<Real> v(static_cast<std::size_t>(t.c));
  for (int j = 0; j < t.c; ++j) v[static_cast<std::size_t>(j)] = t.data[static_cast<std::size_t>(j) * t.n + i];
  return v;
}

}  // namespace

void VaeConfig::validate() const {
  if (latent < 1) throw UsageError("latent size n must be >= 1");
  if (!(learning_rate > 0)) throw UsageError("learning_rate must be > 0");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (channels != 1 && channels != 3) throw UsageError("VAE channels must be 1 or 3");
  if (image_size < 8 || image_size % 8 != 0) throw UsageError("VAE image_size must be a multiple of 8");
  if (width < 1) throw UsageError("width must be >= 1");
}

std::vector<Real> sample_latent(std::span<const Real> mu, std::span<const Real> logvar,
                                std::span<const Real> eps) {
  if (mu.size() != logvar.size() || mu.size() != eps.size()) {
    throw UsageError("sample_latent: mu, logvar and eps must have equal lengths");
  }
  std::vector<Real> z(mu.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + std::exp(logvar[i] / 2) * eps[i];
  return z;
}

double kl_divergence(std::span<const Real> mu, std::span<const Real> logvar) {
  if (mu.size() != logvar.size()) throw UsageError("kl_divergence: length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i], lv = logvar[i];
    s += 1.0 + lv - m * m - std::exp(lv);
  }
  return -0.5 * s;
}

double reconstruction_loss(const ImageTensor& x, const ImageTensor& x_hat) {
  return mse(x, x_hat) / (kMaxPixel * kMaxPixel);
}

VaeModel::VaeModel(VaeConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      encoder_(),
      mu_head_(bottleneck_features(cfg), cfg.latent),
      logvar_head_(bottleneck_features(cfg), cfg.latent),
      decoder_() {
  encoder_ = build_encoder(cfg_);
  decoder_ = build_decoder(cfg_);
  RngStream rng(child_seed(cfg_.seed, "weights"));
  encoder_.init(rng);
  mu_head_.init(rng);
  logvar_head_.init(rng);
  decoder_.init(rng);
}

std::vector<nn::ParamView> VaeModel::parameters() {
  std::vector<nn::ParamView> p;
  encoder_.collect(p, "encoder.");
  mu_head_.collect(p, "mu.");
  logvar_head_.collect(p, "logvar.");
  decoder_.collect(p, "decoder.");
  return p;
}

void VaeModel::require_trained() const {
  if (!trained_) throw StateError("SUDS model is untrained");
}

void VaeModel::check_input(const Tensor& x) const {
  if (x.c != cfg_.channels || x.h != cfg_.image_size || x.w != cfg_.image_size) {
    throw UsageError("VAE input " + x.shape_string() + " does not match configured shape " +
                     to_string(image_shape()));
  }
}

std::pair<Tensor, Tensor> VaeModel::encode_tensor(const Tensor& x) const {
  check_input(x);
  const Tensor h = encoder_.infer(x);
  return {mu_head_.infer(h), logvar_head_.infer(h)};
}

Tensor VaeModel::decode_tensor(const Tensor& z) const {
  if (z.c != cfg_.latent || z.h != 1 || z.w != 1) {
    throw UsageError("latent batch " + z.shape_string() + " does not match n=" + std::to_string(cfg_.latent));
  }
  return decoder_.infer(z);
}

std::vector<Encoding> VaeModel::encode_batch(std::span<const ImageTensor* const> xs) const {
  const auto [mu, lv] = encode_tensor(nn::batch_from_images(xs));
  std::vector<Encoding> out;
  out.reserve(xs.size());
  for (int i = 0; i < mu.n; ++i) out.push_back({column(mu, i), column(lv, i)});
  return out;
}

Encoding VaeModel::encode(const ImageTensor& x) const {
  const ImageTensor* p = &x;
  return encode_batch(std::span(&p, 1)).front();
}

ImageTensor VaeModel::decode(std::span<const Real> z) const {
  if (static_cast<int>(z.size()) != cfg_.latent) {
    throw UsageError("decode: latent length " + std::to_string(z.size()) + " != n=" +
                     std::to_string(cfg_.latent));
  }
  Tensor t(cfg_.latent, 1, 1, 1);
  std::copy(z.begin(), z.end(), t.data.begin());
  return nn::sample_image(decoder_.infer(t), 0);
}

std::vector<ImageTensor> VaeModel::sanitize_batch(std::span<const ImageTensor* const> xs,
                                                  RngStream* rng) const {
  require_trained();
  auto [mu, lv] = encode_tensor(nn::batch_from_images(xs));
  Tensor z = mu;
  if (cfg_.sample_at_inference) {
    if (!rng) throw UsageError("sampling sanitizer needs an RNG stream");
    Tensor eps(mu.c, mu.n, 1, 1);
    for (auto& e : eps.data) e = rng->normal();
    z = reparametrize(mu, lv, eps);
  }
  return nn::to_images(decoder_.infer(z));
}

ImageTensor VaeModel::sanitize(const ImageTensor& x, RngStream* rng) const {
  const ImageTensor* p = &x;
  return sanitize_batch(std::span(&p, 1), rng).front();
}

VaeLoss VaeModel::evaluate_loss(const Tensor& x, const Tensor& eps) {
  check_input(x);
  const Tensor h = encoder_.forward(x);
  const Tensor mu = mu_head_.forward(h);
  const Tensor lv = logvar_head_.forward(h);
  const Tensor xhat = decoder_.forward(reparametrize(mu, lv, eps));
  VaeLoss l;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(xhat.data[i]) - x.data[i];
    l.reconstruction += d * d;
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.data[i], v = lv.data[i];
    l.kl += -0.5 * (1.0 + v - m * m - std::exp(v));
  }
  l.reconstruction /= x.n;
  l.kl /= x.n;
  l.total = l.reconstruction + l.kl;
  return l;
}

VaeLoss VaeModel::accumulate_gradients(const Tensor& x, const Tensor& eps) {
  check_input(x);
  const Tensor h = encoder_.forward(x);
  const Tensor mu = mu_head_.forward(h);
  const Tensor lv = logvar_head_.forward(h);
  const Tensor xhat = decoder_.forward(reparametrize(mu, lv, eps));
  const auto inv_n = Real(1) / static_cast<Real>(x.n);

  VaeLoss l;
  Tensor d_xhat = xhat;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real d = xhat.data[i] - x.data[i];
    l.reconstruction += static_cast<double>(d) * d;
    d_xhat.data[i] = 2 * d * inv_n;
  }
  const Tensor dz = decoder_.backward(d_xhat);

  Tensor d_mu = dz, d_lv = dz;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Real m = mu.data[i], v = lv.data[i];
    const Real ev = std::exp(v);
    l.kl += -0.5 * (1.0 + v - static_cast<double>(m) * m - ev);
    d_mu.data[i] = dz.data[i] + m * inv_n;
    d_lv.data[i] = dz.data[i] * eps.data[i] * std::exp(v / 2) / 2 + (ev - 1) / 2 * inv_n;
  }
  Tensor dh = mu_head_.backward(d_mu);
  const Tensor dh2 = logvar_head_.backward(d_lv);
  for (std::size_t i = 0; i < dh.size(); ++i) dh.data[i] += dh2.data[i];
  encoder_.backward(dh);

  l.reconstruction /= x.n;
  l.kl /= x.n;
  l.total = l.reconstruction + l.kl;
  return l;
}

VaeModel train_suds(const LabeledDataset& train, const VaeConfig& cfg, std::vector<EpochStats>* history,
                    const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) throw UsageError("SUDS training set is empty");
  const Shape s = train.shape();
  if (s.channels != cfg.channels || s.height != cfg.image_size || s.width != cfg.image_size) {
    throw UsageError("training images " + to_string(s) + " do not match VAE config");
  }
  VaeModel model(cfg);
  nn::Adam opt(model.parameters(), {.learning_rate = cfg.learning_rate});
  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle(child_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    RngStream noise(child_seed(cfg.seed, "eps", static_cast<std::uint64_t>(epoch)));

    EpochStats stats{epoch, 0, 0, 0};
    double seen = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const ImageTensor*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train.images[order[i]]);
      const Tensor x = nn::batch_from_images(batch);
      Tensor eps(cfg.latent, x.n, 1, 1);
      for (auto& e : eps.data) e = noise.normal();
      opt.zero_grad();
      const VaeLoss l = model.accumulate_gradients(x, eps);
      if (!std::isfinite(l.total)) {
        throw TrainingError("SUDS training diverged at epoch " + std::to_string(epoch));
      }
      opt.step();
      const double w = static_cast<double>(x.n);
      stats.loss += l.total * w;
      stats.reconstruction += l.reconstruction * w;
      stats.kl += l.kl * w;
      seen += w;
    }
    stats.loss /= seen;
    stats.reconstruction /= seen;
    stats.kl /= seen;
    if (history) history->push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  if (!nn::all_finite(model.parameters())) {
    throw TrainingError("SUDS training produced non-finite parameters");
  }
  model.mark_trained();
  return model;
}

}  // namespace STEGSAN_NN_NS
}  // namespace stegsan::suds
