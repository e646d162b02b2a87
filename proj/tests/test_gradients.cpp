// Central finite differences against analytic gradients, in double precision.
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "stegsan/deep_hiding.hpp"
#include "stegsan/nn/layers.hpp"
#include "stegsan/vae.hpp"

using namespace stegsan;
using nn::ParamView;
using nn::Tensor;

static_assert(std::is_same_v<nn::Real, double>);

namespace {

constexpr double kStep = 1e-6;
constexpr double kRelTol = 1e-4;

Tensor random_tensor(int c, int n, int h, int w, std::mt19937_64& g, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(c, n, h, w);
  for (auto& v : t.data) v = u(g);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

void check_close(double analytic, double numeric, const std::string& what) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  INFO(what << ": analytic " << analytic << " numeric " << numeric);
  CHECK(std::abs(analytic - numeric) / scale < kRelTol);
}

// Checks up to `per_tensor` entries of every trainable parameter.
void check_params(const std::vector<ParamView>& params, const std::function<double()>& loss,
                  int per_tensor = 12) {
  for (const auto& p : params) {
    if (!p.grad) continue;
    const std::size_t n = p.value->size();
    const std::size_t stride = std::max<std::size_t>(1, n / per_tensor);
    for (std::size_t i = 0; i < n; i += stride) {
      const double keep = (*p.value)[i];
      (*p.value)[i] = keep + kStep;
      const double up = loss();
      (*p.value)[i] = keep - kStep;
      const double down = loss();
      (*p.value)[i] = keep;
      check_close((*p.grad)[i], (up - down) / (2 * kStep), p.name + "[" + std::to_string(i) + "]");
    }
  }
}

// L = sum(r * layer(x)); checks input and parameter gradients.
void check_layer(nn::Layer& layer, Tensor x, std::mt19937_64& g) {
  RngStream init(Seed{5});
  layer.init(init);
  const Tensor y = layer.forward(x);
  const Tensor r = random_tensor(y.c, y.n, y.h, y.w, g);
  std::vector<ParamView> params;
  layer.collect(params, "");
  nn::zero_grad(params);
  layer.forward(x);
  const Tensor dx = layer.backward(r);
  CHECK(dx.same_shape(x));

  auto loss = [&] { return dot(layer.forward(x), r); };
  check_params(params, loss);
  const std::size_t stride = std::max<std::size_t>(1, x.size() / 40);
  for (std::size_t i = 0; i < x.size(); i += stride) {
    const double keep = x.data[i];
    x.data[i] = keep + kStep;
    const double up = loss();
    x.data[i] = keep - kStep;
    const double down = loss();
    x.data[i] = keep;
    check_close(dx.data[i], (up - down) / (2 * kStep), layer.describe() + " input[" + std::to_string(i) + "]");
  }
}

}  // namespace

TEST_CASE("layer gradients match finite differences") {
  std::mt19937_64 g(2024);
  SUBCASE("conv 3x3 stride 1") {
    nn::Conv2d l(2, 3, 3, 1, 1);
    check_layer(l, random_tensor(2, 2, 5, 5, g), g);
  }
  SUBCASE("conv 4x4 stride 2") {
    nn::Conv2d l(2, 3, 4, 2, 1);
    check_layer(l, random_tensor(2, 2, 6, 6, g), g);
  }
  SUBCASE("transposed conv 4x4 stride 2") {
    nn::ConvTranspose2d l(3, 2, 4, 2, 1);
    check_layer(l, random_tensor(3, 2, 3, 3, g), g);
  }
  SUBCASE("linear") {
    nn::Linear l(7, 4);
    check_layer(l, random_tensor(7, 3, 1, 1, g), g);
  }
  SUBCASE("batch norm") {
    nn::BatchNorm l(3);
    check_layer(l, random_tensor(3, 4, 3, 3, g), g);
  }
  SUBCASE("activations") {
    nn::ReLU relu;
    check_layer(relu, random_tensor(2, 2, 3, 3, g), g);
    nn::LeakyReLU leaky(0.2);
    check_layer(leaky, random_tensor(2, 2, 3, 3, g), g);
    nn::Sigmoid sig;
    check_layer(sig, random_tensor(2, 2, 3, 3, g, -3, 3), g);
    nn::Tanh tanh;
    check_layer(tanh, random_tensor(2, 2, 3, 3, g, -2, 2), g);
  }
  SUBCASE("max pool and reshapes") {
    nn::MaxPool2 pool;
    check_layer(pool, random_tensor(2, 2, 4, 4, g), g);
    nn::Flatten flat;
    check_layer(flat, random_tensor(2, 3, 2, 2, g), g);
    nn::Unflatten unflat(2, 2, 2);
    check_layer(unflat, random_tensor(8, 3, 1, 1, g), g);
  }
}

TEST_CASE("VAE loss gradient matches finite differences") {
  std::mt19937_64 g(99);
  suds::VaeConfig cfg;
  cfg.image_size = 8;
  cfg.width = 1;
  cfg.latent = 3;
  cfg.seed = Seed{17};
  suds::VaeModel model(cfg);
  const Tensor x = random_tensor(1, 3, 8, 8, g, 0, 1);
  const Tensor eps = random_tensor(3, 3, 1, 1, g, -1.5, 1.5);
  auto params = model.parameters();
  CHECK(nn::parameter_count(params) < 1000);
  nn::zero_grad(params);
  const auto l = model.accumulate_gradients(x, eps);
  CHECK(l.total == doctest::Approx(l.reconstruction + l.kl));
  check_params(params, [&] { return model.evaluate_loss(x, eps).total; }, 8);
}

TEST_CASE("deep hiding loss gradient matches finite differences") {
  for (auto mode : {steg::DeepMode::ddh, steg::DeepMode::udh}) {
    CAPTURE(steg::to_string(mode));
    std::mt19937_64 g(7);
    steg::DeepHidingConfig cfg;
    cfg.mode = mode;
    cfg.image_size = 8;
    cfg.width = 1;
    cfg.seed = Seed{3};
    steg::DeepHidingModel model(cfg);
    const Tensor cover = random_tensor(1, 3, 8, 8, g, 0.2, 0.8);
    const Tensor secret = random_tensor(1, 3, 8, 8, g, 0, 1);
    auto params = model.parameters();
    CHECK(nn::parameter_count(params) < 1000);
    nn::zero_grad(params);
    const auto l = model.accumulate_gradients(cover, secret);
    CHECK(l.total == doctest::Approx(l.cover + cfg.beta * l.secret));
    check_params(params, [&] { return model.evaluate_loss(cover, secret).total; }, 8);
  }
}
