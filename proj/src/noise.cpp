#include "stegsan/noise.hpp"

#include <cmath>
#include <vector>

#include "stegsan/error.hpp"

namespace stegsan::steg {

void NoiseConfig::validate() const {
  if (!(sigma >= 0.0f) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw UsageError("noise sigma must be finite and >= 0");
  }
}

ImageTensor gaussian_sanitize(const ImageTensor& x, const NoiseConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (cfg.sigma == 0.0f && cfg.mu == 0.0f) return x;
  std::vector<float> v(x.pixels().begin(), x.pixels().end());
  for (auto& p : v) p += cfg.mu + cfg.sigma * rng.normal();
  return clip_unit(x.shape(), v);
}

ImageTensor gaussian_sanitize(const ImageTensor& x, const NoiseConfig& cfg) {
  RngStream rng(cfg.seed);
  return gaussian_sanitize(x, cfg, rng);
}

}  // namespace stegsan::steg
