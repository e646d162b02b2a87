#pragma once

#include "stegsan/image.hpp"
#include "stegsan/rng.hpp"

namespace stegsan::steg {

/// Additive Gaussian noise on the unit pixel scale.
struct NoiseConfig {
  float mu = 0.0f;
  float sigma = 0.02f;
  Seed seed{};

  void validate() const;
};

/// clip_unit(x + N(mu, sigma)) with i.i.d. per-pixel draws from `rng`.
ImageTensor gaussian_sanitize(const ImageTensor& x, const NoiseConfig& cfg, RngStream& rng);
/// Same, drawing from a fresh stream seeded with cfg.seed.
ImageTensor gaussian_sanitize(const ImageTensor& x, const NoiseConfig& cfg);

}  // namespace stegsan::steg
