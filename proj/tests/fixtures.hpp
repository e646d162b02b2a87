#pragma once

#include <random>

#include "stegsan/dataset.hpp"

namespace stegsan::testing {

/// Synthetic 10-class set: class d is a bright bar whose position and
/// orientation depend on d, on a noisy dark background.
inline LabeledDataset synthetic_digits(std::size_t n, std::uint64_t seed, int channels = 1, int size = 32) {
  LabeledDataset d;
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<float> bg(0.0f, 0.15f);
  std::uniform_int_distribution<int> jitter(-1, 1);
  const Shape s{channels, size, size};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 10);
    std::vector<float> px(s.size());
    for (auto& p : px) p = bg(g);
    const int pos = 4 + 5 * (label % 5) + jitter(g);
    const bool vertical = label >= 5;
    for (int c = 0; c < channels; ++c) {
      for (int a = 4; a < size - 4; ++a) {
        for (int t = 0; t < 3; ++t) {
          const int y = vertical ? a : pos + t;
          const int x = vertical ? pos + t : a;
          px[(static_cast<std::size_t>(c) * size + y) * size + x] = 0.9f;
        }
      }
    }
    d.images.emplace_back(s, std::move(px));
    d.labels.push_back(static_cast<std::uint8_t>(label));
  }
  return d;
}

}  // namespace stegsan::testing
