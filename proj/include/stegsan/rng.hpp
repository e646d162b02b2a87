#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace stegsan {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

/// Derive an independent child seed for a named purpose ("noise",
/// "weights", "pairing", ...). Same root + same name gives the same child.
Seed child_seed(Seed root, std::string_view name);
Seed child_seed(Seed root, std::string_view name, std::uint64_t index);

/// 64-bit FNV-1a. Used for seed derivation and content hashes.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Single-owner pseudo-random stream.
class RngStream {
 public:
  explicit RngStream(Seed seed) : engine_(seed.value) {}

  double uniform() { return unit_(engine_); }
  float normal() { return normal_(engine_); }
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<float> normal_{0.0f, 1.0f};
};

}  // namespace stegsan
